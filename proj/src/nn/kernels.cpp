#include "influence/nn/kernels.hpp"

#include <atomic>
#include <stdexcept>

namespace influence::nn {

namespace {

std::atomic<KernelMode> g_mode{KernelMode::parallel};
constexpr Eigen::Index kRowBlock = 64;

void check_inner(Eigen::Index lhs, Eigen::Index rhs) {
  if (lhs != rhs) throw std::invalid_argument("matmul: inner dimensions differ");
}

}  // namespace

void set_kernel_mode(KernelMode mode) { g_mode.store(mode); }
KernelMode kernel_mode() { return g_mode.load(); }

Mat matmul(const Mat& a, const Mat& b) {
  return kernel_mode() == KernelMode::serial ? serial::matmul(a, b) : parallel::matmul(a, b);
}
Mat matmul_tn(const Mat& a, const Mat& b) {
  return kernel_mode() == KernelMode::serial ? serial::matmul_tn(a, b) : parallel::matmul_tn(a, b);
}
Mat matmul_nt(const Mat& a, const Mat& b) {
  return kernel_mode() == KernelMode::serial ? serial::matmul_nt(a, b) : parallel::matmul_nt(a, b);
}

namespace serial {

Mat matmul(const Mat& a, const Mat& b) {
  check_inner(a.cols(), b.rows());
  Mat c = Mat::Zero(a.rows(), b.cols());
  for (Eigen::Index j = 0; j < b.cols(); ++j)
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
      const double bkj = b(k, j);
      for (Eigen::Index i = 0; i < a.rows(); ++i) c(i, j) += a(i, k) * bkj;
    }
  return c;
}

Mat matmul_tn(const Mat& a, const Mat& b) {
  check_inner(a.rows(), b.rows());
  Mat c = Mat::Zero(a.cols(), b.cols());
  for (Eigen::Index j = 0; j < b.cols(); ++j)
    for (Eigen::Index i = 0; i < a.cols(); ++i) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < a.rows(); ++k) acc += a(k, i) * b(k, j);
      c(i, j) = acc;
    }
  return c;
}

Mat matmul_nt(const Mat& a, const Mat& b) {
  check_inner(a.cols(), b.cols());
  Mat c = Mat::Zero(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j)
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
      const double bjk = b(j, k);
      for (Eigen::Index i = 0; i < a.rows(); ++i) c(i, j) += a(i, k) * bjk;
    }
  return c;
}

}  // namespace serial

namespace parallel {

Mat matmul(const Mat& a, const Mat& b) {
  check_inner(a.cols(), b.rows());
  Mat c(a.rows(), b.cols());
  const Eigen::Index n = a.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index r = 0; r < n; r += kRowBlock) {
    const Eigen::Index len = std::min(kRowBlock, n - r);
    c.middleRows(r, len).noalias() = a.middleRows(r, len) * b;
  }
  return c;
}

Mat matmul_tn(const Mat& a, const Mat& b) {
  check_inner(a.rows(), b.rows());
  Mat c(a.cols(), b.cols());
  const Eigen::Index n = a.cols();
#pragma omp parallel for schedule(static)
  for (Eigen::Index r = 0; r < n; r += kRowBlock) {
    const Eigen::Index len = std::min(kRowBlock, n - r);
    c.middleRows(r, len).noalias() = a.middleCols(r, len).transpose() * b;
  }
  return c;
}

Mat matmul_nt(const Mat& a, const Mat& b) {
  check_inner(a.cols(), b.cols());
  Mat c(a.rows(), b.rows());
  const Eigen::Index n = a.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index r = 0; r < n; r += kRowBlock) {
    const Eigen::Index len = std::min(kRowBlock, n - r);
    c.middleRows(r, len).noalias() = a.middleRows(r, len) * b.transpose();
  }
  return c;
}

}  // namespace parallel

}  // namespace influence::nn
