#pragma once

#include <Eigen/Dense>

namespace influence::nn {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXd;

enum class KernelMode { serial, parallel };

// Process-wide choice of matrix-product kernel. `serial` is the naive
// reference loop, `parallel` splits rows across OpenMP threads and runs each
// block through Eigen.
void set_kernel_mode(KernelMode mode);
KernelMode kernel_mode();

// C = A * B
Mat matmul(const Mat& a, const Mat& b);
// C = A^T * B
Mat matmul_tn(const Mat& a, const Mat& b);
// C = A * B^T
Mat matmul_nt(const Mat& a, const Mat& b);

namespace serial {
Mat matmul(const Mat& a, const Mat& b);
Mat matmul_tn(const Mat& a, const Mat& b);
Mat matmul_nt(const Mat& a, const Mat& b);
}  // namespace serial

namespace parallel {
Mat matmul(const Mat& a, const Mat& b);
Mat matmul_tn(const Mat& a, const Mat& b);
Mat matmul_nt(const Mat& a, const Mat& b);
}  // namespace parallel

}  // namespace influence::nn
