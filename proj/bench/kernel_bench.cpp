#include <benchmark/benchmark.h>

#include <random>

#include "influence/nn/kernels.hpp"
#include "influence/rl/cql.hpp"

using namespace influence;
using influence::nn::Mat;

namespace {

Mat random_mat(Eigen::Index r, Eigen::Index c, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> n;
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

template <Mat (*F)(const Mat&, const Mat&)>
void bm_product(benchmark::State& st) {
  const auto n = st.range(0);
  const Mat a = random_mat(256, n, 1), b = random_mat(n, n, 2);
  for (auto _ : st) benchmark::DoNotOptimize(F(a, b));
  st.SetItemsProcessed(st.iterations() * 256 * n * n);
}

template <Mat (*F)(const Mat&, const Mat&)>
void bm_product_tn(benchmark::State& st) {
  const auto n = st.range(0);
  const Mat a = random_mat(256, n, 1), b = random_mat(256, n, 2);
  for (auto _ : st) benchmark::DoNotOptimize(F(a, b));
  st.SetItemsProcessed(st.iterations() * 256 * n * n);
}

void bm_cql_step(benchmark::State& st) {
  nn::set_kernel_mode(st.range(0) ? nn::KernelMode::parallel : nn::KernelMode::serial);
  const QFunction q = make_q_function(kFeatureDim, 4);
  QBatch batch;
  batch.s = random_mat(256, kFeatureDim, 5);
  batch.s_next = random_mat(256, kFeatureDim, 6);
  batch.r = Eigen::VectorXd::Zero(256);
  batch.done = Eigen::VectorXd::Zero(256);
  for (int i = 0; i < 256; ++i) batch.a.push_back(i % kNumActions);
  TrainConfig cfg;
  for (auto _ : st) benchmark::DoNotOptimize(cql_loss(batch, q, q, cfg).loss);
  nn::set_kernel_mode(nn::KernelMode::parallel);
}

}  // namespace

BENCHMARK(bm_product<nn::serial::matmul>)->Arg(64)->Arg(256);
BENCHMARK(bm_product<nn::parallel::matmul>)->Arg(64)->Arg(256);
BENCHMARK(bm_product_tn<nn::serial::matmul_tn>)->Arg(64)->Arg(256);
BENCHMARK(bm_product_tn<nn::parallel::matmul_tn>)->Arg(64)->Arg(256);
BENCHMARK(bm_cql_step)->Arg(0)->Arg(1)->ArgName("parallel");

BENCHMARK_MAIN();
