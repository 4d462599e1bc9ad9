#include "influence/nn/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace influence::nn {

AdamState adam_init(const ParamBundle& params) { return AdamState{params.zeros_like(), params.zeros_like(), 0}; }

void adam_step(ParamBundle& params, const ParamBundle& grads, AdamState& state, const AdamConfig& cfg) {
  if (!params.same_shapes(grads) || !params.same_shapes(state.m))
    throw std::invalid_argument("adam_step: parameter, gradient and moment shapes differ");
  if (!grads.all_finite()) throw NonFiniteError("adam_step: non-finite gradient");
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.tensor_count(); ++i) {
    Mat& m = state.m.tensor(i);
    Mat& v = state.v.tensor(i);
    const Mat& g = grads.tensor(i);
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    params.tensor(i).array() -= cfg.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.eps);
  }
  if (!params.all_finite()) throw NonFiniteError("adam_step: parameters became non-finite");
}

GradCheckReport grad_check(const LossWithGrad& fn, const ParamBundle& params, const GradCheckOptions& opt,
                           const LossOnly& loss_only) {
  const LossOnly eval = loss_only ? loss_only : LossOnly([&](const ParamBundle& p) { return fn(p).first; });
  GradCheckReport report;
  const std::size_t n = params.size();
  if (n == 0) return report;
  const auto [loss0, analytic] = fn(params);
  (void)loss0;
  if (!analytic.same_shapes(params)) throw std::invalid_argument("grad_check: gradient shape mismatch");

  std::vector<std::size_t> coords(n);
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  if (opt.max_samples != 0 && opt.max_samples < n) {
    Rng rng(opt.seed);
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(opt.max_samples);
    std::sort(coords.begin(), coords.end());
  }

  // flat index -> (tensor, offset) for reporting
  std::vector<std::size_t> starts;
  std::size_t acc = 0;
  for (std::size_t t = 0; t < params.tensor_count(); ++t) {
    starts.push_back(acc);
    acc += static_cast<std::size_t>(params.tensor(t).size());
  }

  ParamBundle probe = params;
  double sum = 0.0;
  for (std::size_t c : coords) {
    const double orig = probe.flat(c);
    probe.flat(c) = orig + opt.eps;
    const double up = eval(probe);
    probe.flat(c) = orig - opt.eps;
    const double down = eval(probe);
    probe.flat(c) = orig;
    const double numeric = (up - down) / (2.0 * opt.eps);
    const double a = analytic.flat(c);
    const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), opt.abs_floor});
    sum += rel;
    report.max_rel_error = std::max(report.max_rel_error, rel);
    if (!(rel <= opt.tol)) {
      const auto t = static_cast<std::size_t>(std::upper_bound(starts.begin(), starts.end(), c) - starts.begin() - 1);
      report.failures.push_back(
          GradCheckFailure{params.name(t), static_cast<Eigen::Index>(c - starts[t]), a, numeric, rel});
    }
  }
  report.checked = coords.size();
  report.mean_rel_error = sum / static_cast<double>(coords.size());
  return report;
}

}  // namespace influence::nn
