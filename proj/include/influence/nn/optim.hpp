#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "influence/nn/params.hpp"

namespace influence::nn {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  ParamBundle m;
  ParamBundle v;
  long step = 0;
};

AdamState adam_init(const ParamBundle& params);

// One bias-corrected adaptive-moment update of `params` in place.
void adam_step(ParamBundle& params, const ParamBundle& grads, AdamState& state, const AdamConfig& cfg = {});

class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GradCheckFailure {
  std::string tensor;
  Eigen::Index index;
  double analytic;
  double numeric;
  double rel_error;
};

struct GradCheckReport {
  std::size_t checked = 0;
  double max_rel_error = 0.0;
  double mean_rel_error = 0.0;
  std::vector<GradCheckFailure> failures;
  bool passed() const { return failures.empty(); }
};

struct GradCheckOptions {
  double eps = 1e-5;
  double tol = 1e-3;
  std::size_t max_samples = 200;  // 0 checks every coordinate
  std::uint64_t seed = 0;
  // Denominator floor of the relative error, so that coordinates whose true
  // gradient is numerically zero compare by absolute difference.
  double abs_floor = 1e-6;
};

// Loss and analytic gradient of a parameter bundle.
using LossWithGrad = std::function<std::pair<double, ParamBundle>(const ParamBundle&)>;

// Compares the analytic gradient against central differences on a random
// subset of coordinates. rel = |a - n| / max(|a|, |n|, abs_floor).
// `loss_only`, when given, evaluates the perturbed losses without the
// backward pass.
using LossOnly = std::function<double(const ParamBundle&)>;
GradCheckReport grad_check(const LossWithGrad& fn, const ParamBundle& params, const GradCheckOptions& opt = {},
                           const LossOnly& loss_only = {});

}  // namespace influence::nn
