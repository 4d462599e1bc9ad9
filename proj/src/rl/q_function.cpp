#include "influence/rl/q_function.hpp"

namespace influence {

void write_net_input(const FeatureVector& f, double* out) {
  for (int i = 0; i < kFeatureDim; ++i) {
    const bool scaled = is_offset_feature(i) || i == feature::position || i == feature::position + 1;
    out[i] = scaled ? f[static_cast<std::size_t>(i)] * 0.1 : f[static_cast<std::size_t>(i)];
  }
}

nn::RowVec net_input(const FeatureVector& f) {
  nn::RowVec r(kFeatureDim);
  write_net_input(f, r.data());
  return r;
}

Vec QFunction::values(const nn::RowVec& x) const {
  Mat m = x;
  return net.forward(params, m).row(0).transpose();
}

QFunction make_q_function(int input_dim, std::uint64_t seed, const std::vector<int>& hidden, const std::string& prefix) {
  QFunction q;
  q.net = nn::Mlp(nn::MlpSpec{input_dim, hidden, kNumActions}, prefix);
  nn::Rng rng(seed);
  q.net.init(q.params, rng);
  return q;
}

int argmax_action(const Vec& values) {
  int best = 0;
  for (int i = 1; i < values.size(); ++i)
    if (values(i) > values(best)) best = i;
  return best;
}

Action act(const QFunction& q, const nn::RowVec& input) { return action_at(argmax_action(q.values(input))); }
Action act(const QFunction& q, const FeatureVector& f) { return act(q, net_input(f)); }

}  // namespace influence
