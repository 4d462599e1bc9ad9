#pragma once

#include <string>
#include <vector>

#include "influence/env/features.hpp"
#include "influence/nn/layers.hpp"

namespace influence {

using nn::Mat;
using nn::Vec;

// Network input for one feature vector: offsets and absolute positions are
// divided by 10 (the 99 sentinel becomes 9.9), every other entry is kept.
void write_net_input(const FeatureVector& f, double* out);
nn::RowVec net_input(const FeatureVector& f);

// A network with kNumActions outputs over a fixed-width input. Used both as
// a Q-function and as a behavior-cloning classifier (outputs are logits).
struct QFunction {
  nn::Mlp net;
  nn::ParamBundle params;

  int input_dim() const { return net.spec().input; }
  Mat values(const Mat& x) const { return net.forward(params, x); }
  Vec values(const nn::RowVec& x) const;
};

inline const std::vector<int> kDefaultHidden{256, 256, 256};

QFunction make_q_function(int input_dim, std::uint64_t seed, const std::vector<int>& hidden = kDefaultHidden,
                          const std::string& prefix = "q/");

// Index of the largest entry; ties go to the lowest index (action order).
int argmax_action(const Vec& values);
Action act(const QFunction& q, const nn::RowVec& input);
Action act(const QFunction& q, const FeatureVector& f);

}  // namespace influence
