#pragma once

#include <string>
#include <vector>

#include "influence/nn/params.hpp"

namespace influence::nn {

// Fully connected network with rectifier activations on hidden layers and a
// linear output. Tensors are named <prefix>W<i> (in x out) and <prefix>b<i>
// (1 x out). Rows of the input are batch elements.
struct MlpSpec {
  int input = 0;
  std::vector<int> hidden;
  int output = 0;

  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

struct MlpCache {
  std::vector<Mat> inputs;  // input to each layer
  std::vector<Mat> pre;     // pre-activation of each layer
};

class Mlp {
 public:
  Mlp() = default;
  Mlp(MlpSpec spec, std::string prefix) : spec_(std::move(spec)), prefix_(std::move(prefix)) {}

  const MlpSpec& spec() const { return spec_; }
  const std::string& prefix() const { return prefix_; }
  int layers() const { return static_cast<int>(spec_.hidden.size()) + 1; }
  std::string weight(int layer) const { return prefix_ + "W" + std::to_string(layer); }
  std::string bias(int layer) const { return prefix_ + "b" + std::to_string(layer); }

  // Adds this network's tensors to `params`, initialized with fan-in scaling.
  void init(ParamBundle& params, Rng& rng) const;

  Mat forward(const ParamBundle& params, const Mat& x, MlpCache* cache = nullptr) const;
  // Accumulates parameter gradients into `grads` and returns dL/dx.
  Mat backward(const ParamBundle& params, const MlpCache& cache, const Mat& dy, ParamBundle& grads) const;

 private:
  MlpSpec spec_;
  std::string prefix_;
};

// Single-layer gated recurrent cell (input, forget, cell, output gates)
// over a fixed window. Tensors: <prefix>Wx (in x 4H), <prefix>Wh (H x 4H),
// <prefix>b (1 x 4H), gate blocks in the order i, f, g, o.
//
// Each step carries a per-row mask; a masked-out row keeps its previous
// hidden and cell state, so a fully padded window returns the zero state.
struct LstmSpec {
  int input = 0;
  int hidden = 0;

  friend bool operator==(const LstmSpec&, const LstmSpec&) = default;
};

struct LstmCache {
  std::vector<Mat> x, h_prev, c_prev, i, f, g, o, c_new, tanh_c;
  std::vector<Vec> mask;
};

class Lstm {
 public:
  Lstm() = default;
  Lstm(LstmSpec spec, std::string prefix) : spec_(spec), prefix_(std::move(prefix)) {}

  const LstmSpec& spec() const { return spec_; }
  std::string wx() const { return prefix_ + "Wx"; }
  std::string wh() const { return prefix_ + "Wh"; }
  std::string b() const { return prefix_ + "b"; }

  // Fan-in uniform input weights, orthogonal recurrence, forget-gate bias 1.
  void init(ParamBundle& params, Rng& rng) const;

  // xs[t] is batch x input, masks[t] has one entry (0 or 1) per row.
  // Returns the final hidden state (batch x hidden).
  Mat forward(const ParamBundle& params, const std::vector<Mat>& xs, const std::vector<Vec>& masks,
              LstmCache* cache = nullptr) const;
  void backward(const ParamBundle& params, const LstmCache& cache, const Mat& dh_final, ParamBundle& grads) const;

 private:
  LstmSpec spec_;
  std::string prefix_;
};

Mat relu(const Mat& x);
Mat sigmoid(const Mat& x);

// Row-wise log-sum-exp and softmax.
Vec logsumexp_rows(const Mat& x);
Mat softmax_rows(const Mat& x);

}  // namespace influence::nn
