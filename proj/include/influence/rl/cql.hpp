#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "influence/data/dataset.hpp"
#include "influence/nn/optim.hpp"
#include "influence/rl/q_function.hpp"

namespace influence {

struct TrainConfig {
  double gamma = 0.99;
  int batch_size = 256;
  int target_update_period = 500;
  int updates_per_iteration = 200;
  int iterations = 100;
  double lr = 3e-4;
  double lr_final = -1.0;  // < 0: constant learning rate
  double alpha = 1.0;
  std::uint64_t seed = 0;
  double reward_scale = 1.0;
  // Episode ends in the data are horizon cuts, not terminal states: keep
  // bootstrapping through them unless this is false.
  bool bootstrap_time_limit = true;
  std::vector<int> hidden = kDefaultHidden;
};

// Fixed-width training inputs. Latent variants also carry the frozen
// encoder's beliefs for the current and next history; a fresh z is drawn
// from them for every sampled element and appended to the input.
struct QData {
  Mat s, s_next;
  std::vector<int> a;
  Vec r;
  Vec done;
  Mat z_mean, z_logvar, z_mean_next, z_logvar_next;

  std::size_t size() const { return a.size(); }
  bool latent() const { return z_mean.size() > 0; }
  int input_dim() const { return static_cast<int>(s.cols() + z_mean.cols()); }
};

QData q_data(const Dataset& d);

struct QBatch {
  Mat s, s_next;
  std::vector<int> a;
  Vec r;
  Vec done;

  std::size_t size() const { return a.size(); }
};

// Rows `idx` of `data`; latent rows get z = mean + exp(logvar / 2) * noise.
QBatch make_batch(const QData& data, const std::vector<std::size_t>& idx, nn::Rng& rng);

struct CqlLoss {
  double loss = 0.0;
  double bellman = 0.0;      // mean squared error against the targets
  double regularizer = 0.0;  // mean of logsumexp Q(s, .) - Q(s, a_data)
  double mean_data_q = 0.0;
  double ood_gap = 0.0;  // mean over non-data actions of Q(s, a') minus Q(s, a_data)
  nn::ParamBundle grads;
};

// loss = mean (Q(s,a) - y)^2 + alpha * mean[logsumexp_a' Q(s,a') - Q(s,a)]
// y = reward_scale * r + gamma * (1 - terminal) * max_a' Q_target(s', a')
CqlLoss cql_loss(const QBatch& batch, const QFunction& q, const QFunction& q_target, const TrainConfig& cfg,
                 bool with_grads = true);

struct IterationLog {
  int iteration = 0;
  double loss = 0.0;
  double bellman = 0.0;
  double regularizer = 0.0;
  double mean_data_q = 0.0;
  double ood_gap = 0.0;
  double accuracy = 0.0;  // classifiers only
};

struct TrainingCurve {
  std::vector<IterationLog> iterations;
  void write_csv(std::ostream& out) const;
};

QFunction train_q(const QData& data, const TrainConfig& cfg, TrainingCurve* curve = nullptr);
QFunction train_cql(const Dataset& d, const TrainConfig& cfg, TrainingCurve* curve = nullptr);

struct BcLoss {
  double loss = 0.0;
  double accuracy = 0.0;
  nn::ParamBundle grads;
};

// Mean 6-way cross-entropy of the network's logits against the data actions.
BcLoss bc_loss(const Mat& x, const std::vector<int>& a, const QFunction& net, bool with_grads = true);

QFunction train_bc(const QData& data, const TrainConfig& cfg, TrainingCurve* curve = nullptr);
QFunction train_bc(const Dataset& d, const TrainConfig& cfg, TrainingCurve* curve = nullptr);

}  // namespace influence
