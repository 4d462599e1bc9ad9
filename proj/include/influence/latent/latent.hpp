#pragma once

#include <vector>

#include "influence/data/dataset.hpp"
#include "influence/rl/cql.hpp"

namespace influence {

inline constexpr int kLatentDim = 8;
inline constexpr int kHistoryWindow = 4;
// Per history step: scaled features, one-hot action, valid flag.
inline constexpr int kEncoderStepDim = kFeatureDim + kNumActions + 1;

// Diagonal Gaussian belief over the partner's latent strategy.
struct LatentBelief {
  Vec mean;
  Vec logvar;

  static LatentBelief standard_normal(int dim = kLatentDim);
};

// Closed-form KL(q || p) between diagonal Gaussians.
double kl_diag_gauss(const LatentBelief& q, const LatentBelief& p);

enum class DecoderKind {
  action,      // d(partner action | z)
  next_state,  // d(s' | s, a, z), unit-variance Gaussian
};

struct LatentSpec {
  int window = kHistoryWindow;
  int hidden = 256;
  int latent_dim = kLatentDim;
  std::vector<int> decoder_hidden{16, 16};
  DecoderKind decoder = DecoderKind::action;
};

// Recurrent encoder f(z | h) with a linear mean/log-variance head, plus the
// decoder. Tensor prefixes: enc/ for the encoder, dec/ for the decoder.
struct LatentModel {
  LatentSpec spec;
  nn::Lstm lstm;
  nn::Mlp head;
  nn::Mlp decoder;
  nn::ParamBundle params;

  LatentBelief encode(const History& h) const;
  // One row per history.
  void encode_batch(const std::vector<const History*>& hs, Mat& mean, Mat& logvar) const;
};

LatentModel make_latent_model(const LatentSpec& spec, std::uint64_t seed);

// Encoder input tensors for a batch of histories (one matrix per step).
void encoder_inputs(const std::vector<const History*>& hs, int window, std::vector<Mat>& xs, std::vector<Vec>& masks);

struct ElboBatch {
  std::vector<History> history;       // h_t
  std::vector<History> prev_history;  // h_{t-1}; ignored where has_prev is false
  std::vector<char> has_prev;
  std::vector<int> partner_a;
  Mat s, s_next;      // next_state decoder only (network inputs)
  std::vector<int> a;  // next_state decoder only
  Mat noise;           // batch x latent_dim standard normal draws
  Mat prior_mean, prior_logvar;  // filled by freeze_prior; empty means compute on the fly

  std::size_t size() const { return history.size(); }
};

struct ElboLoss {
  double loss = 0.0;
  double reconstruction = 0.0;
  double kl = 0.0;
  double accuracy = 0.0;  // action decoder: argmax hit rate
  nn::ParamBundle grads;
};

// loss = mean[-log d(target | z) + beta * KL(f(z|h_t) || prior)],
// z = mean + exp(logvar / 2) * noise. The prior is the posterior of h_{t-1}
// under the current parameters, held constant, or N(0, I) at episode start.
ElboLoss elbo_loss(const ElboBatch& batch, const LatentModel& model, double beta, bool with_grads = true);

// Stores the prior of every element under `model` in the batch, so later
// calls with perturbed parameters see the same prior.
void freeze_prior(ElboBatch& batch, const LatentModel& model);

struct LatentConfig {
  LatentSpec spec;
  double beta = 0.1;
  int batch_size = 64;
  int iterations = 20;
  int updates_per_iteration = 50;
  double lr = 3e-4;
  std::uint64_t seed = 0;
};

struct LatentIterationLog {
  int iteration = 0;
  double loss = 0.0;
  double reconstruction = 0.0;
  double accuracy = 0.0;
  double kl = 0.0;
};

ElboBatch make_elbo_batch(const Dataset& d, const std::vector<std::pair<std::size_t, std::size_t>>& picks,
                          int window, int latent_dim, nn::Rng& rng);

LatentModel train_latent(const Dataset& d, const LatentConfig& cfg, std::vector<LatentIterationLog>* log = nullptr);

// Encoder beliefs for every history index 0..n of every episode
// (index n is the history after the final transition).
struct BeliefTable {
  std::vector<Mat> mean;    // per episode, (n + 1) x latent_dim
  std::vector<Mat> logvar;
};
BeliefTable belief_table(const Dataset& d, const LatentModel& model);

// How the z paired with a state is chosen.
enum class ZSchedule {
  every_tick,   // belief of the history right before the state
  block_start,  // belief held from the last tick with t mod c == 0
};

// History index whose belief pairs with transition `index` of `ep`.
int z_source_index(const Episode& ep, int index, ZSchedule schedule, int c);

QData latent_q_data(const Dataset& d, const LatentModel& model, ZSchedule schedule);
QData latent_q_data(const Dataset& d, const BeliefTable& beliefs, ZSchedule schedule, int c);

// Input row for the memory agent: [s_t, s_{t-1}, ..., s_{t-c}], zero where
// the window reaches before the episode start. Width 64 * (c + 1).
QData memory_q_data(const Dataset& d, int c);

// Rows `idx` with z = mean + exp(logvar / 2) * noise drawn by the caller.
QBatch latent_batch_fixed_z(const QData& data, const std::vector<std::size_t>& idx, const Mat& noise,
                            const Mat& noise_next);

// CQL loss over Q(s, a, z) with the frozen encoder's beliefs already in
// `data`; gradients reach the Q-function only.
CqlLoss latent_cql_loss(const QData& data, const std::vector<std::size_t>& idx, const Mat& noise,
                        const Mat& noise_next, const QFunction& q, const QFunction& q_target, const TrainConfig& cfg,
                        bool with_grads = true);

// Greedy action of Q(s, ., z).
Action act_with_z(const QFunction& q, const FeatureVector& s, const Vec& z);

// z is the posterior mean of the current window, refreshed every call.
Action act_latent(const QFunction& q, const FeatureVector& s, const History& h, const LatentModel& model);

struct LiliState {
  Vec z;
  bool ready = false;
};

// z is re-estimated only when t mod c == 0 (or on first use) and held in
// between.
Action act_offline_lili(const QFunction& q, const FeatureVector& s, const History& h, const LatentModel& model, int t,
                        LiliState& state);

// window[k] is s_{t-k}; entries missing at the front of an episode are zero.
Action act_memory(const QFunction& q, const std::vector<FeatureVector>& window, int c);

}  // namespace influence
