#include <chrono>
#include <random>

#include "common.hpp"
#include "influence/latent/latent.hpp"

using namespace influence;

namespace {

Dataset stubborn_corpus(Preference p, int episodes, std::uint64_t seed) {
  GenerateConfig g;
  g.layout = builtin_layout("open_asymmetric_advantages");
  g.ego_spec = PartnerSpec::greedy(Preference::none, 0.1);
  g.partner_spec = PartnerSpec::stubborn(p, 0.1);
  g.episodes = episodes;
  g.horizon = 200;
  g.seed = seed;
  return attach_histories(generate(g), kHistoryWindow);
}

struct Points {
  Mat x;
  std::vector<int> y;
};

// One row per full-window history; label 1 for the tomato corpus.
void add_points(const Dataset& d, const LatentModel& m, int label, std::vector<Vec>& xs, std::vector<int>& ys) {
  const BeliefTable b = belief_table(d, m);
  for (std::size_t e = 0; e < d.episodes.size(); ++e)
    for (Eigen::Index t = kHistoryWindow; t < b.mean[e].rows(); ++t) {
      xs.emplace_back(b.mean[e].row(t).transpose());
      ys.push_back(label);
    }
}

// One row per episode: the average belief mean over its full-window histories.
Points episode_points(const Dataset& onion, const Dataset& tomato, const LatentModel& m) {
  std::vector<Vec> xs;
  Points p;
  int label = 0;
  for (const Dataset* d : {&onion, &tomato}) {
    const BeliefTable b = belief_table(*d, m);
    for (const Mat& means : b.mean) {
      xs.emplace_back(means.bottomRows(means.rows() - kHistoryWindow).colwise().mean().transpose());
      p.y.push_back(label);
    }
    ++label;
  }
  p.x = Mat(static_cast<Eigen::Index>(xs.size()), m.spec.latent_dim);
  for (std::size_t i = 0; i < xs.size(); ++i) p.x.row(static_cast<Eigen::Index>(i)) = xs[i].transpose();
  return p;
}

Points points(const Dataset& onion, const Dataset& tomato, const LatentModel& m) {
  std::vector<Vec> xs;
  Points p;
  add_points(onion, m, 0, xs, p.y);
  add_points(tomato, m, 1, xs, p.y);
  p.x = Mat(static_cast<Eigen::Index>(xs.size()), m.spec.latent_dim);
  for (std::size_t i = 0; i < xs.size(); ++i) p.x.row(static_cast<Eigen::Index>(i)) = xs[i].transpose();
  return p;
}

// Logistic regression by full-batch gradient descent on standardized inputs.
struct Probe {
  Vec mu, sd, w;
  double b = 0.0;

  void fit(const Points& p) {
    mu = p.x.colwise().mean().transpose();
    sd = ((p.x.rowwise() - mu.transpose()).array().square().colwise().mean().sqrt() + 1e-8).matrix().transpose();
    const Mat z = standardize(p.x);
    w = Vec::Zero(z.cols());
    for (int it = 0; it < 2000; ++it) {
      const Vec logits = (z * w).array() + b;
      Vec g(z.rows());
      for (Eigen::Index i = 0; i < z.rows(); ++i) g[i] = 1.0 / (1.0 + std::exp(-logits[i])) - p.y[i];
      w -= 0.5 * z.transpose() * g / static_cast<double>(z.rows());
      b -= 0.5 * g.mean();
    }
  }
  Mat standardize(const Mat& x) const {
    return (x.rowwise() - mu.transpose()).array().rowwise() / sd.transpose().array();
  }
  double accuracy(const Points& p) const {
    const Vec logits = (standardize(p.x) * w).array() + b;
    int hits = 0;
    for (Eigen::Index i = 0; i < logits.size(); ++i) hits += (logits[i] > 0.0) == (p.y[i] == 1);
    return static_cast<double>(hits) / static_cast<double>(logits.size());
  }
};

acceptance::Outcome encoder_probe() {
  const auto t0 = std::chrono::steady_clock::now();
  const Dataset train_onion = stubborn_corpus(Preference::onion, 12, 11);
  const Dataset train_tomato = stubborn_corpus(Preference::tomato, 12, 12);
  const Dataset held_onion = stubborn_corpus(Preference::onion, 6, 13);
  const Dataset held_tomato = stubborn_corpus(Preference::tomato, 6, 14);

  LatentConfig cfg;
  cfg.seed = 2;
  const LatentModel m = train_latent(concat(train_onion, train_tomato), cfg);

  Probe probe;
  probe.fit(points(train_onion, train_tomato, m));
  const double train_acc = probe.accuracy(points(train_onion, train_tomato, m));
  const double held_acc = probe.accuracy(points(held_onion, held_tomato, m));
  Probe per_episode;
  per_episode.fit(episode_points(train_onion, train_tomato, m));
  const double episode_acc = per_episode.accuracy(episode_points(held_onion, held_tomato, m));
  const double secs = acceptance::seconds_since(t0);
  return {held_acc >= 0.95 && secs < 600.0,
          acceptance::cat("per-history held-out accuracy ", held_acc, " (train ", train_acc,
                          "), per-episode held-out accuracy ", episode_acc, ", ", secs, " s")};
}

const acceptance::Register reg("encoder_probe", "fast", encoder_probe);

}  // namespace
