#include "common.hpp"
#include "influence/rl/cql.hpp"

using namespace influence;

namespace {

// Probe pairs: states from episodes the learner never saw, each with every
// action other than the one the scripted ego took there.
struct Probes {
  Mat s;
  std::vector<int> a;
};

Probes ood_probes(const Dataset& held_out) {
  std::vector<FeatureVector> states;
  std::vector<int> actions;
  for (const auto& ep : held_out.episodes)
    for (const auto& tr : ep.transitions)
      for (int a = 0; a < kNumActions; ++a)
        if (a != index_of(tr.a)) {
          states.push_back(tr.s);
          actions.push_back(a);
        }
  Probes p;
  p.s = Mat(static_cast<Eigen::Index>(states.size()), kFeatureDim);
  for (std::size_t i = 0; i < states.size(); ++i) p.s.row(static_cast<Eigen::Index>(i)) = net_input(states[i]);
  p.a = std::move(actions);
  return p;
}

double mean_probe_q(const QFunction& q, const Probes& p) {
  const Mat v = q.values(p.s);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.a.size(); ++i) sum += v(static_cast<Eigen::Index>(i), p.a[i]);
  return sum / static_cast<double>(p.a.size());
}

acceptance::Outcome conservatism() {
  GenerateConfig g;
  g.layout = builtin_layout("asymmetric_advantages");
  g.ego_spec = PartnerSpec::greedy();
  g.partner_spec = PartnerSpec::greedy(Preference::none, 0.1);
  g.horizon = 400;
  g.episodes = 20;
  g.seed = 1000;
  const Dataset train = generate(g);
  g.episodes = 3;
  g.seed = 9000;
  const Probes probes = ood_probes(generate(g));

  TrainConfig cfg;
  cfg.iterations = 15;
  cfg.updates_per_iteration = 200;
  cfg.seed = 21;
  cfg.alpha = 0.0;
  const double q0 = mean_probe_q(train_cql(train, cfg), probes);
  cfg.alpha = 5.0;
  const double q5 = mean_probe_q(train_cql(train, cfg), probes);
  return {q5 < q0, acceptance::cat("mean OOD probe Q: alpha=5 ", q5, " vs alpha=0 ", q0, " over ", probes.a.size(),
                                   " probes")};
}

const acceptance::Register reg("conservatism", "fast", conservatism);

}  // namespace
