#include <chrono>
#include <map>
#include <memory>

#include "common.hpp"
#include "influence/eval/agents.hpp"
#include "influence/eval/experiment.hpp"

using namespace influence;

namespace {

constexpr const char* kLayout = "open_asymmetric_advantages";
const std::vector<std::string> kLearners{"latent-cql", "memory-cql", "offline-lili", "bc"};

// Scripted blocker ego that sometimes holds the onion corridor for 10 to 20
// ticks, paired with both onion-preferring partners.
Dataset influence_corpus() {
  GenerateConfig g;
  g.layout = builtin_layout(kLayout);
  g.reward_spec = RewardSpec::of(RewardVariant::tomato_bonus);
  g.horizon = kDefaultHorizon;
  g.episodes = 60;
  g.ego_spec = PartnerSpec::blocker(Preference::tomato, 0.1);
  g.ego_spec.block_prob = 0.3;
  g.ego_spec.block_min_ticks = 10;
  g.ego_spec.block_max_ticks = 20;
  g.partner_spec = PartnerSpec::adaptive(Preference::onion, 0.1);
  g.seed = 100;
  Dataset d = generate(g);
  g.partner_spec = PartnerSpec::stubborn(Preference::onion, 0.1);
  g.seed = 5000;
  return attach_histories(concat(d, generate(g)), kHistoryWindow);
}

struct InfluenceRun {
  SuiteReport report;
  double train_seconds = 0.0;
  double total_seconds = 0.0;
  std::map<std::string, std::string> training_notes;
};

const InfluenceRun& influence_run() {
  static const InfluenceRun run = [] {
    const auto t0 = std::chrono::steady_clock::now();
    InfluenceRun r;
    const Dataset data = influence_corpus();

    AlgoConfig cfg;
    cfg.train.gamma = 0.99;
    cfg.train.reward_scale = 0.05;
    cfg.train.iterations = 80;
    cfg.train.target_update_period = 200;
    cfg.train.seed = 3;
    cfg.latent.seed = 3;

    std::map<std::string, std::shared_ptr<const PolicyBundle>> policies;
    for (const auto& name : kLearners) {
      TrainLogs logs;
      policies[name] = std::make_shared<const PolicyBundle>(train_policy(algo_from_string(name), data, cfg, &logs));
      if (!logs.q_curve.iterations.empty())
        r.training_notes[name] = acceptance::cat("final loss ", logs.q_curve.iterations.back().loss);
    }
    r.train_seconds = acceptance::seconds_since(t0);

    SuiteConfig suite;
    suite.name = "influence";
    suite.layout = kLayout;
    suite.reward = RewardSpec::of(RewardVariant::tomato_bonus);
    suite.master_seed = 777;
    for (const auto& name : kLearners) {
      AgentRef a;
      a.algo = name;
      suite.agents.push_back(a);
    }
    suite.partners = {PartnerRef{"adaptive", PartnerSpec::adaptive(Preference::onion, 0.1)},
                      PartnerRef{"stubborn", PartnerSpec::stubborn(Preference::onion, 0.1)}};
    suite.checks = {
        {SuiteCheck::Kind::ordering, "adaptive", {"latent-cql", "memory-cql", "offline-lili", "bc"}, "", 0.15},
        {SuiteCheck::Kind::parity, "stubborn", kLearners, "", 0.15},
        {SuiteCheck::Kind::positive_improvement, "adaptive", {"latent-cql"}, "", 0.15}};
    r.report = run_suite(suite, [&](const AgentRef& a) { return make_agent(policies.at(a.algo)); });
    r.total_seconds = acceptance::seconds_since(t0);
    return r;
  }();
  return run;
}

std::string means(const SuiteReport& rep, const std::string& partner) {
  std::string out;
  for (const auto& name : kLearners) {
    const auto& c = rep.cell(name, partner);
    int flips = 0;
    for (const auto& row : c.rows) flips += row.partner_flipped;
    out += acceptance::cat(name, " ", c.reward.mean, "+-", c.reward.se, " (flips ", flips, "/", c.rows.size(), "); ");
  }
  return out;
}

acceptance::Outcome influence_ordering() {
  const auto& run = influence_run();
  const CheckResult& c = run.report.checks.at(0);
  return {c.passed && run.total_seconds < 3600.0,
          means(run.report, "adaptive") + c.detail + acceptance::cat("; train ", run.train_seconds, " s, total ",
                                                                     run.total_seconds, " s")};
}

acceptance::Outcome uninfluenceable_parity() {
  const auto& run = influence_run();
  const CheckResult& c = run.report.checks.at(1);
  return {c.passed, means(run.report, "stubborn") + c.detail};
}

// The stay control sits in forced_coordination, where the partner cannot
// finish a soup without the ego, so the team earns nothing at all.
acceptance::Outcome improvement_metric() {
  const auto& run = influence_run();
  const CheckResult& c = run.report.checks.at(2);
  const auto& lat = run.report.cell("latent-cql", "adaptive");

  ExperimentConfig stay;
  stay.layout = "forced_coordination";
  stay.agent.algo = "stay";
  stay.partner = PartnerRef{"adaptive", PartnerSpec::adaptive(Preference::onion, 0.1)};
  stay.seed = 777;
  const ExperimentReport s = run_experiment(stay);
  bool stay_zero = true;
  for (const auto& row : s.rows) stay_zero = stay_zero && row.improvement == 0.0;

  return {c.passed && stay_zero,
          acceptance::cat("latent-cql improvement ", lat.improvement.mean, "+-", lat.improvement.se,
                          "; stay improvement ", s.improvement.mean, " over ", s.rows.size(), " rollouts, all zero: ",
                          stay_zero ? "yes" : "no")};
}

const acceptance::Register reg1("influence_ordering", "influence", influence_ordering);
const acceptance::Register reg2("uninfluenceable_parity", "influence", uninfluenceable_parity);
const acceptance::Register reg3("improvement_metric", "influence", improvement_metric);

}  // namespace
