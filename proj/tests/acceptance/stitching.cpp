#include <omp.h>

#include "common.hpp"
#include "influence/eval/rollout.hpp"

using namespace influence;

namespace {

// The left player reaches only the plate dispenser and the counters; the
// right player reaches the pot, the onions and the delivery window. The
// three counters in column 2 are the only hand-over spots.
constexpr std::string_view kCorridor =
    "XXXPXX\n"
    "D1X2 S\n"
    "X X  X\n"
    "X X OX\n"
    "XXXXXX";

constexpr int kHorizon = 100;
constexpr int kCut = 50;
constexpr int kEvalSeeds = 50;

struct Corpus {
  Dataset data;
  int prefixes = 0;
  int suffixes = 0;
  int dropped_mixed = 0;
};

bool has_event(const Episode& ep, int begin, int end, EventKind kind, int actor) {
  for (int t = begin; t < end; ++t)
    for (const Event& e : ep.events[static_cast<std::size_t>(t)])
      if (e.kind == kind && (actor < 0 || e.actor == actor)) return true;
  return false;
}

// Even episodes contribute their first half, odd episodes their second
// half. A prefix never reaches a delivery and a suffix never contains the
// left player's hand-over, so no fragment shows both halves of the story.
Corpus build_corpus(std::uint64_t seed) {
  const LayoutPtr layout = parse_layout(kCorridor, "corridor");
  GenerateConfig g;
  g.layout = layout;
  g.partner_spec = PartnerSpec::adaptive(Preference::onion, 0.1);
  g.env.cook_time = 40;
  g.horizon = kHorizon;

  GenerateConfig movers = g;
  movers.ego_spec = PartnerSpec::counter_mover(ObjectKind::plate, 0.1);
  movers.ego_spec.counter_task_prob = 1.0;
  movers.ego_spec.max_counter_moves = 1;
  movers.episodes = 60;
  movers.seed = seed;

  GenerateConfig idlers = g;
  idlers.ego_spec = PartnerSpec::counter_mover(ObjectKind::plate, 0.3);
  idlers.ego_spec.max_counter_moves = 0;
  idlers.episodes = 180;
  idlers.seed = seed + 100000;

  const Dataset raw = concat(generate(movers), generate(idlers));
  Corpus c;
  c.data.meta = raw.meta;
  c.data.meta.notes = {{"corpus", "stitching fragments"}};
  for (std::size_t i = 0; i < raw.episodes.size(); ++i) {
    const Episode& ep = raw.episodes[i];
    if (i % 2 == 0) {
      if (has_event(ep, 0, kCut, EventKind::deliver, -1)) {
        ++c.dropped_mixed;
        continue;
      }
      c.data.episodes.push_back(slice_episode(ep, 0, kCut));
      ++c.prefixes;
    } else {
      if (has_event(ep, kCut, kHorizon, EventKind::drop_on_counter, 0)) {
        ++c.dropped_mixed;
        continue;
      }
      c.data.episodes.push_back(slice_episode(ep, kCut, kHorizon));
      ++c.suffixes;
    }
  }
  return c;
}

double success_rate(const PolicyBundle& policy, const LayoutPtr& layout, const EnvConfig& env) {
  const auto shared = std::make_shared<const PolicyBundle>(policy);
  std::vector<int> ok(kEvalSeeds, 0);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < kEvalSeeds; ++i) {
    PolicyAgent agent(shared);
    const RolloutRecord r = rollout(agent, PartnerSpec::adaptive(Preference::onion, 0.1), layout, RewardSpec{},
                                    kHorizon, derive_seed(777, static_cast<std::uint64_t>(i)), env);
    ok[static_cast<std::size_t>(i)] = r.total > 0 ? 1 : 0;
  }
  int n = 0;
  for (int v : ok) n += v;
  return static_cast<double>(n) / kEvalSeeds;
}

acceptance::Outcome stitching() {
  const Corpus corpus = build_corpus(4242);
  const LayoutPtr layout = corpus.data.layout();
  EnvConfig env;
  env.cook_time = 40;

  int full_stories = 0;
  for (const auto& ep : corpus.data.episodes)
    if (has_event(ep, 0, static_cast<int>(ep.transitions.size()), EventKind::drop_on_counter, 0) &&
        has_event(ep, 0, static_cast<int>(ep.transitions.size()), EventKind::deliver, -1))
      ++full_stories;

  AlgoConfig cfg;
  cfg.train.iterations = 40;
  cfg.train.updates_per_iteration = 200;
  cfg.train.alpha = 1.0;
  cfg.train.target_update_period = 100;
  cfg.train.seed = 5;
  const PolicyBundle cql = train_policy(Algo::cql, corpus.data, cfg);
  AlgoConfig bc_cfg = cfg;
  bc_cfg.train.iterations = 20;
  const PolicyBundle bc = train_policy(Algo::bc, corpus.data, bc_cfg);

  const double cql_rate = success_rate(cql, layout, env);
  const double bc_rate = success_rate(bc, layout, env);
  const bool pass = full_stories == 0 && cql_rate >= 0.8 && bc_rate <= 0.2;
  return {pass, acceptance::cat("cql delivery rate ", cql_rate, " (>= 0.8), bc ", bc_rate, " (<= 0.2); ",
                                corpus.prefixes, " prefixes + ", corpus.suffixes, " suffixes, ", full_stories,
                                " fragments with hand-over and delivery")};
}

const acceptance::Register reg("stitching", "stitching", stitching);

}  // namespace
