#include "influence/eval/rollout.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "influence/data/dataset.hpp"
#include "influence/env/json.hpp"

namespace influence {

RolloutRecord rollout(Agent& ego, Agent& partner, LayoutPtr layout, const RewardSpec& reward, int horizon,
                      std::uint64_t seed, const EnvConfig& env) {
  RolloutRecord rec;
  rec.seed = seed;
  rec.agent = ego.algo();
  rec.partner_id = partner.algo();
  ego.pid = 0;
  partner.pid = 1;

  GameState s = reset(std::move(layout), reward, horizon, seed, env);
  ego.reset(s);
  partner.reset(s);
  auto* scripted = dynamic_cast<ScriptedAgent*>(&partner);
  const Preference start_pref = scripted ? scripted->state().latent.ingredient_preference : Preference::none;

  rec.states.reserve(static_cast<std::size_t>(horizon) + 1);
  rec.states.push_back(s);
  while (!s.finished()) {
    const Action a0 = ego.act(s);
    const Action a1 = partner.act(s);
    if (scripted) rec.partner_latents.push_back(scripted->state().latent);
    StepResult out = step(s, a0, a1);
    ego.observe(out.events, out.state);
    partner.observe(out.events, out.state);
    rec.actions.push_back({a0, a1});
    rec.rewards.push_back(out.reward);
    rec.events.push_back(std::move(out.events));
    s = std::move(out.state);
    rec.states.push_back(s);
  }
  rec.total = std::accumulate(rec.rewards.begin(), rec.rewards.end(), 0);
  if (scripted) {
    const PartnerState& ps = scripted->state();
    rec.partner_flipped = ps.flipped || ps.latent.ingredient_preference != start_pref;
  }
  return rec;
}

RolloutRecord rollout(Agent& ego, const PartnerSpec& partner, LayoutPtr layout, const RewardSpec& reward,
                      int horizon, std::uint64_t seed, const EnvConfig& env) {
  ScriptedAgent p(partner, derive_seed(seed, 1));
  RolloutRecord rec = rollout(ego, p, std::move(layout), reward, horizon, seed, env);
  rec.partner_id = std::string(to_string(partner.kind));
  return rec;
}

double improvement(const std::vector<double>& rewards) {
  if (rewards.size() < static_cast<std::size_t>(kImprovementWindow))
    throw std::invalid_argument("improvement needs at least 100 ticks of rewards");
  const auto w = static_cast<std::ptrdiff_t>(kImprovementWindow);
  const double first = std::accumulate(rewards.begin(), rewards.begin() + w, 0.0);
  const double last = std::accumulate(rewards.end() - w, rewards.end(), 0.0);
  return last - first;
}

double improvement(const std::vector<int>& rewards) {
  return improvement(std::vector<double>(rewards.begin(), rewards.end()));
}

double improvement(const RolloutRecord& r) { return improvement(r.rewards); }

SampleStats sample_stats(const std::vector<double>& xs) {
  SampleStats st;
  st.n = xs.size();
  if (xs.empty()) return st;
  st.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(st.n);
  if (st.n < 2) return st;
  double ss = 0.0;
  for (double x : xs) ss += (x - st.mean) * (x - st.mean);
  st.stdev = std::sqrt(ss / static_cast<double>(st.n - 1));
  st.se = st.stdev / std::sqrt(static_cast<double>(st.n));
  return st;
}

nlohmann::json to_json(const RolloutRecord& r) {
  nlohmann::json j;
  j["seed"] = r.seed;
  j["agent"] = r.agent;
  j["partner_id"] = r.partner_id;
  j["total"] = r.total;
  j["rewards"] = r.rewards;
  j["partner_flipped"] = r.partner_flipped;
  auto& acts = j["actions"] = nlohmann::json::array();
  for (const auto& a : r.actions) acts.push_back({std::string(to_string(a[0])), std::string(to_string(a[1]))});
  auto& lat = j["partner_latents"] = nlohmann::json::array();
  for (const auto& l : r.partner_latents)
    lat.push_back({{"goal", std::string(to_string(l.goal))},
                   {"preference", std::string(to_string(l.ingredient_preference))},
                   {"commitment", l.commitment}});
  auto& ev = j["events"] = nlohmann::json::array();
  for (const auto& tick : r.events) {
    auto arr = nlohmann::json::array();
    for (const auto& e : tick) arr.push_back(to_json(e));
    ev.push_back(std::move(arr));
  }
  return j;
}

}  // namespace influence
