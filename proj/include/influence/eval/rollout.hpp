#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "influence/eval/agents.hpp"

namespace influence {

struct RolloutRecord {
  std::uint64_t seed = 0;
  std::string agent;
  std::string partner_id;
  std::vector<GameState> states;               // H + 1
  std::vector<std::array<Action, 2>> actions;  // H
  std::vector<std::vector<Event>> events;      // H
  std::vector<int> rewards;                    // H
  std::vector<LatentStrategy> partner_latents; // H, empty for non-scripted partners
  int total = 0;
  bool partner_flipped = false;
};

inline constexpr int kDefaultHorizon = 400;
inline constexpr int kImprovementWindow = 100;

// Runs one episode with `ego` in slot 0 and `partner` in slot 1. Both agents
// are reset against the initial state first.
RolloutRecord rollout(Agent& ego, Agent& partner, LayoutPtr layout, const RewardSpec& reward, int horizon,
                      std::uint64_t seed, const EnvConfig& env = {});

// Scripted partner seeded from derive_seed(seed, 1).
RolloutRecord rollout(Agent& ego, const PartnerSpec& partner, LayoutPtr layout, const RewardSpec& reward,
                      int horizon, std::uint64_t seed, const EnvConfig& env = {});

// Reward over the last 100 ticks minus reward over the first 100. Throws
// std::invalid_argument for streams shorter than 100.
double improvement(const std::vector<double>& rewards);
double improvement(const std::vector<int>& rewards);
double improvement(const RolloutRecord& r);

struct SampleStats {
  double mean = 0.0;
  double stdev = 0.0;  // sample standard deviation (n - 1)
  double se = 0.0;
  std::size_t n = 0;
};
SampleStats sample_stats(const std::vector<double>& xs);

nlohmann::json to_json(const RolloutRecord& r);

}  // namespace influence
