#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "influence/env/features.hpp"
#include "influence/env/game.hpp"
#include "influence/partners/partner.hpp"

namespace influence {

// One entry of a history window. Pad entries (before the episode start) are
// all zero with valid = false.
struct HistoryStep {
  FeatureVector s{};
  Action a = Action::stay;
  bool valid = false;

  friend bool operator==(const HistoryStep&, const HistoryStep&) = default;
};

// The c state-action pairs preceding a transition, oldest first.
using History = std::vector<HistoryStep>;

struct Transition {
  FeatureVector s{};
  Action a = Action::stay;  // the perspective player's action
  double r = 0.0;
  FeatureVector s_next{};
  Action partner_a = Action::stay;
  bool partner_a_recorded = true;
  bool done = false;
  int t = 0;
  History history;  // empty until attach_histories

  friend bool operator==(const Transition&, const Transition&) = default;
};

struct Episode {
  int perspective = 0;  // player whose features and actions fill the transitions
  std::uint64_t seed = 0;
  PartnerSpec ego_spec;
  PartnerSpec partner_spec;
  std::vector<Transition> transitions;
  std::vector<GameState> states;            // transitions.size() + 1 raw states
  std::vector<std::vector<Event>> events;   // per transition
  std::vector<LatentStrategy> partner_latents;  // ground truth before each transition

  double total_reward() const;
  friend bool operator==(const Episode&, const Episode&) = default;
};

struct DatasetMeta {
  std::string layout_name;
  std::string layout_text;
  RewardSpec reward_spec;
  int horizon = 0;
  std::uint64_t seed = 0;
  nlohmann::json notes = nlohmann::json::object();

  friend bool operator==(const DatasetMeta&, const DatasetMeta&) = default;
};

struct Dataset {
  DatasetMeta meta;
  std::vector<Episode> episodes;
  int history_window = 0;  // c of the attached histories, 0 if none

  std::size_t num_transitions() const;
  LayoutPtr layout() const;
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GenerateConfig {
  LayoutPtr layout;
  PartnerSpec ego_spec = PartnerSpec::greedy();
  PartnerSpec partner_spec = PartnerSpec::greedy();
  RewardSpec reward_spec;
  EnvConfig env;
  int episodes = 1;
  int horizon = 1200;
  std::uint64_t seed = 0;
  bool both_perspectives = false;
};

// Episode i uses seed + i; the two scripted players draw from generators
// derived from it.
Dataset generate(const GenerateConfig& cfg);

// Records one scripted-vs-scripted episode.
Episode record_episode(const GenerateConfig& cfg, std::uint64_t episode_seed);

// Builds the transition list of an episode from its raw state stream, both
// players' actions and the per-tick events.
Episode episode_from_stream(std::vector<GameState> states, const std::vector<Action>& ego_actions,
                            const std::vector<Action>& partner_actions, std::vector<std::vector<Event>> events,
                            int perspective = 0);

// Same episode seen from the other player.
Episode swap_perspective(const Episode& ep);

Dataset relabel(const Dataset& d, const RewardSpec& spec);
Dataset attach_histories(const Dataset& d, int c);
History history_at(const Episode& ep, int index, int c);
Dataset filter_top_k(const Dataset& d, int k);

// Transitions [begin, end) of an episode as a stand-alone fragment.
Episode slice_episode(const Episode& ep, int begin, int end);

// Partner action of a transition: the recorded one, else reconstructed
// from the raw states.
Action partner_action(const Episode& ep, int index);

// Appends the episodes of `b` to `a`; both must share a layout.
Dataset concat(const Dataset& a, const Dataset& b);

// Binary file, little-endian:
//   "INFLDSET" | u32 version | u64 header length | header JSON
//   | u64 episode count | per episode: u64 record length, record bytes
//   | u32 crc32 over everything before it
inline constexpr std::uint32_t kDatasetVersion = 1;
void save(const Dataset& d, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);
std::string serialize_dataset(const Dataset& d);
Dataset deserialize_dataset(const std::string& bytes);

nlohmann::json to_json(const Dataset& d);
nlohmann::json to_json(const PartnerSpec& spec);
PartnerSpec partner_spec_from_json(const nlohmann::json& j);

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt);

}  // namespace influence
