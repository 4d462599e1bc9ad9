#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "influence/env/layout.hpp"
#include "influence/env/types.hpp"

namespace influence {

inline constexpr int kPotCapacity = 3;

struct PlayerState {
  Cell position;
  Direction orientation = Direction::up;
  Object held;

  friend bool operator==(const PlayerState&, const PlayerState&) = default;
};

struct PotState {
  std::uint8_t onions = 0;
  std::uint8_t tomatoes = 0;
  int cook_timer = 0;  // ticks remaining; 0 when idle or done
  bool done = false;

  friend bool operator==(const PotState&, const PotState&) = default;

  int size() const { return onions + tomatoes; }
  bool cooking() const { return cook_timer > 0; }
  bool accepts_ingredient() const { return !done && !cooking() && size() < kPotCapacity; }
};

enum class RewardVariant : std::uint8_t { standard = 0, human_deliver, tomato_bonus, counter_instruction };

std::string_view to_string(RewardVariant v);
RewardVariant reward_variant_from_string(std::string_view s);

struct RewardSpec {
  RewardVariant variant = RewardVariant::standard;
  int base_soup_reward = 20;
  int multiplier = 2;
  int counter_drop_reward = 1;

  friend bool operator==(const RewardSpec&, const RewardSpec&) = default;

  static RewardSpec of(RewardVariant v) {
    RewardSpec s;
    s.variant = v;
    return s;
  }
};

struct EnvConfig {
  int cook_time = 20;
  friend bool operator==(const EnvConfig&, const EnvConfig&) = default;
};

enum class EventKind : std::uint8_t {
  pickup = 0,
  drop_on_counter,
  pot_fill,
  cook_start,
  cook_done,
  plate_soup,
  deliver,
  blocked_move,
  noop
};

std::string_view to_string(EventKind k);
EventKind event_kind_from_string(std::string_view s);

// actor is -1 for events not caused by a player (cook_done).
struct Event {
  EventKind kind = EventKind::noop;
  int actor = -1;
  Cell cell;
  Object object;

  friend bool operator==(const Event&, const Event&) = default;
};

// Full world state at one tick. Player 0 is the ego agent, player 1 its
// partner. Counter contents are indexed by layout cell index; only counter
// tiles ever hold an object.
struct GameState {
  LayoutPtr layout;
  std::array<PlayerState, 2> players;
  std::vector<PotState> pots;  // parallel to layout->pots()
  std::vector<Object> counters;
  int timestep = 0;
  int horizon = 0;
  RewardSpec reward_spec;
  EnvConfig config;
  int score = 0;
  std::uint64_t seed = 0;

  bool finished() const { return timestep >= horizon; }
  const Object& counter_at(Cell c) const { return counters[static_cast<std::size_t>(layout->index(c))]; }
  Object& counter_at(Cell c) { return counters[static_cast<std::size_t>(layout->index(c))]; }

  // Structural equality: same layout geometry (by name), same dynamic state.
  friend bool operator==(const GameState& a, const GameState& b);
};

class EpisodeFinished : public std::logic_error {
 public:
  EpisodeFinished() : std::logic_error("step called on a finished episode (timestep == horizon)") {}
};

GameState reset(LayoutPtr layout, const RewardSpec& spec, int horizon, std::uint64_t seed,
                const EnvConfig& config = {});

struct StepResult {
  GameState state;
  int reward = 0;
  std::vector<Event> events;
};

// Advances one tick. Pure: the input state is not modified.
StepResult step(const GameState& state, Action ego, Action partner);

// Reward of one tick's events under a reward specification.
int compute_reward(const RewardSpec& spec, const std::vector<Event>& events);

}  // namespace influence
