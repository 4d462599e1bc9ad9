#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "influence/env/game.hpp"

namespace influence {

enum class Goal : std::uint8_t {
  fetch_onion = 0,
  fetch_tomato,
  fetch_plate,
  fill_pot,
  plate_soup,
  deliver,
  idle,
  place_on_counter,
  block
};

enum class Preference : std::uint8_t { onion = 0, tomato, none };

std::string_view to_string(Goal g);
std::string_view to_string(Preference p);
Preference preference_from_string(std::string_view s);

// Ground-truth latent strategy of a scripted player.
struct LatentStrategy {
  Goal goal = Goal::idle;
  Preference ingredient_preference = Preference::none;
  int commitment = 0;  // ticks left before re-planning

  friend bool operator==(const LatentStrategy&, const LatentStrategy&) = default;
};

enum class PartnerKind : std::uint8_t {
  greedy_next_task = 0,
  preference_stubborn,
  preference_adaptive,
  counter_mover,
  blocker
};

std::string_view to_string(PartnerKind k);
PartnerKind partner_kind_from_string(std::string_view s);

struct PartnerSpec {
  PartnerKind kind = PartnerKind::greedy_next_task;
  int block_switch_threshold = 8;  // k
  int plate_pickup_radius = 2;
  double epsilon = 0.0;
  Preference preference = Preference::none;
  int commitment_ticks = 10;
  // counter_mover: what it ferries to counters, how often, how many times.
  ObjectKind counter_item = ObjectKind::none;  // none = any ingredient
  double counter_task_prob = 0.5;
  int max_counter_moves = -1;  // -1 = unlimited
  // blocker: chance of blocking when the other player is empty-handed, and
  // the uniform range of block durations.
  double block_prob = 0.3;
  int block_min_ticks = 2;
  int block_max_ticks = 16;

  friend bool operator==(const PartnerSpec&, const PartnerSpec&) = default;

  static PartnerSpec greedy(Preference p = Preference::none, double eps = 0.0);
  static PartnerSpec stubborn(Preference p = Preference::onion, double eps = 0.0);
  static PartnerSpec adaptive(Preference p = Preference::onion, double eps = 0.0);
  static PartnerSpec counter_mover(ObjectKind item = ObjectKind::none, double eps = 0.0);
  static PartnerSpec blocker(Preference p = Preference::tomato, double eps = 0.0);

  void validate() const;
};

class PartnerState {
 public:
  PartnerSpec spec;
  int pid = 1;
  LatentStrategy latent;
  int blocked_streak = 0;
  std::mt19937_64 rng;
  Cell last_position;
  Cell counter_target;          // place_on_counter destination
  int counter_moves = 0;        // completed place_on_counter trips
  bool counter_task = false;    // current fetch is for a counter trip
  bool flipped = false;         // adaptive preference switch happened
  std::vector<std::uint8_t> home_pots;  // per layout pot: 1 if this player tends it

  friend bool operator==(const PartnerState& a, const PartnerState& b) {
    return a.spec == b.spec && a.pid == b.pid && a.latent == b.latent &&
           a.blocked_streak == b.blocked_streak && a.rng == b.rng && a.last_position == b.last_position &&
           a.counter_target == b.counter_target && a.counter_moves == b.counter_moves &&
           a.counter_task == b.counter_task && a.flipped == b.flipped && a.home_pots == b.home_pots;
  }
};

// Scripted player for slot `pid`, planned against the initial state.
PartnerState make_partner(const PartnerSpec& spec, int pid, std::uint64_t seed, const GameState& initial);

// Chooses the next action. Pure given the partner state: the returned state
// carries the advanced generator and any on-the-spot re-plan.
std::pair<Action, PartnerState> partner_act(const PartnerState& ps, const GameState& state);

// Updates the latent strategy after a step, given that step's events and
// the resulting state.
PartnerState latent_transition(const PartnerState& ps, const std::vector<Event>& events, const GameState& state);

// The deterministic scripted choice for the current goal, no noise.
Action scripted_action(const PartnerState& ps, const GameState& state);

// A fresh plan for the current situation (also used when commitment lapses).
LatentStrategy plan_goal(PartnerState& ps, const GameState& state);

}  // namespace influence
