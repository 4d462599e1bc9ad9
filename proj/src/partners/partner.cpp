#include "influence/partners/partner.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <stdexcept>

#include "influence/partners/pathing.hpp"

namespace influence {

namespace {

constexpr std::array<std::string_view, 9> kGoalNames{
    "fetch_onion", "fetch_tomato", "fetch_plate", "fill_pot", "plate_soup",
    "deliver",     "idle",         "place_on_counter", "block"};
constexpr std::array<std::string_view, 3> kPreferenceNames{"onion", "tomato", "none"};
constexpr std::array<std::string_view, 5> kKindNames{
    "greedy_next_task", "preference_stubborn", "preference_adaptive", "counter_mover", "blocker"};

using pathing::DistanceField;

const PlayerState& self_of(const PartnerState& ps, const GameState& s) {
  return s.players[static_cast<std::size_t>(ps.pid)];
}
const PlayerState& other_of(const PartnerState& ps, const GameState& s) {
  return s.players[static_cast<std::size_t>(1 - ps.pid)];
}

std::vector<Cell> counters_holding(const GameState& s, ObjectKind kind) {
  std::vector<Cell> out;
  for (Cell c : s.layout->cells_of(TileKind::counter))
    if (s.counter_at(c).kind == kind) out.push_back(c);
  return out;
}

std::vector<Cell> empty_counters(const GameState& s) {
  std::vector<Cell> out;
  for (Cell c : s.layout->cells_of(TileKind::counter))
    if (s.counter_at(c).empty()) out.push_back(c);
  return out;
}

// Counters next to a floor cell the player can reach.
bool touches(const Layout& layout, Cell counter, const DistanceField& field) {
  for (Cell a : pathing::approach_cells(layout, counter))
    if (field.reachable(a)) return true;
  return false;
}

std::vector<Cell> reachable_subset(const GameState& s, const DistanceField& mine, const std::vector<Cell>& cells) {
  std::vector<Cell> out;
  for (Cell c : cells)
    if (touches(*s.layout, c, mine)) out.push_back(c);
  return out;
}

ObjectKind ingredient_of(Preference p) { return p == Preference::tomato ? ObjectKind::tomato : ObjectKind::onion; }
Goal fetch_goal_of(ObjectKind k) {
  switch (k) {
    case ObjectKind::onion: return Goal::fetch_onion;
    case ObjectKind::tomato: return Goal::fetch_tomato;
    default: return Goal::fetch_plate;
  }
}

TileKind source_of(ObjectKind k) {
  switch (k) {
    case ObjectKind::onion: return TileKind::onion_source;
    case ObjectKind::tomato: return TileKind::tomato_source;
    default: return TileKind::plate_dispenser;
  }
}

// Sources plus counters currently holding the object, restricted to those the
// player can reach.
std::vector<Cell> fetch_targets(const GameState& s, const DistanceField& mine, ObjectKind k) {
  std::vector<Cell> t = s.layout->cells_of(source_of(k));
  const auto on_counters = counters_holding(s, k);
  t.insert(t.end(), on_counters.begin(), on_counters.end());
  return reachable_subset(s, mine, t);
}

std::vector<Cell> pots_where(const GameState& s, const PartnerState& ps, bool home_only,
                             bool (*pred)(const PotState&)) {
  std::vector<Cell> out;
  const auto& cells = s.layout->pots();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (home_only && !ps.home_pots[i]) continue;
    if (pred(s.pots[i])) out.push_back(cells[i]);
  }
  return out;
}

bool pot_accepts(const PotState& p) { return p.accepts_ingredient(); }
bool pot_done(const PotState& p) { return p.done; }
bool pot_busy(const PotState& p) { return p.done || p.cooking(); }
bool pot_any(const PotState&) { return true; }

// Empty counters the player can reach that also border the region from which
// `use_targets` can be reached: the hand-over spots for a split kitchen.
std::vector<Cell> bridge_counters(const GameState& s, const DistanceField& mine, const std::vector<Cell>& use_targets) {
  std::vector<Cell> approaches;
  for (Cell t : use_targets)
    for (Cell a : pathing::approach_cells(*s.layout, t)) approaches.push_back(a);
  const DistanceField theirs(*s.layout, approaches);
  std::vector<Cell> out;
  for (Cell c : empty_counters(s))
    if (touches(*s.layout, c, mine) && touches(*s.layout, c, theirs)) out.push_back(c);
  return out;
}

int count_kind_near(const GameState& s, const DistanceField& mine, ObjectKind k) {
  return static_cast<int>(reachable_subset(s, mine, counters_holding(s, k)).size());
}

// A player who cannot reach its pots only supplies them through counters, so
// items already waiting there count as delivered.
bool reaches_home_pot(const PartnerState& ps, const GameState& s, const DistanceField& mine) {
  const auto& cells = s.layout->pots();
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (ps.home_pots[i] && touches(*s.layout, cells[i], mine)) return true;
  return false;
}

int ingredients_needed(const PartnerState& ps, const GameState& s, const DistanceField& mine) {
  int need = 0;
  const auto& cells = s.layout->pots();
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (ps.home_pots[i] && s.pots[i].accepts_ingredient()) need += kPotCapacity - s.pots[i].size();
  if (!reaches_home_pot(ps, s, mine))
    need -= count_kind_near(s, mine, ObjectKind::onion) + count_kind_near(s, mine, ObjectKind::tomato);
  if (other_of(ps, s).held.is_ingredient()) need -= 1;
  return need;
}

int plates_needed(const PartnerState& ps, const GameState& s, const DistanceField& mine) {
  int need = 0;
  for (std::size_t i = 0; i < s.pots.size(); ++i)
    if (ps.home_pots[i] && (s.pots[i].done || s.pots[i].cooking())) ++need;
  if (!reaches_home_pot(ps, s, mine)) need -= count_kind_near(s, mine, ObjectKind::plate);
  const Object& oh = other_of(ps, s).held;
  if (oh.kind == ObjectKind::plate) need -= 1;
  return need;
}

bool goal_valid(Goal g, const Object& held, const PartnerState& ps) {
  switch (g) {
    case Goal::deliver: return held.kind == ObjectKind::soup;
    case Goal::plate_soup: return held.kind != ObjectKind::soup;
    case Goal::fill_pot: return held.is_ingredient() && !ps.counter_task;
    case Goal::fetch_onion:
    case Goal::fetch_tomato:
    case Goal::fetch_plate: return held.empty();
    case Goal::place_on_counter: return !held.empty();
    case Goal::idle:
    case Goal::block: return true;
  }
  return true;
}

// Cell whose occupation cuts `other` off from every approach of the targets,
// nearest to `me` (ties in row-major order).
std::optional<Cell> choke_point(const GameState& s, Cell me, Cell other, const std::vector<Cell>& targets) {
  const Layout& layout = *s.layout;
  if (!pathing::can_reach_any(layout, other, targets)) return std::nullopt;
  const DistanceField from_me(layout, {me});
  std::optional<Cell> best;
  int best_d = 0;
  for (int i = 0; i < layout.width() * layout.height(); ++i) {
    const Cell c = layout.cell_at(i);
    if (!layout.walkable(c) || c == other || !from_me.reachable(c)) continue;
    if (pathing::can_reach_any(layout, other, targets, c)) continue;
    const int d = from_me.at(c);
    if (!best || d < best_d) {
      best = c;
      best_d = d;
    }
  }
  return best;
}

std::optional<Action> step_or_bridge(const GameState& s, const PartnerState& ps, const DistanceField& mine,
                                     const std::vector<Cell>& direct_targets, const std::vector<Cell>& all_targets,
                                     bool interact_on_arrival = true) {
  if (auto a = pathing::step_toward(s, ps.pid, direct_targets, interact_on_arrival)) return a;
  if (all_targets.empty()) return std::nullopt;
  return pathing::step_toward(s, ps.pid, bridge_counters(s, mine, all_targets));
}

std::optional<Action> scripted_choice(const PartnerState& ps, const GameState& s) {
  const Layout& layout = *s.layout;
  const PlayerState& me = self_of(ps, s);
  const DistanceField mine(layout, {me.position});

  switch (ps.latent.goal) {
    case Goal::idle:
      return Action::stay;
    case Goal::fetch_onion:
      return pathing::step_toward(s, ps.pid, fetch_targets(s, mine, ObjectKind::onion));
    case Goal::fetch_tomato:
      return pathing::step_toward(s, ps.pid, fetch_targets(s, mine, ObjectKind::tomato));
    case Goal::fetch_plate:
      return pathing::step_toward(s, ps.pid, fetch_targets(s, mine, ObjectKind::plate));
    case Goal::fill_pot: {
      auto home = reachable_subset(s, mine, pots_where(s, ps, true, pot_accepts));
      if (home.empty()) home = reachable_subset(s, mine, pots_where(s, ps, false, pot_accepts));
      const auto all = pots_where(s, ps, true, pot_accepts);
      if (home.empty() && all.empty()) return Action::stay;
      return step_or_bridge(s, ps, mine, home, all);
    }
    case Goal::plate_soup: {
      if (me.held.is_ingredient())
        return pathing::step_toward(s, ps.pid, reachable_subset(s, mine, empty_counters(s)));
      if (me.held.empty()) return pathing::step_toward(s, ps.pid, fetch_targets(s, mine, ObjectKind::plate));
      auto done = reachable_subset(s, mine, pots_where(s, ps, true, pot_done));
      if (done.empty()) done = reachable_subset(s, mine, pots_where(s, ps, false, pot_done));
      if (!done.empty()) return pathing::step_toward(s, ps.pid, done);
      const auto waiting = reachable_subset(s, mine, pots_where(s, ps, true, pot_busy));
      if (!waiting.empty()) return pathing::step_toward(s, ps.pid, waiting, false);
      const auto far = pots_where(s, ps, false, pot_busy);
      if (!far.empty()) {
        const auto bridge = bridge_counters(s, mine, far);
        if (!bridge.empty()) return pathing::step_toward(s, ps.pid, bridge);
      }
      const auto home = reachable_subset(s, mine, pots_where(s, ps, true, pot_any));
      if (!home.empty()) return pathing::step_toward(s, ps.pid, home, false);
      return Action::stay;
    }
    case Goal::deliver: {
      const auto& all = layout.cells_of(TileKind::delivery);
      return step_or_bridge(s, ps, mine, reachable_subset(s, mine, all), all);
    }
    case Goal::place_on_counter: {
      if (s.counter_at(ps.counter_target).empty() && touches(layout, ps.counter_target, mine))
        return pathing::step_toward(s, ps.pid, {ps.counter_target});
      return pathing::step_toward(s, ps.pid, reachable_subset(s, mine, empty_counters(s)));
    }
    case Goal::block: {
      const Preference mine_pref = ps.latent.ingredient_preference;
      const TileKind denied = mine_pref == Preference::onion ? TileKind::tomato_source : TileKind::onion_source;
      const auto spot = choke_point(s, me.position, other_of(ps, s).position, layout.cells_of(denied));
      if (!spot) return Action::stay;
      return pathing::step_onto(s, ps.pid, *spot);
    }
  }
  return std::nullopt;
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}
double uniform01(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace

std::string_view to_string(Goal g) { return kGoalNames[static_cast<std::size_t>(g)]; }
std::string_view to_string(Preference p) { return kPreferenceNames[static_cast<std::size_t>(p)]; }
std::string_view to_string(PartnerKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

Preference preference_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kPreferenceNames.size(); ++i)
    if (kPreferenceNames[i] == s) return static_cast<Preference>(i);
  throw std::invalid_argument("unknown preference '" + std::string(s) + "'");
}

PartnerKind partner_kind_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == s) return static_cast<PartnerKind>(i);
  throw std::invalid_argument("unknown partner kind '" + std::string(s) + "'");
}

PartnerSpec PartnerSpec::greedy(Preference p, double eps) {
  PartnerSpec s;
  s.kind = PartnerKind::greedy_next_task;
  s.preference = p;
  s.epsilon = eps;
  return s;
}
PartnerSpec PartnerSpec::stubborn(Preference p, double eps) {
  PartnerSpec s = greedy(p, eps);
  s.kind = PartnerKind::preference_stubborn;
  return s;
}
PartnerSpec PartnerSpec::adaptive(Preference p, double eps) {
  PartnerSpec s = greedy(p, eps);
  s.kind = PartnerKind::preference_adaptive;
  return s;
}
PartnerSpec PartnerSpec::counter_mover(ObjectKind item, double eps) {
  PartnerSpec s = greedy(Preference::none, eps);
  s.kind = PartnerKind::counter_mover;
  s.counter_item = item;
  return s;
}
PartnerSpec PartnerSpec::blocker(Preference p, double eps) {
  PartnerSpec s = greedy(p, eps);
  s.kind = PartnerKind::blocker;
  return s;
}

void PartnerSpec::validate() const {
  if (block_switch_threshold < 1) throw std::invalid_argument("block_switch_threshold must be >= 1");
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1)");
  if (plate_pickup_radius < 0) throw std::invalid_argument("plate_pickup_radius must be >= 0");
  if (commitment_ticks < 1) throw std::invalid_argument("commitment_ticks must be >= 1");
  if (block_min_ticks < 1 || block_max_ticks < block_min_ticks)
    throw std::invalid_argument("block tick range is empty");
  if (!(counter_task_prob >= 0.0 && counter_task_prob <= 1.0) || !(block_prob >= 0.0 && block_prob <= 1.0))
    throw std::invalid_argument("probabilities must lie in [0, 1]");
  if (counter_item == ObjectKind::soup) throw std::invalid_argument("counter_item cannot be soup");
}

LatentStrategy plan_goal(PartnerState& ps, const GameState& s) {
  LatentStrategy next;
  next.ingredient_preference = ps.latent.ingredient_preference;
  next.commitment = ps.spec.commitment_ticks;
  const PlayerState& me = self_of(ps, s);
  const DistanceField mine(*s.layout, {me.position});

  switch (me.held.kind) {
    case ObjectKind::soup:
      next.goal = Goal::deliver;
      return next;
    case ObjectKind::plate:
      next.goal = ps.counter_task ? Goal::place_on_counter : Goal::plate_soup;
      break;
    case ObjectKind::onion:
    case ObjectKind::tomato:
      next.goal = ps.counter_task ? Goal::place_on_counter : Goal::fill_pot;
      break;
    case ObjectKind::none: {
      ps.counter_task = false;
      const PartnerSpec& spec = ps.spec;
      if (spec.kind == PartnerKind::blocker && other_of(ps, s).held.empty() && uniform01(ps.rng) < spec.block_prob) {
        next.goal = Goal::block;
        next.commitment = uniform_int(ps.rng, spec.block_min_ticks, spec.block_max_ticks);
        return next;
      }
      if (spec.kind == PartnerKind::counter_mover) {
        const bool exhausted = spec.max_counter_moves >= 0 && ps.counter_moves >= spec.max_counter_moves;
        if (exhausted) {
          next.goal = Goal::idle;
          next.commitment = 1;
          return next;
        }
        if (uniform01(ps.rng) < spec.counter_task_prob) {
          ObjectKind item = spec.counter_item;
          if (item == ObjectKind::none) {
            const int d_onion = pathing::distance_to_any(*s.layout, me.position, s.layout->cells_of(TileKind::onion_source));
            const int d_tomato = pathing::distance_to_any(*s.layout, me.position, s.layout->cells_of(TileKind::tomato_source));
            item = (d_tomato != pathing::kUnreachable && (d_onion == pathing::kUnreachable || d_tomato < d_onion))
                       ? ObjectKind::tomato
                       : ObjectKind::onion;
          }
          if (!fetch_targets(s, mine, item).empty()) {
            ps.counter_task = true;
            next.goal = fetch_goal_of(item);
            return next;
          }
        }
      }
      if (plates_needed(ps, s, mine) > 0 && !fetch_targets(s, mine, ObjectKind::plate).empty()) {
        next.goal = Goal::fetch_plate;
        return next;
      }
      if (ingredients_needed(ps, s, mine) > 0) {
        Preference p = next.ingredient_preference;
        if (p == Preference::none) {
          const int d_onion = pathing::distance_to_any(*s.layout, me.position, fetch_targets(s, mine, ObjectKind::onion));
          const int d_tomato = pathing::distance_to_any(*s.layout, me.position, fetch_targets(s, mine, ObjectKind::tomato));
          if (d_onion == pathing::kUnreachable && d_tomato == pathing::kUnreachable) {
            next.goal = Goal::idle;
            next.commitment = 1;
            return next;
          }
          p = (d_tomato != pathing::kUnreachable && (d_onion == pathing::kUnreachable || d_tomato < d_onion))
                  ? Preference::tomato
                  : Preference::onion;
        }
        next.goal = fetch_goal_of(ingredient_of(p));
        return next;
      }
      next.goal = Goal::idle;
      next.commitment = 1;
      return next;
    }
  }

  if (next.goal == Goal::place_on_counter) {
    const auto spots = reachable_subset(s, mine, empty_counters(s));
    if (spots.empty()) {
      ps.counter_task = false;
      next.goal = me.held.kind == ObjectKind::plate ? Goal::plate_soup : Goal::fill_pot;
    } else {
      ps.counter_target = spots[static_cast<std::size_t>(uniform_int(ps.rng, 0, static_cast<int>(spots.size()) - 1))];
    }
  }
  return next;
}

PartnerState make_partner(const PartnerSpec& spec, int pid, std::uint64_t seed, const GameState& initial) {
  spec.validate();
  if (pid != 0 && pid != 1) throw std::invalid_argument("partner pid must be 0 or 1");
  PartnerState ps;
  ps.spec = spec;
  ps.pid = pid;
  ps.rng.seed(seed);
  ps.latent.ingredient_preference = spec.preference;
  ps.last_position = initial.players[static_cast<std::size_t>(pid)].position;
  ps.counter_target = ps.last_position;

  const Layout& layout = *initial.layout;
  const Cell my_spawn = initial.players[static_cast<std::size_t>(pid)].position;
  const Cell their_spawn = initial.players[static_cast<std::size_t>(1 - pid)].position;
  const auto& pots = layout.pots();
  ps.home_pots.assign(pots.size(), 0);
  bool any = false;
  for (std::size_t i = 0; i < pots.size(); ++i) {
    const int mine = pathing::distance_to_any(layout, my_spawn, {pots[i]});
    const int theirs = pathing::distance_to_any(layout, their_spawn, {pots[i]});
    if (mine != pathing::kUnreachable && (theirs == pathing::kUnreachable || mine <= theirs)) {
      ps.home_pots[i] = 1;
      any = true;
    }
  }
  if (!any) {
    for (std::size_t i = 0; i < pots.size(); ++i)
      if (pathing::distance_to_any(layout, my_spawn, {pots[i]}) != pathing::kUnreachable) {
        ps.home_pots[i] = 1;
        any = true;
      }
  }
  if (!any) std::fill(ps.home_pots.begin(), ps.home_pots.end(), 1);

  ps.latent = plan_goal(ps, initial);
  return ps;
}

Action scripted_action(const PartnerState& ps, const GameState& state) {
  return scripted_choice(ps, state).value_or(Action::stay);
}

std::pair<Action, PartnerState> partner_act(const PartnerState& ps, const GameState& state) {
  PartnerState next = ps;
  const PlayerState& me = self_of(next, state);
  if (!goal_valid(next.latent.goal, me.held, next)) next.latent = plan_goal(next, state);
  auto choice = scripted_choice(next, state);
  if (!choice) {
    next.latent = plan_goal(next, state);
    choice = scripted_choice(next, state);
  }
  Action a = choice.value_or(Action::stay);
  if (next.spec.epsilon > 0.0 && uniform01(next.rng) < next.spec.epsilon)
    a = kAllActions[static_cast<std::size_t>(uniform_int(next.rng, 0, kNumActions - 1))];
  return {a, std::move(next)};
}

PartnerState latent_transition(const PartnerState& ps, const std::vector<Event>& events, const GameState& state) {
  PartnerState next = ps;
  const PlayerState& me = self_of(next, state);

  bool bumped = false;
  bool placed = false;
  for (const Event& e : events) {
    if (e.actor != next.pid) continue;
    if (e.kind == EventKind::blocked_move) bumped = true;
    if (e.kind == EventKind::drop_on_counter) placed = true;
  }
  if (bumped)
    ++next.blocked_streak;
  else if (me.position != next.last_position)
    next.blocked_streak = 0;
  next.last_position = me.position;

  bool replan = placed;
  if (placed && next.latent.goal == Goal::place_on_counter) {
    ++next.counter_moves;
    next.counter_task = false;
  }

  if (next.spec.kind == PartnerKind::preference_adaptive) {
    if (!next.flipped && next.latent.ingredient_preference == Preference::onion &&
        next.latent.goal == Goal::fetch_onion && next.blocked_streak >= next.spec.block_switch_threshold) {
      next.latent.ingredient_preference = Preference::tomato;
      next.flipped = true;
      replan = true;
    }
    if (me.held.kind != ObjectKind::plate && me.held.kind != ObjectKind::soup &&
        next.latent.goal != Goal::plate_soup) {
      const DistanceField mine(*state.layout, {me.position});
      const bool soup_ready = !reachable_subset(state, mine, pots_where(state, next, false, pot_done)).empty();
      if (soup_ready) {
        for (Cell c : reachable_subset(state, mine, counters_holding(state, ObjectKind::plate))) {
          if (manhattan(c, me.position) <= next.spec.plate_pickup_radius) {
            next.latent.goal = Goal::plate_soup;
            next.latent.commitment = next.spec.commitment_ticks;
            return next;
          }
        }
      }
    }
  }

  --next.latent.commitment;
  if (replan || next.latent.commitment <= 0 || !goal_valid(next.latent.goal, me.held, next))
    next.latent = plan_goal(next, state);
  return next;
}

}  // namespace influence
