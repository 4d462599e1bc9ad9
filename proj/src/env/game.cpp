#include "influence/env/game.hpp"

#include <array>

namespace influence {

namespace {

struct NamedVariant {
  RewardVariant v;
  std::string_view name;
};
constexpr std::array<NamedVariant, 4> kVariants{{
    {RewardVariant::standard, "standard"},
    {RewardVariant::human_deliver, "human_deliver"},
    {RewardVariant::tomato_bonus, "tomato_bonus"},
    {RewardVariant::counter_instruction, "counter_instruction"},
}};

constexpr std::array<std::string_view, 9> kEventNames{
    "pickup", "drop_on_counter", "pot_fill", "cook_start", "cook_done",
    "plate_soup", "deliver", "blocked_move", "noop"};

Object ingredient_for(TileKind t) {
  return Object::make(t == TileKind::onion_source ? ObjectKind::onion : ObjectKind::tomato);
}

void interact(GameState& s, int pid, std::vector<Event>& events) {
  PlayerState& p = s.players[static_cast<std::size_t>(pid)];
  const Cell target = offset(p.position, p.orientation);
  const TileKind tile = s.layout->tile(target);
  auto emit = [&](EventKind k, Object o) { events.push_back(Event{k, pid, target, o}); };

  switch (tile) {
    case TileKind::counter: {
      if (!s.layout->in_bounds(target)) break;
      Object& slot = s.counter_at(target);
      if (!p.held.empty() && slot.empty()) {
        slot = p.held;
        p.held = {};
        emit(EventKind::drop_on_counter, slot);
        return;
      }
      if (p.held.empty() && !slot.empty()) {
        p.held = slot;
        slot = {};
        emit(EventKind::pickup, p.held);
        return;
      }
      break;
    }
    case TileKind::onion_source:
    case TileKind::tomato_source:
      if (p.held.empty()) {
        p.held = ingredient_for(tile);
        emit(EventKind::pickup, p.held);
        return;
      }
      break;
    case TileKind::plate_dispenser:
      if (p.held.empty()) {
        p.held = Object::make(ObjectKind::plate);
        emit(EventKind::pickup, p.held);
        return;
      }
      break;
    case TileKind::pot: {
      PotState& pot = s.pots[static_cast<std::size_t>(s.layout->pot_index(target))];
      if (p.held.is_ingredient() && pot.accepts_ingredient()) {
        if (p.held.kind == ObjectKind::onion)
          ++pot.onions;
        else
          ++pot.tomatoes;
        emit(EventKind::pot_fill, p.held);
        p.held = {};
        if (pot.size() == kPotCapacity) {
          pot.cook_timer = s.config.cook_time;
          emit(EventKind::cook_start, Object::soup(pot.onions, pot.tomatoes));
        }
        return;
      }
      if (p.held.kind == ObjectKind::plate && pot.done) {
        p.held = Object::soup(pot.onions, pot.tomatoes);
        pot = PotState{};
        emit(EventKind::plate_soup, p.held);
        return;
      }
      break;
    }
    case TileKind::delivery:
      if (p.held.kind == ObjectKind::soup) {
        const Object soup = p.held;
        p.held = {};
        emit(EventKind::deliver, soup);
        return;
      }
      break;
    case TileKind::floor:
      break;
  }
  emit(EventKind::noop, Object{});
}

}  // namespace

std::string_view to_string(RewardVariant v) {
  for (const auto& nv : kVariants)
    if (nv.v == v) return nv.name;
  return "?";
}

RewardVariant reward_variant_from_string(std::string_view s) {
  for (const auto& nv : kVariants)
    if (nv.name == s) return nv.v;
  throw std::invalid_argument("unknown reward variant '" + std::string(s) + "'");
}

std::string_view to_string(EventKind k) { return kEventNames[static_cast<std::size_t>(k)]; }

EventKind event_kind_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kEventNames.size(); ++i)
    if (kEventNames[i] == s) return static_cast<EventKind>(i);
  throw std::invalid_argument("unknown event kind '" + std::string(s) + "'");
}

bool operator==(const GameState& a, const GameState& b) {
  const bool same_layout =
      a.layout == b.layout ||
      (a.layout && b.layout && a.layout->name() == b.layout->name() &&
       serialize_layout(*a.layout) == serialize_layout(*b.layout));
  return same_layout && a.players == b.players && a.pots == b.pots && a.counters == b.counters &&
         a.timestep == b.timestep && a.horizon == b.horizon && a.reward_spec == b.reward_spec &&
         a.config == b.config && a.score == b.score && a.seed == b.seed;
}

GameState reset(LayoutPtr layout, const RewardSpec& spec, int horizon, std::uint64_t seed,
                const EnvConfig& config) {
  if (!layout) throw std::invalid_argument("reset: null layout");
  if (horizon <= 0) throw std::invalid_argument("reset: horizon must be positive");
  if (config.cook_time < 1) throw std::invalid_argument("reset: cook_time must be at least 1");
  GameState s;
  s.players[0].position = layout->spawns()[0];
  s.players[1].position = layout->spawns()[1];
  s.pots.assign(layout->pots().size(), PotState{});
  s.counters.assign(static_cast<std::size_t>(layout->width() * layout->height()), Object{});
  s.layout = std::move(layout);
  s.timestep = 0;
  s.horizon = horizon;
  s.reward_spec = spec;
  s.config = config;
  s.seed = seed;
  return s;
}

StepResult step(const GameState& state, Action ego, Action partner) {
  if (state.finished()) throw EpisodeFinished();
  StepResult out{state, 0, {}};
  GameState& s = out.state;
  auto& events = out.events;

  for (std::size_t i = 0; i < s.pots.size(); ++i) {
    PotState& pot = s.pots[i];
    if (pot.cooking() && --pot.cook_timer == 0) {
      pot.done = true;
      events.push_back(Event{EventKind::cook_done, -1, s.layout->pots()[i],
                             Object::soup(pot.onions, pot.tomatoes)});
    }
  }

  const std::array<Action, 2> actions{ego, partner};
  for (int pid = 0; pid < 2; ++pid)
    if (actions[static_cast<std::size_t>(pid)] == Action::interact) interact(s, pid, events);

  std::array<Cell, 2> intended{s.players[0].position, s.players[1].position};
  std::array<bool, 2> moving{false, false};
  for (std::size_t pid = 0; pid < 2; ++pid) {
    const auto dir = move_direction(actions[pid]);
    if (!dir) continue;
    PlayerState& p = s.players[pid];
    p.orientation = *dir;
    const Cell target = offset(p.position, *dir);
    if (s.layout->walkable(target)) {
      intended[pid] = target;
      moving[pid] = true;
    }
  }
  const Cell old0 = s.players[0].position;
  const Cell old1 = s.players[1].position;
  const bool same_target = intended[0] == intended[1];
  const bool swap = intended[0] == old1 && intended[1] == old0;
  if (same_target || swap) {
    for (int pid = 0; pid < 2; ++pid)
      if (moving[static_cast<std::size_t>(pid)])
        events.push_back(Event{EventKind::blocked_move, pid, intended[static_cast<std::size_t>(pid)], Object{}});
  } else {
    s.players[0].position = intended[0];
    s.players[1].position = intended[1];
  }

  out.reward = compute_reward(s.reward_spec, events);
  s.score += out.reward;
  ++s.timestep;
  return out;
}

int compute_reward(const RewardSpec& spec, const std::vector<Event>& events) {
  int total = 0;
  for (const Event& e : events) {
    if (e.kind == EventKind::deliver) {
      int r = spec.base_soup_reward;
      if (spec.variant == RewardVariant::human_deliver && e.actor == 1) r *= spec.multiplier;
      if (spec.variant == RewardVariant::tomato_bonus && e.object.tomato_only()) r *= spec.multiplier;
      total += r;
    } else if (e.kind == EventKind::drop_on_counter && spec.variant == RewardVariant::counter_instruction &&
               e.actor == 0 && e.object.is_ingredient()) {
      total += spec.counter_drop_reward;
    }
  }
  return total;
}

}  // namespace influence
