#include "influence/partners/pathing.hpp"

#include <deque>

namespace influence::pathing {

DistanceField::DistanceField(const Layout& layout, const std::vector<Cell>& sources,
                             std::optional<Cell> blocked)
    : layout_(&layout), dist_(static_cast<std::size_t>(layout.width() * layout.height()), kUnreachable) {
  std::deque<Cell> queue;
  for (Cell s : sources) {
    if (!layout.walkable(s) || (blocked && *blocked == s)) continue;
    auto& d = dist_[static_cast<std::size_t>(layout.index(s))];
    if (d == kUnreachable) {
      d = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    const int dc = dist_[static_cast<std::size_t>(layout.index(c))];
    for (int k = 0; k < 4; ++k) {
      const Cell n = offset(c, static_cast<Direction>(k));
      if (!layout.walkable(n) || (blocked && *blocked == n)) continue;
      auto& dn = dist_[static_cast<std::size_t>(layout.index(n))];
      if (dn == kUnreachable) {
        dn = dc + 1;
        queue.push_back(n);
      }
    }
  }
}

int DistanceField::at(Cell c) const {
  if (!layout_->in_bounds(c)) return kUnreachable;
  return dist_[static_cast<std::size_t>(layout_->index(c))];
}

std::vector<Cell> approach_cells(const Layout& layout, Cell target) {
  std::vector<Cell> out;
  for (int k = 0; k < 4; ++k) {
    const Cell n = offset(target, static_cast<Direction>(k));
    if (layout.walkable(n)) out.push_back(n);
  }
  return out;
}

namespace {

std::vector<Cell> all_approaches(const Layout& layout, const std::vector<Cell>& targets) {
  std::vector<Cell> out;
  for (Cell t : targets)
    for (Cell a : approach_cells(layout, t)) out.push_back(a);
  return out;
}

// Target adjacent to `at` that the player should face, preferring the one it
// already faces, then direction order.
std::optional<Direction> facing_choice(const PlayerState& p, const std::vector<Cell>& targets) {
  auto is_target = [&](Cell c) {
    for (Cell t : targets)
      if (t == c) return true;
    return false;
  };
  if (is_target(offset(p.position, p.orientation))) return p.orientation;
  for (int k = 0; k < 4; ++k) {
    const auto d = static_cast<Direction>(k);
    if (is_target(offset(p.position, d))) return d;
  }
  return std::nullopt;
}

std::optional<Action> descend(const Layout& layout, Cell from, const DistanceField& field) {
  const int here = field.at(from);
  if (here == kUnreachable) return std::nullopt;
  for (int k = 0; k < 4; ++k) {
    const auto d = static_cast<Direction>(k);
    const int dn = field.at(offset(from, d));
    if (dn != kUnreachable && dn == here - 1 && layout.walkable(offset(from, d))) return move_action(d);
  }
  return std::nullopt;
}

}  // namespace

bool can_reach_any(const Layout& layout, Cell from, const std::vector<Cell>& targets,
                   std::optional<Cell> blocked) {
  return distance_to_any(layout, from, targets, blocked) != kUnreachable;
}

int distance_to_any(const Layout& layout, Cell from, const std::vector<Cell>& targets,
                    std::optional<Cell> blocked) {
  const DistanceField field(layout, all_approaches(layout, targets), blocked);
  return field.at(from);
}

std::optional<Action> step_toward(const GameState& state, int pid, const std::vector<Cell>& targets,
                                  bool interact_on_arrival) {
  if (targets.empty()) return std::nullopt;
  const Layout& layout = *state.layout;
  const PlayerState& me = state.players[static_cast<std::size_t>(pid)];
  const Cell other = state.players[static_cast<std::size_t>(1 - pid)].position;

  if (auto dir = facing_choice(me, targets)) {
    if (*dir == me.orientation) return interact_on_arrival ? Action::interact : Action::stay;
    return move_action(*dir);
  }
  const auto goals = all_approaches(layout, targets);
  const DistanceField avoiding(layout, goals, other);
  if (avoiding.reachable(me.position)) {
    if (auto a = descend(layout, me.position, avoiding)) return a;
  }
  const DistanceField direct(layout, goals);
  if (!direct.reachable(me.position)) return std::nullopt;
  return descend(layout, me.position, direct);
}

std::optional<Action> step_onto(const GameState& state, int pid, Cell dest) {
  const Layout& layout = *state.layout;
  const PlayerState& me = state.players[static_cast<std::size_t>(pid)];
  if (me.position == dest) return Action::stay;
  const Cell other = state.players[static_cast<std::size_t>(1 - pid)].position;
  const DistanceField avoiding(layout, {dest}, other);
  if (avoiding.reachable(me.position)) {
    if (auto a = descend(layout, me.position, avoiding)) return a;
  }
  const DistanceField direct(layout, {dest});
  if (!direct.reachable(me.position)) return std::nullopt;
  return descend(layout, me.position, direct);
}

}  // namespace influence::pathing
