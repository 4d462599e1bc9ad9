#include "influence/env/features.hpp"

#include <limits>
#include <optional>

namespace influence {

namespace {

void put_offset(FeatureVector& f, int at, Cell self, std::optional<Cell> target) {
  if (!target) {
    f[static_cast<std::size_t>(at)] = kMissingOffset;
    f[static_cast<std::size_t>(at + 1)] = kMissingOffset;
    return;
  }
  f[static_cast<std::size_t>(at)] = target->col - self.col;
  f[static_cast<std::size_t>(at + 1)] = target->row - self.row;
}

// Nearest by Manhattan distance; ties go to the first cell in row-major order.
template <class Pred>
std::optional<Cell> closest_where(const Layout& layout, Cell self, Pred pred) {
  std::optional<Cell> best;
  int best_d = std::numeric_limits<int>::max();
  for (int i = 0; i < layout.width() * layout.height(); ++i) {
    const Cell c = layout.cell_at(i);
    if (!pred(c)) continue;
    const int d = manhattan(self, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

std::optional<Cell> closest_tile(const Layout& layout, Cell self, TileKind kind) {
  return closest_where(layout, self, [&](Cell c) { return layout.tile(c) == kind; });
}

void put_one_hot_held(FeatureVector& f, int at, const Object& held) {
  switch (held.kind) {
    case ObjectKind::onion: f[static_cast<std::size_t>(at)] = 1; break;
    case ObjectKind::tomato: f[static_cast<std::size_t>(at + 1)] = 1; break;
    case ObjectKind::plate: f[static_cast<std::size_t>(at + 2)] = 1; break;
    case ObjectKind::soup: f[static_cast<std::size_t>(at + 3)] = 1; break;
    case ObjectKind::none: break;
  }
}

}  // namespace

FeatureVector featurize(const GameState& state, int pid) {
  FeatureVector f{};
  const Layout& layout = *state.layout;
  const PlayerState& me = state.players[static_cast<std::size_t>(pid)];
  const PlayerState& other = state.players[static_cast<std::size_t>(1 - pid)];
  const Cell self = me.position;

  put_offset(f, feature::other_player, self, other.position);

  auto on_counter = [&](ObjectKind kind) {
    return closest_where(layout, self, [&](Cell c) {
      return layout.tile(c) == TileKind::counter && state.counter_at(c).kind == kind;
    });
  };
  put_offset(f, feature::closest_onion, self, on_counter(ObjectKind::onion));
  put_offset(f, feature::closest_tomato, self, on_counter(ObjectKind::tomato));
  put_offset(f, feature::closest_plate, self, on_counter(ObjectKind::plate));
  put_offset(f, feature::closest_soup, self, closest_where(layout, self, [&](Cell c) {
               const TileKind t = layout.tile(c);
               if (t == TileKind::pot) return state.pots[static_cast<std::size_t>(layout.pot_index(c))].done;
               return t == TileKind::counter && state.counter_at(c).kind == ObjectKind::soup;
             }));
  put_offset(f, feature::onion_source, self, closest_tile(layout, self, TileKind::onion_source));
  put_offset(f, feature::tomato_source, self, closest_tile(layout, self, TileKind::tomato_source));
  put_offset(f, feature::plate_dispenser, self, closest_tile(layout, self, TileKind::plate_dispenser));
  put_offset(f, feature::delivery, self, closest_tile(layout, self, TileKind::delivery));

  const auto& pots = layout.pots();
  for (std::size_t i = 0; i < 2; ++i) {
    const int at = i == 0 ? feature::pot0 : feature::pot1;
    const int status = i == 0 ? feature::pot0_status : feature::pot1_status;
    if (i >= pots.size()) {
      put_offset(f, at, self, std::nullopt);
      continue;
    }
    put_offset(f, at, self, pots[i]);
    const PotState& p = state.pots[i];
    f[static_cast<std::size_t>(status)] = p.onions / 3.0;
    f[static_cast<std::size_t>(status + 1)] = p.tomatoes / 3.0;
    f[static_cast<std::size_t>(status + 2)] = static_cast<double>(p.cook_timer) / state.config.cook_time;
    f[static_cast<std::size_t>(status + 3)] = p.done ? 1.0 : 0.0;
  }

  f[static_cast<std::size_t>(feature::orientation + static_cast<int>(me.orientation))] = 1;
  put_one_hot_held(f, feature::held, me.held);
  for (int d = 0; d < 4; ++d) {
    const Cell n = offset(self, static_cast<Direction>(d));
    if (layout.in_bounds(n) && layout.tile(n) == TileKind::counter && state.counter_at(n).empty())
      f[static_cast<std::size_t>(feature::adjacent_empty_counter + d)] = 1;
  }
  f[static_cast<std::size_t>(feature::other_orientation + static_cast<int>(other.orientation))] = 1;
  put_one_hot_held(f, feature::other_held, other.held);
  f[feature::held_tomato_soup] = me.held.tomato_only() ? 1.0 : 0.0;
  f[feature::position] = self.col;
  f[feature::position + 1] = self.row;
  return f;
}

}  // namespace influence
