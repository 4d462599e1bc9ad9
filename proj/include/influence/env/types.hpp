#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace influence {

// Six player actions. The enumerator order is the tie-break order used by
// every argmax and path search in the project.
enum class Action : std::uint8_t { stay = 0, up, down, left, right, interact };

inline constexpr int kNumActions = 6;
inline constexpr std::array<Action, kNumActions> kAllActions{
    Action::stay, Action::up, Action::down, Action::left, Action::right, Action::interact};

std::string_view to_string(Action a);
std::optional<Action> action_from_string(std::string_view s);

inline constexpr int index_of(Action a) { return static_cast<int>(a); }
inline constexpr Action action_at(int i) { return static_cast<Action>(i); }

enum class Direction : std::uint8_t { up = 0, down, left, right };

std::string_view to_string(Direction d);
std::optional<Direction> direction_from_string(std::string_view s);

// Grid coordinate. Axis convention: (col, row) with row 0 at the top, so
// moving up decrements row.
struct Cell {
  int col = 0;
  int row = 0;

  friend constexpr bool operator==(Cell, Cell) = default;
  friend constexpr auto operator<=>(const Cell& a, const Cell& b) {
    if (auto c = a.row <=> b.row; c != 0) return c;
    return a.col <=> b.col;
  }
};

constexpr Cell offset(Cell c, Direction d) {
  switch (d) {
    case Direction::up: return {c.col, c.row - 1};
    case Direction::down: return {c.col, c.row + 1};
    case Direction::left: return {c.col - 1, c.row};
    case Direction::right: return {c.col + 1, c.row};
  }
  return c;
}

constexpr int manhattan(Cell a, Cell b) {
  return (a.col > b.col ? a.col - b.col : b.col - a.col) +
         (a.row > b.row ? a.row - b.row : b.row - a.row);
}

constexpr std::optional<Direction> move_direction(Action a) {
  switch (a) {
    case Action::up: return Direction::up;
    case Action::down: return Direction::down;
    case Action::left: return Direction::left;
    case Action::right: return Direction::right;
    default: return std::nullopt;
  }
}

constexpr Action move_action(Direction d) {
  switch (d) {
    case Direction::up: return Action::up;
    case Direction::down: return Action::down;
    case Direction::left: return Action::left;
    case Direction::right: return Action::right;
  }
  return Action::stay;
}

enum class TileKind : std::uint8_t {
  floor = 0,
  counter,
  onion_source,
  tomato_source,
  plate_dispenser,
  pot,
  delivery
};

constexpr bool passable(TileKind t) { return t == TileKind::floor; }

std::string_view to_string(TileKind t);

enum class ObjectKind : std::uint8_t { none = 0, onion, tomato, plate, soup };

std::string_view to_string(ObjectKind k);
std::optional<ObjectKind> object_kind_from_string(std::string_view s);

// A movable object. Ingredient counts are only meaningful for soups.
struct Object {
  ObjectKind kind = ObjectKind::none;
  std::uint8_t onions = 0;
  std::uint8_t tomatoes = 0;

  friend constexpr bool operator==(const Object&, const Object&) = default;

  constexpr bool empty() const { return kind == ObjectKind::none; }
  constexpr bool is_ingredient() const {
    return kind == ObjectKind::onion || kind == ObjectKind::tomato;
  }
  constexpr bool tomato_only() const {
    return kind == ObjectKind::soup && onions == 0 && tomatoes > 0;
  }

  static constexpr Object make(ObjectKind k) { return Object{k, 0, 0}; }
  static constexpr Object soup(int onions, int tomatoes) {
    return Object{ObjectKind::soup, static_cast<std::uint8_t>(onions),
                  static_cast<std::uint8_t>(tomatoes)};
  }
};

}  // namespace influence
