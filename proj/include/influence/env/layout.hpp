#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "influence/env/types.hpp"

namespace influence {

class LayoutError : public std::runtime_error {
 public:
  LayoutError(const std::string& what, int row, int col)
      : std::runtime_error(what + " (row " + std::to_string(row) + ", col " +
                           std::to_string(col) + ")"),
        row_(row),
        col_(col) {}
  explicit LayoutError(const std::string& what)
      : std::runtime_error(what), row_(-1), col_(-1) {}

  int row() const { return row_; }
  int col() const { return col_; }

 private:
  int row_;
  int col_;
};

// Static kitchen geometry.
//
// Layout DSL, one character per tile, rows separated by newlines:
//   X counter, ' ' floor, O onion source, T tomato source,
//   D plate dispenser, P pot, S delivery, 1/2 spawn of player 0/1 (floor).
class Layout {
 public:
  Layout(std::string name, int width, int height, std::vector<TileKind> tiles,
         std::array<Cell, 2> spawns);

  const std::string& name() const { return name_; }
  int width() const { return width_; }
  int height() const { return height_; }
  const std::array<Cell, 2>& spawns() const { return spawns_; }

  bool in_bounds(Cell c) const {
    return c.col >= 0 && c.row >= 0 && c.col < width_ && c.row < height_;
  }
  int index(Cell c) const { return c.row * width_ + c.col; }
  Cell cell_at(int index) const { return {index % width_, index / width_}; }

  // Out-of-bounds cells read as counters so edges behave like walls.
  TileKind tile(Cell c) const {
    return in_bounds(c) ? tiles_[static_cast<std::size_t>(index(c))] : TileKind::counter;
  }
  bool walkable(Cell c) const { return passable(tile(c)); }

  // Cells of a given kind in row-major order.
  const std::vector<Cell>& cells_of(TileKind kind) const {
    return by_kind_[static_cast<std::size_t>(kind)];
  }
  const std::vector<Cell>& pots() const { return cells_of(TileKind::pot); }

  // Index of a pot cell in pots(), or -1.
  int pot_index(Cell c) const;

 private:
  std::string name_;
  int width_;
  int height_;
  std::vector<TileKind> tiles_;
  std::array<Cell, 2> spawns_;
  std::array<std::vector<Cell>, 7> by_kind_;
};

using LayoutPtr = std::shared_ptr<const Layout>;

LayoutPtr parse_layout(std::string_view text, std::string name = "custom");

// Inverse of parse_layout: the canonical DSL text (no trailing newline,
// rows padded to full width).
std::string serialize_layout(const Layout& layout);

// Canonical form of layout text: trailing whitespace-only lines dropped,
// '\r' removed. parse/serialize round-trip to this form.
std::string canonical_layout_text(std::string_view text);

// Built-in layouts: asymmetric_advantages, forced_coordination,
// open_asymmetric_advantages, counter_circuit.
std::vector<std::string> layout_names();
std::string_view layout_text(std::string_view name);
LayoutPtr builtin_layout(std::string_view name);

}  // namespace influence
