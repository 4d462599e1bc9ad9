#pragma once

#include <optional>
#include <vector>

#include "influence/env/game.hpp"

namespace influence::pathing {

inline constexpr int kUnreachable = -1;

// Breadth-first distances over floor cells, indexed by layout cell index.
// `blocked` cells (if any) are treated as walls.
class DistanceField {
 public:
  DistanceField(const Layout& layout, const std::vector<Cell>& sources,
                std::optional<Cell> blocked = std::nullopt);

  int at(Cell c) const;
  bool reachable(Cell c) const { return at(c) != kUnreachable; }

 private:
  const Layout* layout_;
  std::vector<int> dist_;
};

// Floor cells from which `target` can be interacted with.
std::vector<Cell> approach_cells(const Layout& layout, Cell target);

// True if some approach cell of any target is reachable from `from`.
bool can_reach_any(const Layout& layout, Cell from, const std::vector<Cell>& targets,
                   std::optional<Cell> blocked = std::nullopt);

// Shortest distance (in moves) from `from` to an approach cell of any
// target, or kUnreachable.
int distance_to_any(const Layout& layout, Cell from, const std::vector<Cell>& targets,
                    std::optional<Cell> blocked = std::nullopt);

// One step of a shortest route that ends facing one of `targets`, then
// `interact` once there (or `stay` when `interact_on_arrival` is false).
// The other player is avoided when a route around it exists; otherwise it is
// ignored and the mover will bump into it. Equal-length choices are broken
// by the action order. Returns nullopt if no target can be reached.
std::optional<Action> step_toward(const GameState& state, int pid, const std::vector<Cell>& targets,
                                  bool interact_on_arrival = true);

// One step of a shortest route onto floor cell `dest` (stay when there).
std::optional<Action> step_onto(const GameState& state, int pid, Cell dest);

}  // namespace influence::pathing
