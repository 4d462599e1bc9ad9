#include "influence/env/infer.hpp"

#include <string>

namespace influence {

Action infer_action_from_states(const GameState& s, const GameState& s_next, int pid) {
  if (pid != 0 && pid != 1) throw InferenceError("player index must be 0 or 1");
  if (s_next.timestep != s.timestep + 1)
    throw InferenceError("states are not one tick apart (" + std::to_string(s.timestep) + " -> " +
                         std::to_string(s_next.timestep) + ")");
  const PlayerState& before = s.players[static_cast<std::size_t>(pid)];
  const PlayerState& after = s_next.players[static_cast<std::size_t>(pid)];

  if (after.position != before.position) {
    for (int d = 0; d < 4; ++d) {
      const auto dir = static_cast<Direction>(d);
      if (offset(before.position, dir) == after.position) return move_action(dir);
    }
    throw InferenceError("position changed by more than one cell");
  }
  if (after.orientation != before.orientation) return move_action(after.orientation);
  if (!(after.held == before.held)) return Action::interact;
  return Action::stay;
}

}  // namespace influence
