#pragma once

#include <stdexcept>

#include "influence/env/game.hpp"

namespace influence {

class InferenceError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Reconstructs the action player `pid` took between two consecutive states:
// a position change is a move, an orientation change alone is a turn (the
// move action toward the new facing), a change of held object is interact,
// anything else is stay. Actions with no observable effect read as stay.
Action infer_action_from_states(const GameState& s, const GameState& s_next, int pid);

}  // namespace influence
