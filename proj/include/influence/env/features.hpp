#pragma once

#include <array>

#include "influence/env/game.hpp"

namespace influence {

inline constexpr int kFeatureDim = 64;
inline constexpr double kMissingOffset = 99.0;

using FeatureVector = std::array<double, kFeatureDim>;

// Egocentric feature layout. Offsets are (target - self) as (dcol, drow);
// a missing target reads kMissingOffset in both entries.
//
//   [0,1]   other player
//   [2,3]   closest onion resting on a counter
//   [4,5]   closest tomato resting on a counter
//   [6,7]   closest plate resting on a counter
//   [8,9]   closest ready soup (done pot or soup on a counter)
//   [10,11] closest onion source
//   [12,13] closest tomato source
//   [14,15] closest plate dispenser
//   [16,17] closest delivery tile
//   [18,19] pot 0        [20,21] pot 1   (layout row-major order)
//   [22..25] pot 0 status: onions/3, tomatoes/3, cook ticks remaining/cook_time, done
//   [26..29] pot 1 status
//   [30..33] own orientation one-hot (up, down, left, right)
//   [34..37] own held one-hot (onion, tomato, plate, soup)
//   [38..41] empty counter adjacent (up, down, left, right)
//   [42..45] other player's orientation one-hot
//   [46..49] other player's held one-hot
//   [50]    own held soup is tomato-only
//   [51,52] own absolute position (col, row)
//   [53..63] zero
namespace feature {
inline constexpr int other_player = 0;
inline constexpr int closest_onion = 2;
inline constexpr int closest_tomato = 4;
inline constexpr int closest_plate = 6;
inline constexpr int closest_soup = 8;
inline constexpr int onion_source = 10;
inline constexpr int tomato_source = 12;
inline constexpr int plate_dispenser = 14;
inline constexpr int delivery = 16;
inline constexpr int pot0 = 18;
inline constexpr int pot1 = 20;
inline constexpr int pot0_status = 22;
inline constexpr int pot1_status = 26;
inline constexpr int orientation = 30;
inline constexpr int held = 34;
inline constexpr int adjacent_empty_counter = 38;
inline constexpr int other_orientation = 42;
inline constexpr int other_held = 46;
inline constexpr int held_tomato_soup = 50;
inline constexpr int position = 51;
inline constexpr int used = 53;
}  // namespace feature

FeatureVector featurize(const GameState& state, int pid);

// Indices of the relative-offset entries ([0, 22)).
inline constexpr bool is_offset_feature(int i) { return i < feature::pot0_status; }

}  // namespace influence
