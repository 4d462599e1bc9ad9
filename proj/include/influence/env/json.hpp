#pragma once

#include <json.hpp>

#include "influence/env/game.hpp"

namespace influence {

// GameState JSON schema (keys emitted in sorted order):
//   {
//     "layout": <name>, "grid": [<row strings in layout DSL>],
//     "timestep": int, "horizon": int, "score": int, "seed": uint,
//     "cook_time": int,
//     "reward_spec": {"variant": "standard|human_deliver|tomato_bonus|counter_instruction",
//                     "base_soup_reward": int, "multiplier": int, "counter_drop_reward": int},
//     "players": [{"position": [col, row], "orientation": "up|down|left|right",
//                  "held": <object>}, ...2],
//     "pots": [{"cell": [col, row], "onions": int, "tomatoes": int,
//               "cook_timer": int, "done": bool}, ...],
//     "counters": [{"cell": [col, row], "object": <object>}, ...]   // occupied only
//   }
//   <object> = {"kind": "none|onion|tomato|plate|soup"[, "onions": int, "tomatoes": int]}
nlohmann::json to_json(const Object& o);
Object object_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RewardSpec& spec);
RewardSpec reward_spec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const GameState& s);
GameState game_state_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Event& e);
Event event_from_json(const nlohmann::json& j);

}  // namespace influence
