#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "influence/env/game.hpp"

namespace influence::play {

inline constexpr int kWireVersion = 1;

enum class WireType {
  // client to server
  join,
  action,
  pause,
  restart,
  // server to client
  state_snapshot,
  episode_end,
  error
};

std::string_view to_string(WireType t);
WireType wire_type_from_string(std::string_view s);
bool client_to_server(WireType t);

struct AgentView {
  std::string algo;
  bool has_belief = false;
  std::vector<double> belief_mean;
  std::vector<double> belief_variance;
};

// One protocol envelope. Which fields matter depends on `type`:
//   join            session
//   action          session, tick, action
//   pause, restart  session
//   state_snapshot  session, tick, state, score, remaining, agent
//   episode_end     session, tick, summary
//   error           code, text
struct WireMessage {
  WireType type = WireType::error;
  std::string session;
  int tick = 0;
  Action action = Action::stay;
  std::optional<GameState> state;
  int score = 0;
  int remaining = 0;
  std::optional<AgentView> agent;
  nlohmann::json summary;
  std::string code;
  std::string text;

  static WireMessage make_error(std::string code, std::string text, std::string session = {});
};

class WireError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json to_json(const WireMessage& m);
WireMessage wire_from_json(const nlohmann::json& j);

// Compact JSON text. Equal messages encode to equal bytes.
std::string encode(const WireMessage& m);
WireMessage decode(std::string_view text);

}  // namespace influence::play
