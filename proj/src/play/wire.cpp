#include "influence/play/wire.hpp"

#include <array>

#include "influence/env/json.hpp"

namespace influence::play {

using nlohmann::json;

namespace {
constexpr std::array<std::string_view, 7> kTypeNames{"join",           "action",      "pause", "restart",
                                                     "state_snapshot", "episode_end", "error"};
}

std::string_view to_string(WireType t) { return kTypeNames[static_cast<std::size_t>(t)]; }

WireType wire_type_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kTypeNames.size(); ++i)
    if (kTypeNames[i] == s) return static_cast<WireType>(i);
  throw WireError("unknown message type '" + std::string(s) + "'");
}

bool client_to_server(WireType t) { return t <= WireType::restart; }

WireMessage WireMessage::make_error(std::string code, std::string text, std::string session) {
  WireMessage m;
  m.type = WireType::error;
  m.code = std::move(code);
  m.text = std::move(text);
  m.session = std::move(session);
  return m;
}

json to_json(const WireMessage& m) {
  json j{{"v", kWireVersion}, {"type", std::string(to_string(m.type))}};
  if (!m.session.empty()) j["session"] = m.session;
  switch (m.type) {
    case WireType::join:
    case WireType::pause:
    case WireType::restart:
      break;
    case WireType::action:
      j["tick"] = m.tick;
      j["action"] = std::string(to_string(m.action));
      break;
    case WireType::state_snapshot:
      j["tick"] = m.tick;
      j["score"] = m.score;
      j["remaining"] = m.remaining;
      if (m.state) j["state"] = to_json(*m.state);
      if (m.agent) {
        json a{{"algo", m.agent->algo}};
        if (m.agent->has_belief) a["belief"] = {{"mean", m.agent->belief_mean}, {"variance", m.agent->belief_variance}};
        j["agent"] = std::move(a);
      }
      break;
    case WireType::episode_end:
      j["tick"] = m.tick;
      j["summary"] = m.summary;
      break;
    case WireType::error:
      j["code"] = m.code;
      j["text"] = m.text;
      break;
  }
  return j;
}

WireMessage wire_from_json(const json& j) {
  try {
    if (!j.is_object()) throw WireError("message must be a JSON object");
    const int v = j.value("v", kWireVersion);
    if (v != kWireVersion) throw WireError("unsupported protocol version " + std::to_string(v));
    WireMessage m;
    m.type = wire_type_from_string(j.at("type").get<std::string>());
    m.session = j.value("session", std::string());
    switch (m.type) {
      case WireType::join:
      case WireType::pause:
      case WireType::restart:
        break;
      case WireType::action: {
        m.tick = j.at("tick").get<int>();
        const auto a = action_from_string(j.at("action").get<std::string>());
        if (!a) throw WireError("unknown action '" + j.at("action").get<std::string>() + "'");
        m.action = *a;
        break;
      }
      case WireType::state_snapshot:
        m.tick = j.at("tick").get<int>();
        m.score = j.value("score", 0);
        m.remaining = j.value("remaining", 0);
        if (j.contains("state")) m.state = game_state_from_json(j.at("state"));
        if (j.contains("agent")) {
          AgentView a;
          a.algo = j.at("agent").value("algo", std::string());
          if (j.at("agent").contains("belief")) {
            a.has_belief = true;
            a.belief_mean = j.at("agent").at("belief").at("mean").get<std::vector<double>>();
            a.belief_variance = j.at("agent").at("belief").at("variance").get<std::vector<double>>();
          }
          m.agent = std::move(a);
        }
        break;
      case WireType::episode_end:
        m.tick = j.at("tick").get<int>();
        m.summary = j.value("summary", json::object());
        break;
      case WireType::error:
        m.code = j.value("code", std::string());
        m.text = j.value("text", std::string());
        break;
    }
    return m;
  } catch (const json::exception& e) {
    throw WireError(std::string("malformed message: ") + e.what());
  }
}

std::string encode(const WireMessage& m) { return to_json(m).dump(); }

WireMessage decode(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw WireError(std::string("invalid JSON: ") + e.what());
  }
  return wire_from_json(j);
}

}  // namespace influence::play
