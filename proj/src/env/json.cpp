#include "influence/env/json.hpp"

#include <stdexcept>

namespace influence {

using nlohmann::json;

namespace {

json cell_json(Cell c) { return json::array({c.col, c.row}); }
Cell cell_from(const json& j) { return Cell{j.at(0).get<int>(), j.at(1).get<int>()}; }

}  // namespace

json to_json(const Object& o) {
  json j{{"kind", std::string(to_string(o.kind))}};
  if (o.kind == ObjectKind::soup) {
    j["onions"] = o.onions;
    j["tomatoes"] = o.tomatoes;
  }
  return j;
}

Object object_from_json(const json& j) {
  const auto kind = object_kind_from_string(j.at("kind").get<std::string>());
  if (!kind) throw std::invalid_argument("unknown object kind");
  Object o = Object::make(*kind);
  if (o.kind == ObjectKind::soup) {
    o.onions = j.at("onions").get<std::uint8_t>();
    o.tomatoes = j.at("tomatoes").get<std::uint8_t>();
  }
  return o;
}

json to_json(const RewardSpec& spec) {
  return json{{"variant", std::string(to_string(spec.variant))},
              {"base_soup_reward", spec.base_soup_reward},
              {"multiplier", spec.multiplier},
              {"counter_drop_reward", spec.counter_drop_reward}};
}

RewardSpec reward_spec_from_json(const json& j) {
  RewardSpec s;
  if (j.is_string()) return RewardSpec::of(reward_variant_from_string(j.get<std::string>()));
  s.variant = reward_variant_from_string(j.at("variant").get<std::string>());
  s.base_soup_reward = j.value("base_soup_reward", s.base_soup_reward);
  s.multiplier = j.value("multiplier", s.multiplier);
  s.counter_drop_reward = j.value("counter_drop_reward", s.counter_drop_reward);
  return s;
}

json to_json(const GameState& s) {
  const Layout& layout = *s.layout;
  json grid = json::array();
  {
    const std::string text = serialize_layout(layout);
    std::size_t start = 0;
    while (start <= text.size()) {
      const auto nl = text.find('\n', start);
      grid.push_back(text.substr(start, nl == std::string::npos ? std::string::npos : nl - start));
      if (nl == std::string::npos) break;
      start = nl + 1;
    }
  }
  json players = json::array();
  for (const auto& p : s.players)
    players.push_back(json{{"position", cell_json(p.position)},
                           {"orientation", std::string(to_string(p.orientation))},
                           {"held", to_json(p.held)}});
  json pots = json::array();
  for (std::size_t i = 0; i < s.pots.size(); ++i) {
    const PotState& p = s.pots[i];
    pots.push_back(json{{"cell", cell_json(layout.pots()[i])},
                        {"onions", p.onions},
                        {"tomatoes", p.tomatoes},
                        {"cook_timer", p.cook_timer},
                        {"done", p.done}});
  }
  json counters = json::array();
  for (std::size_t i = 0; i < s.counters.size(); ++i)
    if (!s.counters[i].empty())
      counters.push_back(json{{"cell", cell_json(layout.cell_at(static_cast<int>(i)))},
                              {"object", to_json(s.counters[i])}});
  return json{{"layout", layout.name()},
              {"grid", grid},
              {"timestep", s.timestep},
              {"horizon", s.horizon},
              {"score", s.score},
              {"seed", s.seed},
              {"cook_time", s.config.cook_time},
              {"reward_spec", to_json(s.reward_spec)},
              {"players", players},
              {"pots", pots},
              {"counters", counters}};
}

GameState game_state_from_json(const json& j) {
  const std::string name = j.at("layout").get<std::string>();
  std::string text;
  for (const auto& row : j.at("grid")) {
    if (!text.empty()) text.push_back('\n');
    text += row.get<std::string>();
  }
  LayoutPtr layout;
  try {
    layout = builtin_layout(name);
    if (serialize_layout(*layout) != canonical_layout_text(text)) layout.reset();
  } catch (const LayoutError&) {
  }
  if (!layout) layout = parse_layout(text, name);

  EnvConfig config;
  config.cook_time = j.value("cook_time", config.cook_time);
  GameState s = reset(layout, reward_spec_from_json(j.at("reward_spec")), j.at("horizon").get<int>(),
                      j.value("seed", std::uint64_t{0}), config);
  s.timestep = j.at("timestep").get<int>();
  s.score = j.value("score", 0);
  const auto& players = j.at("players");
  if (players.size() != 2) throw std::invalid_argument("expected exactly two players");
  for (std::size_t p = 0; p < 2; ++p) {
    const auto& pj = players.at(p);
    s.players[p].position = cell_from(pj.at("position"));
    const auto dir = direction_from_string(pj.at("orientation").get<std::string>());
    if (!dir) throw std::invalid_argument("bad orientation");
    s.players[p].orientation = *dir;
    s.players[p].held = object_from_json(pj.at("held"));
  }
  for (const auto& pj : j.at("pots")) {
    const int idx = layout->pot_index(cell_from(pj.at("cell")));
    if (idx < 0) throw std::invalid_argument("pot entry does not name a pot cell");
    PotState& pot = s.pots[static_cast<std::size_t>(idx)];
    pot.onions = pj.at("onions").get<std::uint8_t>();
    pot.tomatoes = pj.at("tomatoes").get<std::uint8_t>();
    pot.cook_timer = pj.at("cook_timer").get<int>();
    pot.done = pj.at("done").get<bool>();
  }
  for (const auto& cj : j.at("counters")) {
    const Cell c = cell_from(cj.at("cell"));
    if (!layout->in_bounds(c) || layout->tile(c) != TileKind::counter)
      throw std::invalid_argument("counter entry does not name a counter cell");
    s.counter_at(c) = object_from_json(cj.at("object"));
  }
  return s;
}

json to_json(const Event& e) {
  return json{{"kind", std::string(to_string(e.kind))},
              {"actor", e.actor},
              {"cell", cell_json(e.cell)},
              {"object", to_json(e.object)}};
}

Event event_from_json(const json& j) {
  return Event{event_kind_from_string(j.at("kind").get<std::string>()), j.at("actor").get<int>(),
               cell_from(j.at("cell")), object_from_json(j.at("object"))};
}

}  // namespace influence
