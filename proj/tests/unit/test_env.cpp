#include <doctest.h>

#include <random>

#include "influence/env/features.hpp"
#include "influence/env/game.hpp"
#include "influence/env/infer.hpp"
#include "influence/env/json.hpp"

using namespace influence;

namespace {

constexpr const char* kTiny =
    "XXPXX\n"
    "O1 2S\n"
    "XDXTX\n"
    "XXXXX";

struct Runner {
  GameState s;
  std::vector<Event> events;
  int reward = 0;
  void go(Action a0, Action a1 = Action::stay) {
    auto r = step(s, a0, a1);
    events = r.events;
    reward = r.reward;
    s = std::move(r.state);
  }
  bool saw(EventKind k) const {
    for (const auto& e : events)
      if (e.kind == k) return true;
    return false;
  }
};

Runner tiny(RewardSpec spec = {}, int horizon = 400) { return Runner{reset(parse_layout(kTiny, "tiny"), spec, horizon, 7)}; }

// From the spawn at (1,1): fetch an onion and drop it into the pot at (2,0).
void carry_onion(Runner& r) {
  r.go(Action::left);
  r.go(Action::interact);
  r.go(Action::right);
  r.go(Action::up);
  r.go(Action::interact);
  r.go(Action::left);
}

}  // namespace

TEST_CASE("minimal grid parses with two spawns") {
  auto l = parse_layout(kTiny);
  CHECK(l->width() == 5);
  CHECK(l->height() == 4);
  CHECK(l->spawns()[0] == Cell{1, 1});
  CHECK(l->spawns()[1] == Cell{3, 1});
  CHECK(l->pots().size() == 1);
}

TEST_CASE("layout errors carry row and column") {
  CHECK_THROWS_AS(parse_layout("XXPX\nO1 2S\nXDXT\nXXXX"), LayoutError);
  try {
    parse_layout("XXPXX\nO1 2S\nXDXQX\nXXXXX");
    FAIL("expected LayoutError");
  } catch (const LayoutError& e) {
    CHECK(e.row() == 2);
    CHECK(e.col() == 3);
  }
  CHECK_THROWS_AS(parse_layout("XXXXX\nO1 2S\nXDXTX\nXXXXX"), LayoutError);  // no pot
  CHECK_THROWS_AS(parse_layout("XXPXX\nO1  S\nXDXTX\nXXXXX"), LayoutError);  // one spawn
}

TEST_CASE("registry round-trips through the canonical text") {
  const std::vector<std::string> expected{"asymmetric_advantages", "forced_coordination", "open_asymmetric_advantages",
                                          "counter_circuit"};
  auto names = layout_names();
  std::sort(names.begin(), names.end());
  auto sorted = expected;
  std::sort(sorted.begin(), sorted.end());
  CHECK(names == sorted);
  for (const auto& n : names) {
    const std::string text(layout_text(n));
    CHECK(serialize_layout(*parse_layout(text, n)) == canonical_layout_text(text));
  }
  CHECK(canonical_layout_text("XX\r\nXX  \n\n  \n") == "XX\nXX  ");
}

TEST_CASE("reset is deterministic and empty-handed") {
  auto a = reset(builtin_layout("counter_circuit"), RewardSpec{}, 400, 7);
  auto b = reset(builtin_layout("counter_circuit"), RewardSpec{}, 400, 7);
  CHECK(a == b);
  CHECK(a.timestep == 0);
  CHECK(a.players[0].held.empty());
  CHECK(a.players[1].held.empty());
  CHECK_THROWS(reset(builtin_layout("counter_circuit"), RewardSpec{}, 0, 7));
}

TEST_CASE("stay-stay only advances time and is pure") {
  Runner r = tiny();
  const GameState before = r.s;
  r.go(Action::stay, Action::stay);
  CHECK(r.s.timestep == 1);
  CHECK(r.s.players == before.players);
  CHECK(before.timestep == 0);
}

TEST_CASE("three onions cook for exactly cook_time ticks") {
  Runner r = tiny();
  carry_onion(r);
  carry_onion(r);
  r.go(Action::left);
  r.go(Action::interact);
  r.go(Action::right);
  r.go(Action::up);
  const int fill_tick = r.s.timestep;
  r.go(Action::interact);
  REQUIRE(r.saw(EventKind::cook_start));
  int done_tick = -1;
  while (done_tick < 0) {
    const int t = r.s.timestep;
    r.go(Action::stay);
    if (r.saw(EventKind::cook_done)) done_tick = t;
  }
  CHECK(done_tick == fill_tick + r.s.config.cook_time);
  CHECK(r.s.pots[0].done);
  CHECK(r.s.pots[0].onions == 3);
}

TEST_CASE("delivery rewards per variant") {
  auto deliver_soup = [](RewardSpec spec, int pid, Object soup) {
    Runner r = tiny(spec);
    r.s.players[static_cast<std::size_t>(pid)].position = {3, 1};
    r.s.players[static_cast<std::size_t>(1 - pid)].position = {1, 1};
    r.s.players[static_cast<std::size_t>(pid)].orientation = Direction::right;
    r.s.players[static_cast<std::size_t>(pid)].held = soup;
    r.go(pid == 0 ? Action::interact : Action::stay, pid == 1 ? Action::interact : Action::stay);
    REQUIRE(r.saw(EventKind::deliver));
    return r.reward;
  };
  const RewardSpec base;
  const auto tomato = RewardSpec::of(RewardVariant::tomato_bonus);
  const auto human = RewardSpec::of(RewardVariant::human_deliver);
  CHECK(deliver_soup(base, 0, Object::soup(3, 0)) == 20);
  CHECK(deliver_soup(tomato, 0, Object::soup(0, 3)) == 40);
  CHECK(deliver_soup(tomato, 0, Object::soup(1, 2)) == 20);
  CHECK(deliver_soup(human, 1, Object::soup(3, 0)) == 40);
  CHECK(deliver_soup(human, 0, Object::soup(3, 0)) == 20);
}

TEST_CASE("swapping and same-cell moves are blocked") {
  Runner r = tiny();
  r.s.players[1].position = {2, 1};
  r.go(Action::right, Action::left);
  CHECK(r.s.players[0].position == Cell{1, 1});
  CHECK(r.s.players[1].position == Cell{2, 1});
  int blocked = 0;
  for (const auto& e : r.events) blocked += e.kind == EventKind::blocked_move;
  CHECK(blocked == 2);

  Runner q = tiny();
  q.go(Action::right, Action::left);
  CHECK(q.s.players[0].position == Cell{1, 1});
  CHECK(q.s.players[1].position == Cell{3, 1});
  CHECK(q.saw(EventKind::blocked_move));
}

TEST_CASE("moving into a wall only turns") {
  Runner r = tiny();
  r.go(Action::down);
  CHECK(r.s.players[0].position == Cell{1, 1});
  CHECK(r.s.players[0].orientation == Direction::down);
}

TEST_CASE("stepping a finished episode throws") {
  Runner r = tiny({}, 2);
  r.go(Action::stay);
  r.go(Action::stay);
  CHECK(r.s.finished());
  CHECK_THROWS_AS(r.go(Action::stay), EpisodeFinished);
}

TEST_CASE("hand-computed features facing the onion source") {
  Runner r = tiny();
  r.go(Action::left);
  const FeatureVector f = featurize(r.s, 0);
  FeatureVector e{};
  auto off = [&](int at, int dc, int dr) {
    e[static_cast<std::size_t>(at)] = dc;
    e[static_cast<std::size_t>(at + 1)] = dr;
  };
  off(feature::other_player, 2, 0);
  off(feature::closest_onion, 99, 99);
  off(feature::closest_tomato, 99, 99);
  off(feature::closest_plate, 99, 99);
  off(feature::closest_soup, 99, 99);
  off(feature::onion_source, -1, 0);
  off(feature::tomato_source, 2, 1);
  off(feature::plate_dispenser, 0, 1);
  off(feature::delivery, 3, 0);
  off(feature::pot0, 1, -1);
  off(feature::pot1, 99, 99);
  e[feature::orientation + 2] = 1;      // left
  e[feature::other_orientation] = 1;    // up
  e[feature::adjacent_empty_counter] = 1;  // (1,0) above
  e[feature::position] = 1;
  e[feature::position + 1] = 1;
  for (int i = 0; i < kFeatureDim; ++i) CHECK_MESSAGE(f[static_cast<std::size_t>(i)] == e[static_cast<std::size_t>(i)], "entry " << i);
}

TEST_CASE("offsets are translation invariant") {
  const char* small = "XXPXX\nO1 2S\nXDXTX\nXXXXX";
  const char* shifted =
      "XXXXXX\n"
      "XXXPXX\n"
      "XO1 2S\n"
      "XXDXTX\n"
      "XXXXXX";
  auto a = reset(parse_layout(small), {}, 10, 1);
  auto b = reset(parse_layout(shifted), {}, 10, 1);
  const auto fa = featurize(a, 0), fb = featurize(b, 0);
  for (int i = 0; i < feature::pot0_status; ++i) CHECK(fa[static_cast<std::size_t>(i)] == fb[static_cast<std::size_t>(i)]);
  CHECK(fb[feature::position] == fa[feature::position] + 1);
}

TEST_CASE("partner action inference") {
  Runner r = tiny();
  r.s.players[1].position = {2, 1};
  const GameState s0 = r.s;
  r.go(Action::stay, Action::right);
  CHECK(infer_action_from_states(s0, r.s, 1) == Action::right);
  const GameState s1 = r.s;
  r.go(Action::stay, Action::stay);
  CHECK(infer_action_from_states(s1, r.s, 1) == Action::stay);
  // Pick up a plate resting on the counter below (2,1).
  Runner q = tiny();
  q.s.players[1].position = {2, 1};
  q.s.players[1].orientation = Direction::down;
  q.s.counter_at({2, 2}) = Object::make(ObjectKind::plate);
  const GameState before = q.s;
  q.go(Action::stay, Action::interact);
  CHECK(q.s.counter_at({2, 2}).empty());
  CHECK(infer_action_from_states(before, q.s, 1) == Action::interact);
}

TEST_CASE("property: random rollouts keep invariants and infer true actions") {
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> act(0, kNumActions - 1);
  for (const auto& name : layout_names()) {
    GameState s = reset(builtin_layout(name), RewardSpec::of(RewardVariant::tomato_bonus), 500, 3);
    int sum = 0;
    while (!s.finished()) {
      const Action a0 = action_at(act(rng)), a1 = action_at(act(rng));
      auto r = step(s, a0, a1);
      sum += r.reward;
      CHECK(r.state.players[0].position != r.state.players[1].position);
      for (const auto& p : r.state.pots) CHECK(p.size() <= kPotCapacity);
      const Action inferred = infer_action_from_states(s, r.state, 1);
      if (inferred != Action::stay) CHECK(inferred == a1);
      const GameState again = game_state_from_json(to_json(r.state));
      CHECK(again == r.state);
      s = std::move(r.state);
    }
    CHECK(sum == s.score);
  }
}
