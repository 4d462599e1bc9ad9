#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "influence/play/session.hpp"

using namespace influence;
using namespace influence::play;
using nlohmann::json;

namespace {

SessionConfig small_config(int horizon = 40) {
  SessionConfig c;
  c.checkpoint = "stay";
  c.horizon = horizon;
  c.tick_ms = 5;
  c.seed = 9;
  return c;
}

Session scripted_session(int horizon, std::string id = "s") {
  return Session(std::move(id), small_config(horizon),
                 std::make_unique<ScriptedAgent>(PartnerSpec::greedy(Preference::none, 0.1), 4));
}

// Plays the human seat with a scripted greedy cook, one action per tick.
int play_out(Session& s, std::uint64_t seed) {
  ScriptedAgent human(PartnerSpec::greedy(), seed);
  human.pid = kHumanSlot;
  human.reset(s.state());
  s.join();
  while (s.status() == SessionStatus::running) {
    REQUIRE(s.submit_action(human.act(s.state()), s.state().timestep));
    const int before = s.state().timestep;
    s.tick();
    REQUIRE(s.state().timestep == before + 1);
    human.observe({}, s.state());
  }
  return s.state().score;
}

}  // namespace

TEST_CASE("wire messages round-trip") {
  Session s = scripted_session(10);
  const WireMessage snap = s.join();
  CHECK(decode(encode(snap)).state == snap.state);
  CHECK(encode(decode(encode(snap))) == encode(snap));

  WireMessage act;
  act.type = WireType::action;
  act.session = "abc";
  act.tick = 7;
  act.action = Action::interact;
  const auto back = decode(encode(act));
  CHECK(back.type == WireType::action);
  CHECK(back.tick == 7);
  CHECK(back.action == Action::interact);
  CHECK(json::parse(encode(act)).at("v") == kWireVersion);

  CHECK_THROWS_AS(decode("not json"), WireError);
  CHECK_THROWS_AS(decode(R"({"type":"teleport"})"), WireError);
  CHECK_THROWS_AS(decode(R"({"v":2,"type":"join"})"), WireError);
  CHECK_THROWS_AS(decode(R"({"type":"action","tick":1,"action":"jump"})"), WireError);
  CHECK(client_to_server(WireType::pause));
  CHECK(!client_to_server(WireType::state_snapshot));
}

TEST_CASE("tick discipline") {
  Session s = scripted_session(20);
  CHECK_THROWS_AS(s.tick(), SessionError);
  s.join();
  CHECK(s.status() == SessionStatus::running);

  SUBCASE("no action means stay") {
    const auto before = s.state().players[kHumanSlot];
    s.tick();
    CHECK(s.stats().idle_ticks == 1);
    CHECK(s.state().players[kHumanSlot].position == before.position);
  }
  SUBCASE("late and early actions are dropped") {
    s.tick();
    CHECK(!s.submit_action(Action::left, 0));
    CHECK(!s.submit_action(Action::left, 5));
    CHECK(s.stats().late_actions == 1);
    CHECK(s.stats().early_actions == 1);
    s.tick();
    CHECK(s.stats().idle_ticks == 2);
    CHECK(s.stats().applied_actions == 0);
  }
  SUBCASE("the last action for a tick wins") {
    CHECK(s.submit_action(Action::up, 0));
    CHECK(s.submit_action(Action::stay, 0));
    const auto before = s.state().players[kHumanSlot];
    s.tick();
    CHECK(s.stats().replaced_actions == 1);
    CHECK(s.state().players[kHumanSlot].position == before.position);
  }
  SUBCASE("pause stops the clock") {
    s.set_paused(true);
    CHECK_THROWS_AS(s.tick(), SessionError);
    WireMessage p;
    p.type = WireType::pause;
    s.handle(p);
    CHECK(!s.paused());
  }
  SUBCASE("the episode ends at the horizon") {
    WireMessage last;
    for (int t = 0; t < 20; ++t) last = s.tick();
    CHECK(last.type == WireType::episode_end);
    CHECK(last.summary.at("ticks") == 20);
    CHECK(s.status() == SessionStatus::finished);
    CHECK_THROWS_AS(s.tick(), SessionError);
    CHECK(s.restart().tick == 0);
    CHECK(s.episode_index() == 1);
  }
}

TEST_CASE("handle reports errors as messages") {
  Session s = scripted_session(20, "mine");
  WireMessage m;
  m.type = WireType::join;
  m.session = "theirs";
  CHECK(s.handle(m).at(0).code == "wrong_session");
  m.session = "mine";
  m.type = WireType::state_snapshot;
  CHECK(s.handle(m).at(0).code == "bad_type");
  m.type = WireType::action;
  CHECK(s.handle(m).at(0).code == "not_running");
  m.type = WireType::join;
  CHECK(s.handle(m).at(0).type == WireType::state_snapshot);
  m.type = WireType::action;
  m.tick = 3;
  CHECK(s.handle(m).at(0).code == "bad_tick");
}

TEST_CASE("exported episodes replay to the same score") {
  Session s = scripted_session(400);
  const int score = play_out(s, 21);
  CHECK(score > 0);
  const Dataset d = s.export_episode();
  REQUIRE(d.episodes.size() == 1);
  const Episode& ep = d.episodes.front();
  CHECK(ep.transitions.size() == 400);
  CHECK(ep.total_reward() == score);

  GameState g = reset(parse_layout(d.meta.layout_text, d.meta.layout_name), d.meta.reward_spec, d.meta.horizon,
                      d.meta.seed);
  for (std::size_t t = 0; t < ep.transitions.size(); ++t)
    g = step(g, ep.transitions[t].a, partner_action(ep, static_cast<int>(t))).state;
  CHECK(g.score == score);
  CHECK(g == s.state());

  CHECK(deserialize_dataset(serialize_dataset(d)) == d);
  CHECK(d.meta.notes.at("partner") == "human");
}

TEST_CASE("transcripts replay byte for byte") {
  json transcript = json::array();
  transcript.push_back({{"before_tick", 0}, {"message", {{"type", "join"}}}});
  for (int t = 0; t < 60; t += 3)
    transcript.push_back(
        {{"before_tick", t}, {"message", {{"type", "action"}, {"tick", t}, {"action", t % 2 ? "left" : "up"}}}});
  transcript.push_back({{"before_tick", 10}, {"message", {{"type", "pause"}}}});
  transcript.push_back({{"before_tick", 10}, {"message", {{"type", "pause"}}}});
  transcript.push_back({{"before_tick", 20}, {"message", {{"type", "action"}, {"tick", 2}, {"action", "down"}}}});

  Session a = scripted_session(60), b = scripted_session(60);
  const auto x = replay_transcript(a, transcript);
  const auto y = replay_transcript(b, transcript);
  CHECK(x == y);
  CHECK(decode(x.back()).type == WireType::episode_end);
  CHECK(a.stats().late_actions == 1);
}

TEST_CASE("session manager") {
  const auto dir = std::filesystem::temp_directory_path() / "influence_play_ckpts";
  std::filesystem::create_directories(dir);
  SessionManager mgr(dir, 3);

  SUBCASE("bad checkpoints are rejected") {
    auto cfg = small_config();
    cfg.checkpoint = "missing.ckpt";
    CHECK_THROWS_AS(mgr.create_session(cfg), SessionError);
    cfg.checkpoint = "../escape.ckpt";
    CHECK_THROWS_AS(mgr.create_session(cfg), SessionError);
    std::ofstream(dir / "junk.ckpt") << "not a checkpoint";
    cfg.checkpoint = "junk.ckpt";
    try {
      mgr.create_session(cfg);
      FAIL("expected a SessionError");
    } catch (const SessionError& e) {
      CHECK(e.code() == "bad_checkpoint");
    }
    CHECK(list_checkpoints(dir).empty());
    CHECK_THROWS_AS(mgr.with_session("nope", [](Session&) { return 0; }), SessionError);
  }
  SUBCASE("sessions are isolated") {
    const auto a = mgr.create_session(small_config());
    const auto b = mgr.create_session(small_config());
    CHECK(a != b);
    mgr.with_session(a, [](Session& s) {
      s.join();
      s.submit_action(Action::up, 0);
      for (int i = 0; i < 5; ++i) s.tick();
      return 0;
    });
    mgr.with_session(b, [](Session& s) {
      CHECK(s.status() == SessionStatus::lobby);
      CHECK(s.state().timestep == 0);
      return 0;
    });
    CHECK(mgr.remove(a));
    CHECK(!mgr.contains(a));
    CHECK(mgr.contains(b));
  }
  SUBCASE("config json") {
    CHECK_THROWS_AS(session_config_from_json(json::object()), SessionError);
    const auto back = session_config_from_json(to_json(small_config()));
    CHECK(to_json(back) == to_json(small_config()));
  }
  std::filesystem::remove_all(dir);
}
