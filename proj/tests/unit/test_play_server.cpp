#include <doctest.h>

#include <filesystem>
#include <thread>

#include "influence/play/server.hpp"
#include "influence/play/session.hpp"

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <httplib.h>

using namespace influence;
using namespace influence::play;
using nlohmann::json;

TEST_CASE("live server plays a full episode over the websocket") {
  namespace beast = boost::beast;
  namespace asio = boost::asio;
  ServerOptions opts;
  opts.port = 0;
  opts.checkpoint_dir = std::filesystem::temp_directory_path();
  Server server(opts);
  std::thread loop([&] { server.run(); });

  httplib::Client http("127.0.0.1", server.port());
  CHECK(http.Get("/api/health")->status == 200);
  CHECK(http.Get("/api/sessions/none/export")->status == 404);
  SessionConfig cfg;
  cfg.checkpoint = "stay";
  cfg.horizon = 120;
  cfg.tick_ms = 5;
  const auto created = http.Post("/api/sessions", to_json(cfg).dump(), "application/json");
  REQUIRE(created);
  REQUIRE(created->status == 201);
  const std::string id = json::parse(created->body).at("session_id");

  asio::io_context io;
  asio::ip::tcp::resolver resolver(io);
  beast::websocket::stream<asio::ip::tcp::socket> ws(io);
  asio::connect(ws.next_layer(), resolver.resolve("127.0.0.1", std::to_string(server.port())));
  ws.handshake("127.0.0.1", "/ws/sessions/" + id);

  ScriptedAgent human(PartnerSpec::greedy(), 5);
  human.pid = kHumanSlot;
  bool started = false;
  WireMessage join;
  join.type = WireType::join;
  ws.write(asio::buffer(encode(join)));
  int final_score = -1;
  while (final_score < 0) {
    beast::flat_buffer buf;
    ws.read(buf);
    const WireMessage m = decode(beast::buffers_to_string(buf.data()));
    REQUIRE(m.type != WireType::error);
    if (m.type == WireType::episode_end) {
      final_score = m.summary.at("score").get<int>();
      break;
    }
    if (!started) {
      human.reset(*m.state);
      started = true;
    } else {
      human.observe({}, *m.state);
    }
    WireMessage act;
    act.type = WireType::action;
    act.session = id;
    act.tick = m.tick;
    act.action = human.act(*m.state);
    ws.write(asio::buffer(encode(act)));
  }
  ws.close(beast::websocket::close_code::normal);

  const auto exported = http.Get(("/api/sessions/" + id + "/export?format=binary").c_str());
  REQUIRE(exported->status == 200);
  const Dataset d = deserialize_dataset(exported->body);
  CHECK(d.episodes.at(0).total_reward() == final_score);
  CHECK(d.episodes.at(0).transitions.size() == 120);

  server.stop();
  loop.join();
}
