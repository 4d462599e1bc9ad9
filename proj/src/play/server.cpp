#include "influence/play/server.hpp"

#include <chrono>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "influence/play/session.hpp"

namespace influence::play {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace ws = beast::websocket;
using tcp = asio::ip::tcp;
using nlohmann::json;

ServerOptions options_from_env(ServerOptions o) {
  if (const char* v = std::getenv("INFLUENCE_BIND")) o.address = v;
  if (const char* v = std::getenv("INFLUENCE_PORT")) o.port = static_cast<unsigned short>(std::stoi(v));
  if (const char* v = std::getenv("INFLUENCE_CHECKPOINT_DIR")) o.checkpoint_dir = v;
  if (const char* v = std::getenv("INFLUENCE_STATIC_DIR")) o.static_dir = v;
  return o;
}

namespace {

class Connection;

// Drives the tick timer of one session and forwards messages to its socket.
class Runner : public std::enable_shared_from_this<Runner> {
 public:
  Runner(asio::io_context& io, SessionManager& mgr, std::string id, int tick_ms)
      : timer_(io), mgr_(mgr), id_(std::move(id)), period_(tick_ms) {}

  void attach(const std::shared_ptr<Connection>& c);
  void detach(const Connection* c);
  void on_message(const std::string& text);

 private:
  void send(const WireMessage& m);
  void arm();
  void on_timer();

  asio::steady_timer timer_;
  SessionManager& mgr_;
  std::string id_;
  std::chrono::milliseconds period_;
  std::weak_ptr<Connection> conn_;
  bool armed_ = false;
};

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  explicit Connection(tcp::socket s) : ws_(std::move(s)) {}

  template <class Req>
  void accept(Req req, std::shared_ptr<Runner> runner) {
    runner_ = std::move(runner);
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->runner_->attach(self);
      self->read();
    });
  }

  void send(std::string text) {
    queue_.push_back(std::move(text));
    if (queue_.size() == 1) write();
  }

  void close() {
    ws_.async_close(ws::close_code::going_away, [self = shared_from_this()](beast::error_code) {});
  }

 private:
  void read() {
    ws_.async_read(buf_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->runner_->detach(self.get());
        return;
      }
      const std::string text = beast::buffers_to_string(self->buf_.data());
      self->buf_.consume(self->buf_.size());
      self->runner_->on_message(text);
      self->read();
    });
  }

  void write() {
    ws_.text(true);
    ws_.async_write(asio::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return;
      self->queue_.pop_front();
      if (!self->queue_.empty()) self->write();
    });
  }

  ws::stream<tcp::socket> ws_;
  beast::flat_buffer buf_;
  std::deque<std::string> queue_;
  std::shared_ptr<Runner> runner_;
};

void Runner::attach(const std::shared_ptr<Connection>& c) {
  if (auto old = conn_.lock(); old && old != c) old->close();
  conn_ = c;
}

void Runner::detach(const Connection* c) {
  if (conn_.lock().get() == c) conn_.reset();
}

void Runner::send(const WireMessage& m) {
  if (auto c = conn_.lock()) c->send(encode(m));
}

void Runner::on_message(const std::string& text) {
  std::vector<WireMessage> replies;
  try {
    const WireMessage m = decode(text);
    replies = mgr_.with_session(id_, [&](Session& s) { return s.handle(m); });
  } catch (const WireError& e) {
    replies.push_back(WireMessage::make_error("bad_message", e.what(), id_));
  } catch (const SessionError& e) {
    replies.push_back(WireMessage::make_error(e.code(), e.what(), id_));
  }
  for (const auto& r : replies) send(r);
  arm();
}

void Runner::arm() {
  if (armed_) return;
  const bool live = mgr_.with_session(id_, [](Session& s) { return s.status() == SessionStatus::running; });
  if (!live) return;
  armed_ = true;
  timer_.expires_after(period_);
  timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
    self->armed_ = false;
    if (!ec) self->on_timer();
  });
}

void Runner::on_timer() {
  std::optional<WireMessage> out;
  try {
    out = mgr_.with_session(id_, [](Session& s) -> std::optional<WireMessage> {
      if (s.status() != SessionStatus::running || s.paused()) return std::nullopt;
      return s.tick();
    });
  } catch (const SessionError& e) {
    send(WireMessage::make_error(e.code(), e.what(), id_));
    return;
  }
  if (out) send(*out);
  arm();
}

http::response<http::string_body> reply(const http::request<http::string_body>& req, http::status status,
                                        std::string body, std::string_view type = "application/json") {
  http::response<http::string_body> res{status, req.version()};
  res.set(http::field::server, "influence-play");
  res.set(http::field::content_type, std::string(type));
  res.set(http::field::access_control_allow_origin, "*");
  res.keep_alive(req.keep_alive());
  res.body() = std::move(body);
  res.prepare_payload();
  return res;
}

http::response<http::string_body> error_reply(const http::request<http::string_body>& req, http::status status,
                                              const std::string& code, const std::string& text) {
  return reply(req, status, json{{"code", code}, {"text", text}}.dump());
}

http::status status_for(const std::string& code) {
  if (code == "unknown_session" || code == "unknown_checkpoint") return http::status::not_found;
  return http::status::bad_request;
}

std::string_view mime_for(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".html") return "text/html";
  if (ext == ".js") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  return "application/octet-stream";
}

}  // namespace

struct Server::Impl {
  explicit Impl(ServerOptions o)
      : opts(std::move(o)), acceptor(io), manager(opts.checkpoint_dir, opts.id_seed) {
    const tcp::endpoint ep(asio::ip::make_address(opts.address), opts.port);
    acceptor.open(ep.protocol());
    acceptor.set_option(asio::socket_base::reuse_address(true));
    acceptor.bind(ep);
    acceptor.listen();
  }

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket sock) {
      if (ec) return;
      serve(std::make_shared<tcp::socket>(std::move(sock)));
      accept();
    });
  }

  void serve(std::shared_ptr<tcp::socket> sock) {
    auto buf = std::make_shared<beast::flat_buffer>();
    auto req = std::make_shared<http::request<http::string_body>>();
    http::async_read(*sock, *buf, *req, [this, sock, buf, req](beast::error_code ec, std::size_t) {
      if (ec) return;
      if (ws::is_upgrade(*req)) {
        upgrade(sock, *req);
        return;
      }
      auto res = std::make_shared<http::response<http::string_body>>(route(*req));
      http::async_write(*sock, *res, [this, sock, res](beast::error_code wec, std::size_t) {
        if (wec) return;
        if (res->keep_alive())
          serve(sock);
        else
          sock->shutdown(tcp::socket::shutdown_send, wec);
      });
    });
  }

  void upgrade(const std::shared_ptr<tcp::socket>& sock, const http::request<http::string_body>& req) {
    const std::string target(req.target());
    const std::string prefix = "/ws/sessions/";
    if (target.rfind(prefix, 0) != 0) return;
    const std::string id = target.substr(prefix.size());
    if (!manager.contains(id)) return;
    auto& runner = runners[id];
    if (!runner) {
      const int tick_ms = manager.with_session(id, [](Session& s) { return s.config().tick_ms; });
      runner = std::make_shared<Runner>(io, manager, id, tick_ms);
    }
    std::make_shared<Connection>(std::move(*sock))->accept(req, runner);
  }

  http::response<http::string_body> route(const http::request<http::string_body>& req) {
    const std::string target(req.target());
    const auto q = target.find('?');
    const std::string path = target.substr(0, q);
    const std::string query = q == std::string::npos ? "" : target.substr(q + 1);
    try {
      if (req.method() == http::verb::get && path == "/api/health") return reply(req, http::status::ok, "{\"ok\":true}");
      if (req.method() == http::verb::get && path == "/api/checkpoints") {
        json arr = json::array();
        for (const auto& c : list_checkpoints(manager.checkpoint_dir()))
          arr.push_back({{"name", c.name}, {"algo", c.algo}, {"bytes", c.bytes}, {"meta", c.meta}});
        return reply(req, http::status::ok, arr.dump());
      }
      if (req.method() == http::verb::post && path == "/api/sessions") {
        json body;
        try {
          body = json::parse(req.body());
        } catch (const json::parse_error& e) {
          return error_reply(req, http::status::bad_request, "bad_config", e.what());
        }
        const SessionConfig cfg = session_config_from_json(body);
        const std::string id = manager.create_session(cfg);
        return reply(req, http::status::created,
                     json{{"session_id", id},
                          {"socket", "/ws/sessions/" + id},
                          {"tick_ms", cfg.tick_ms},
                          {"horizon", cfg.horizon},
                          {"protocol_version", kWireVersion}}
                         .dump());
      }
      const std::string sp = "/api/sessions/";
      if (req.method() == http::verb::get && path.rfind(sp, 0) == 0 && path.size() > sp.size() + 7 &&
          path.compare(path.size() - 7, 7, "/export") == 0) {
        const std::string id = path.substr(sp.size(), path.size() - sp.size() - 7);
        const Dataset d = manager.with_session(id, [](Session& s) { return s.export_episode(); });
        if (query.find("format=binary") != std::string::npos)
          return reply(req, http::status::ok, serialize_dataset(d), "application/octet-stream");
        return reply(req, http::status::ok, to_json(d).dump());
      }
      if (req.method() == http::verb::get && !opts.static_dir.empty()) return serve_static(req, path);
      return error_reply(req, http::status::not_found, "not_found", "no route for " + path);
    } catch (const SessionError& e) {
      return error_reply(req, status_for(e.code()), e.code(), e.what());
    } catch (const std::exception& e) {
      return error_reply(req, http::status::internal_server_error, "internal", e.what());
    }
  }

  http::response<http::string_body> serve_static(const http::request<http::string_body>& req, std::string path) {
    if (path == "/") path = "/index.html";
    if (path.find("..") != std::string::npos)
      return error_reply(req, http::status::bad_request, "bad_path", "path escapes the static root");
    const auto file = opts.static_dir / path.substr(1);
    std::ifstream in(file, std::ios::binary);
    if (!in) return error_reply(req, http::status::not_found, "not_found", path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return reply(req, http::status::ok, ss.str(), mime_for(file));
  }

  ServerOptions opts;
  asio::io_context io;
  tcp::acceptor acceptor;
  SessionManager manager;
  std::map<std::string, std::shared_ptr<Runner>> runners;
};

Server::Server(ServerOptions opts) : impl_(std::make_unique<Impl>(std::move(opts))) {}
Server::~Server() = default;

unsigned short Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::run() {
  impl_->accept();
  impl_->io.run();
}

void Server::stop() { asio::post(impl_->io, [this] { impl_->io.stop(); }); }

}  // namespace influence::play
