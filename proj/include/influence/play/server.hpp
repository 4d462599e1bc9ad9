#pragma once

#include <filesystem>
#include <memory>
#include <string>

namespace influence::play {

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;  // 0 picks a free port
  std::filesystem::path checkpoint_dir = "checkpoints";
  std::filesystem::path static_dir;  // optional web client bundle
  std::uint64_t id_seed = 0;
};

// Reads INFLUENCE_BIND, INFLUENCE_PORT, INFLUENCE_CHECKPOINT_DIR and
// INFLUENCE_STATIC_DIR on top of `base`.
ServerOptions options_from_env(ServerOptions base = {});

// HTTP + websocket front end for SessionManager.
//
//   POST /api/sessions                 body: SessionConfig JSON -> {"session_id", ...}
//   GET  /api/checkpoints              -> [{"name", "algo", "bytes", "meta"}]
//   GET  /api/sessions/<id>/export     -> dataset JSON (?format=binary for the dataset file)
//   GET  /ws/sessions/<id>             websocket upgrade; WireMessage JSON both ways
//
// All I/O and ticking runs on one event loop.
class Server {
 public:
  explicit Server(ServerOptions opts);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  unsigned short port() const;
  void run();   // blocks until stop()
  void stop();  // safe from any thread

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace influence::play
