#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "influence/data/dataset.hpp"
#include "influence/eval/agents.hpp"
#include "influence/play/wire.hpp"

namespace influence::play {

inline constexpr int kAgentSlot = 0;
inline constexpr int kHumanSlot = 1;
inline constexpr int kDefaultTickMs = 300;

enum class SessionStatus { lobby, running, finished };
std::string_view to_string(SessionStatus s);

struct SessionConfig {
  std::string layout = "asymmetric_advantages";
  std::string layout_text;
  RewardSpec reward;
  EnvConfig env;
  std::string checkpoint;  // file name inside the checkpoint directory, or "stay"
  int horizon = 400;
  int tick_ms = kDefaultTickMs;
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const SessionConfig& c);
SessionConfig session_config_from_json(const nlohmann::json& j);

struct SessionStats {
  int ticks = 0;
  int applied_actions = 0;
  int idle_ticks = 0;        // no human action arrived in time
  int late_actions = 0;      // stamped with an earlier tick, dropped
  int early_actions = 0;     // stamped with a future tick, dropped
  int replaced_actions = 0;  // superseded by a later action for the same tick
};

class SessionError : public std::runtime_error {
 public:
  SessionError(std::string code, const std::string& text) : std::runtime_error(text), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

// One human-vs-agent game. Not thread-safe; the owner serializes access.
class Session {
 public:
  Session(std::string id, SessionConfig cfg, std::unique_ptr<Agent> agent);

  const std::string& id() const { return id_; }
  const SessionConfig& config() const { return cfg_; }
  SessionStatus status() const { return status_; }
  bool paused() const { return paused_; }
  const GameState& state() const { return state_; }
  const SessionStats& stats() const { return stats_; }
  int episode_index() const { return episode_; }

  // Lobby to running. Joining a running session only re-sends the snapshot.
  WireMessage join();
  // Records the human action for `tick`. Returns false when it was dropped.
  bool submit_action(Action a, int tick);
  void set_paused(bool p);
  // Starts a fresh episode in the running state.
  WireMessage restart();

  // Advances one tick: the pending human action (stay if none), the agent's
  // action, one env step. Returns the new snapshot, or episode_end once the
  // horizon is reached.
  WireMessage tick();

  // Dispatches a client message and returns the replies to send.
  std::vector<WireMessage> handle(const WireMessage& m);

  WireMessage snapshot() const;
  Dataset export_episode() const;

 private:
  void begin_episode();

  std::string id_;
  SessionConfig cfg_;
  LayoutPtr layout_;
  std::unique_ptr<Agent> agent_;
  SessionStatus status_ = SessionStatus::lobby;
  bool paused_ = false;
  int episode_ = 0;
  GameState state_;
  std::optional<Action> pending_;
  SessionStats stats_;
  std::vector<GameState> states_;
  std::vector<Action> agent_actions_;
  std::vector<Action> human_actions_;
  std::vector<std::vector<Event>> events_;
};

struct CheckpointInfo {
  std::string name;
  std::string algo;
  std::uintmax_t bytes = 0;
  nlohmann::json meta;
};

std::vector<CheckpointInfo> list_checkpoints(const std::filesystem::path& dir);

// Owns all sessions. Each session sits behind its own mutex so sessions
// never share mutable state.
class SessionManager {
 public:
  explicit SessionManager(std::filesystem::path checkpoint_dir, std::uint64_t id_seed = 0);

  std::string create_session(const SessionConfig& cfg);
  template <class F>
  auto with_session(const std::string& id, F&& f) {
    auto slot = find(id);
    std::lock_guard lock(slot->mutex);
    return f(slot->session);
  }
  bool contains(const std::string& id) const;
  std::vector<std::string> ids() const;
  bool remove(const std::string& id);
  const std::filesystem::path& checkpoint_dir() const { return dir_; }

 private:
  struct Slot {
    explicit Slot(Session s) : session(std::move(s)) {}
    std::mutex mutex;
    Session session;
  };
  std::shared_ptr<Slot> find(const std::string& id) const;
  std::unique_ptr<Agent> load(const std::string& checkpoint) const;

  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
  std::uint64_t next_ = 0;
  std::uint64_t id_seed_;
};

// Feeds a recorded client transcript into a fresh session and returns every
// server message as encoded text. Transcript entries are
// {"before_tick": n, "message": {...}}; ticks run until the episode ends.
std::vector<std::string> replay_transcript(Session& session, const nlohmann::json& transcript);

}  // namespace influence::play
