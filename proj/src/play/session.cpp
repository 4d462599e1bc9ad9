#include "influence/play/session.hpp"

#include <algorithm>
#include <cstdio>

#include "influence/env/json.hpp"

namespace influence::play {

using nlohmann::json;

std::string_view to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::lobby:
      return "lobby";
    case SessionStatus::running:
      return "running";
    case SessionStatus::finished:
      return "finished";
  }
  return "?";
}

json to_json(const SessionConfig& c) {
  json j{{"layout", c.layout},       {"reward", to_json(c.reward)}, {"cook_time", c.env.cook_time},
         {"checkpoint", c.checkpoint}, {"horizon", c.horizon},      {"tick_ms", c.tick_ms},
         {"seed", c.seed}};
  if (!c.layout_text.empty()) j["layout_text"] = c.layout_text;
  return j;
}

SessionConfig session_config_from_json(const json& j) {
  try {
    SessionConfig c;
    c.layout = j.value("layout", c.layout);
    c.layout_text = j.value("layout_text", std::string());
    if (j.contains("reward")) c.reward = reward_spec_from_json(j.at("reward"));
    c.env.cook_time = j.value("cook_time", c.env.cook_time);
    c.checkpoint = j.at("checkpoint").get<std::string>();
    c.horizon = j.value("horizon", c.horizon);
    c.tick_ms = j.value("tick_ms", c.tick_ms);
    c.seed = j.value("seed", c.seed);
    return c;
  } catch (const std::exception& e) {
    throw SessionError("bad_config", e.what());
  }
}

Session::Session(std::string id, SessionConfig cfg, std::unique_ptr<Agent> agent)
    : id_(std::move(id)), cfg_(std::move(cfg)), agent_(std::move(agent)) {
  if (!agent_) throw SessionError("bad_config", "session needs an agent");
  if (cfg_.horizon < 1) throw SessionError("bad_config", "horizon must be positive");
  if (cfg_.tick_ms < 1) throw SessionError("bad_config", "tick_ms must be positive");
  try {
    layout_ = cfg_.layout_text.empty() ? builtin_layout(cfg_.layout) : parse_layout(cfg_.layout_text, cfg_.layout);
  } catch (const std::exception& e) {
    throw SessionError("bad_config", e.what());
  }
  agent_->pid = kAgentSlot;
  begin_episode();
}

void Session::begin_episode() {
  const std::uint64_t seed = derive_seed(cfg_.seed, static_cast<std::uint64_t>(episode_));
  state_ = reset(layout_, cfg_.reward, cfg_.horizon, seed, cfg_.env);
  agent_->reseed(derive_seed(seed, 0));
  agent_->reset(state_);
  pending_.reset();
  stats_ = SessionStats{};
  states_.assign(1, state_);
  agent_actions_.clear();
  human_actions_.clear();
  events_.clear();
}

WireMessage Session::join() {
  if (status_ == SessionStatus::lobby) status_ = SessionStatus::running;
  return snapshot();
}

bool Session::submit_action(Action a, int tick) {
  if (status_ != SessionStatus::running) throw SessionError("not_running", "session is not running");
  if (tick < state_.timestep) {
    ++stats_.late_actions;
    return false;
  }
  if (tick > state_.timestep) {
    ++stats_.early_actions;
    return false;
  }
  if (pending_) ++stats_.replaced_actions;
  pending_ = a;
  return true;
}

void Session::set_paused(bool p) {
  if (status_ != SessionStatus::running) throw SessionError("not_running", "session is not running");
  paused_ = p;
}

WireMessage Session::restart() {
  ++episode_;
  paused_ = false;
  begin_episode();
  status_ = SessionStatus::running;
  return snapshot();
}

WireMessage Session::tick() {
  if (status_ != SessionStatus::running) throw SessionError("not_running", "session is not running");
  if (paused_) throw SessionError("paused", "session is paused");
  const Action human = pending_.value_or(Action::stay);
  if (pending_)
    ++stats_.applied_actions;
  else
    ++stats_.idle_ticks;
  pending_.reset();

  const Action mine = agent_->act(state_);
  StepResult out = step(state_, mine, human);
  agent_->observe(out.events, out.state);
  agent_actions_.push_back(mine);
  human_actions_.push_back(human);
  events_.push_back(std::move(out.events));
  state_ = std::move(out.state);
  states_.push_back(state_);
  ++stats_.ticks;

  if (!state_.finished()) return snapshot();
  status_ = SessionStatus::finished;
  WireMessage m;
  m.type = WireType::episode_end;
  m.session = id_;
  m.tick = state_.timestep;
  m.summary = json{{"score", state_.score},
                   {"ticks", stats_.ticks},
                   {"episode", episode_},
                   {"applied_actions", stats_.applied_actions},
                   {"idle_ticks", stats_.idle_ticks},
                   {"late_actions", stats_.late_actions}};
  return m;
}

std::vector<WireMessage> Session::handle(const WireMessage& m) {
  if (!m.session.empty() && m.session != id_)
    return {WireMessage::make_error("wrong_session", "message addressed to session " + m.session, id_)};
  try {
    switch (m.type) {
      case WireType::join:
        return {join()};
      case WireType::action:
        if (!submit_action(m.action, m.tick) && m.tick > state_.timestep)
          return {WireMessage::make_error("bad_tick", "action stamped with a future tick", id_)};
        return {};
      case WireType::pause:
        set_paused(!paused_);
        return {snapshot()};
      case WireType::restart:
        return {restart()};
      default:
        return {WireMessage::make_error("bad_type", "server-only message type from client", id_)};
    }
  } catch (const SessionError& e) {
    return {WireMessage::make_error(e.code(), e.what(), id_)};
  }
}

WireMessage Session::snapshot() const {
  WireMessage m;
  m.type = WireType::state_snapshot;
  m.session = id_;
  m.tick = state_.timestep;
  m.state = state_;
  m.score = state_.score;
  m.remaining = state_.horizon - state_.timestep;
  AgentView v;
  v.algo = agent_->algo();
  if (const auto b = agent_->belief()) {
    v.has_belief = true;
    v.belief_mean.assign(b->mean.data(), b->mean.data() + b->mean.size());
    for (Eigen::Index i = 0; i < b->logvar.size(); ++i) v.belief_variance.push_back(std::exp(b->logvar[i]));
  }
  m.agent = std::move(v);
  return m;
}

Dataset Session::export_episode() const {
  Dataset d;
  d.meta.layout_name = layout_->name();
  d.meta.layout_text = serialize_layout(*layout_);
  d.meta.reward_spec = cfg_.reward;
  d.meta.horizon = cfg_.horizon;
  d.meta.seed = states_.front().seed;
  d.meta.notes = json{{"source", "play_service"},
                      {"session", id_},
                      {"episode_index", episode_},
                      {"partner", "human"},
                      {"human_slot", kHumanSlot},
                      {"agent_algo", agent_->algo()},
                      {"checkpoint", cfg_.checkpoint},
                      {"tick_ms", cfg_.tick_ms},
                      {"status", std::string(to_string(status_))},
                      {"late_actions", stats_.late_actions},
                      {"idle_ticks", stats_.idle_ticks}};
  Episode ep = episode_from_stream(states_, agent_actions_, human_actions_, events_, kAgentSlot);
  ep.seed = d.meta.seed;
  d.episodes.push_back(std::move(ep));
  return d;
}

std::vector<CheckpointInfo> list_checkpoints(const std::filesystem::path& dir) {
  std::vector<CheckpointInfo> out;
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".ckpt") continue;
    try {
      const nn::Checkpoint ck = nn::load_checkpoint(entry.path());
      out.push_back(CheckpointInfo{entry.path().filename().string(), ck.meta.value("algo", std::string()),
                                   entry.file_size(), ck.meta});
    } catch (const std::exception&) {
      continue;
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  return out;
}

SessionManager::SessionManager(std::filesystem::path checkpoint_dir, std::uint64_t id_seed)
    : dir_(std::move(checkpoint_dir)), id_seed_(id_seed) {}

std::unique_ptr<Agent> SessionManager::load(const std::string& checkpoint) const {
  if (checkpoint == "stay") return std::make_unique<StayAgent>();
  const std::filesystem::path rel(checkpoint);
  if (checkpoint.empty() || rel.is_absolute() || rel.filename() != rel)
    throw SessionError("unknown_checkpoint", "checkpoint must be a file name inside the checkpoint directory");
  const auto path = dir_ / rel;
  if (!std::filesystem::is_regular_file(path))
    throw SessionError("unknown_checkpoint", "no checkpoint named " + checkpoint);
  try {
    return make_agent(std::make_shared<const PolicyBundle>(load_policy(path)));
  } catch (const std::exception& e) {
    throw SessionError("bad_checkpoint", checkpoint + ": " + e.what());
  }
}

std::string SessionManager::create_session(const SessionConfig& cfg) {
  auto agent = load(cfg.checkpoint);
  std::lock_guard lock(mutex_);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(derive_seed(id_seed_, next_++)));
  std::string id(buf);
  sessions_.emplace(id, std::make_shared<Slot>(Session(id, cfg, std::move(agent))));
  return id;
}

std::shared_ptr<SessionManager::Slot> SessionManager::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw SessionError("unknown_session", "no session " + id);
  return it->second;
}

bool SessionManager::contains(const std::string& id) const {
  std::lock_guard lock(mutex_);
  return sessions_.count(id) > 0;
}

std::vector<std::string> SessionManager::ids() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& kv : sessions_) out.push_back(kv.first);
  return out;
}

bool SessionManager::remove(const std::string& id) {
  std::lock_guard lock(mutex_);
  return sessions_.erase(id) > 0;
}

std::vector<std::string> replay_transcript(Session& session, const json& transcript) {
  struct Entry {
    int before_tick;
    WireMessage message;
  };
  std::vector<Entry> entries;
  for (const auto& e : transcript) entries.push_back({e.at("before_tick").get<int>(), wire_from_json(e.at("message"))});
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.before_tick < b.before_tick; });

  std::vector<std::string> out;
  std::size_t next = 0;
  auto deliver = [&](const Entry& e) {
    for (const auto& reply : session.handle(e.message)) out.push_back(encode(reply));
  };
  while (true) {
    while (next < entries.size() && entries[next].before_tick <= session.state().timestep) deliver(entries[next++]);
    if (session.status() == SessionStatus::running && !session.paused()) {
      out.push_back(encode(session.tick()));
      continue;
    }
    if (next == entries.size()) break;
    deliver(entries[next++]);
  }
  return out;
}

}  // namespace influence::play
