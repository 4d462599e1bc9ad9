#pragma once

#include <deque>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "influence/latent/latent.hpp"

namespace influence {

// A controller for one player slot. `act` is called exactly once per tick
// and `observe` after each step with that step's events.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string algo() const = 0;
  virtual void reset(const GameState& initial) = 0;
  virtual Action act(const GameState& s) = 0;
  virtual void observe(const std::vector<Event>&, const GameState&) {}
  // Current belief over the partner's strategy, for latent agents.
  virtual std::optional<LatentBelief> belief() const { return std::nullopt; }
  virtual std::unique_ptr<Agent> clone() const = 0;
  // Agents with their own randomness take a per-episode seed here.
  virtual void reseed(std::uint64_t) {}

  int pid = 0;
};

class StayAgent final : public Agent {
 public:
  std::string algo() const override { return "stay"; }
  void reset(const GameState&) override {}
  Action act(const GameState&) override { return Action::stay; }
  std::unique_ptr<Agent> clone() const override { return std::make_unique<StayAgent>(*this); }
};

class ScriptedAgent final : public Agent {
 public:
  ScriptedAgent(PartnerSpec spec, std::uint64_t seed) : spec_(spec), seed_(seed) {}
  std::string algo() const override { return "scripted"; }
  void reset(const GameState& initial) override;
  Action act(const GameState& s) override;
  void observe(const std::vector<Event>& events, const GameState& next) override;
  std::unique_ptr<Agent> clone() const override { return std::make_unique<ScriptedAgent>(*this); }
  void reseed(std::uint64_t seed) override { seed_ = seed; }
  const PartnerSpec& spec() const { return spec_; }
  const PartnerState& state() const { return *state_; }

 private:
  PartnerSpec spec_;
  std::uint64_t seed_;
  std::optional<PartnerState> state_;
};

enum class Algo { cql, bc, filtered_bc, latent_cql, memory_cql, offline_lili };
std::string_view to_string(Algo a);
Algo algo_from_string(std::string_view s);
bool uses_latent(Algo a);

// Everything a trained policy needs at deployment.
struct PolicyBundle {
  Algo algo = Algo::cql;
  QFunction q;
  std::optional<LatentModel> latent;
  int memory_window = 0;
};

class PolicyAgent final : public Agent {
 public:
  explicit PolicyAgent(std::shared_ptr<const PolicyBundle> policy) : policy_(std::move(policy)) {}
  std::string algo() const override { return std::string(to_string(policy_->algo)); }
  void reset(const GameState& initial) override;
  Action act(const GameState& s) override;
  std::optional<LatentBelief> belief() const override { return belief_; }
  std::unique_ptr<Agent> clone() const override { return std::make_unique<PolicyAgent>(*this); }
  const PolicyBundle& policy() const { return *policy_; }

 private:
  History current_history() const;

  std::shared_ptr<const PolicyBundle> policy_;
  std::deque<HistoryStep> past_;  // most recent last
  LiliState lili_;
  std::optional<LatentBelief> belief_;
};

struct AlgoConfig {
  TrainConfig train;
  LatentConfig latent;
  int filter_k = 10;
  int memory_window = kHistoryWindow;
  // KL weight of the encoder used by offline-lili.
  double lili_beta = 0.0;
};

nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});
nlohmann::json to_json(const LatentConfig& c);
LatentConfig latent_config_from_json(const nlohmann::json& j, LatentConfig base = {});
nlohmann::json to_json(const AlgoConfig& c);
AlgoConfig algo_config_from_json(const nlohmann::json& j, AlgoConfig base = {});

struct TrainLogs {
  TrainingCurve q_curve;
  std::vector<LatentIterationLog> latent_log;
};

// Runs the full training recipe of one algorithm on a dataset. Latent
// algorithms train the encoder first unless `pretrained` is supplied.
PolicyBundle train_policy(Algo algo, const Dataset& d, const AlgoConfig& cfg, TrainLogs* logs = nullptr,
                          const std::optional<LatentModel>& pretrained = std::nullopt);

nn::Checkpoint to_checkpoint(const PolicyBundle& p, const nlohmann::json& extra_meta = {});
PolicyBundle policy_from_checkpoint(const nn::Checkpoint& ck);
void save_policy(const PolicyBundle& p, const std::filesystem::path& path, const nlohmann::json& extra_meta = {});
PolicyBundle load_policy(const std::filesystem::path& path);

std::unique_ptr<Agent> make_agent(std::shared_ptr<const PolicyBundle> policy);

}  // namespace influence
