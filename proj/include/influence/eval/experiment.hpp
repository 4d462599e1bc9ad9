#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "influence/eval/rollout.hpp"

namespace influence {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// How the ego player is controlled: a trained checkpoint, a scripted
// controller, or the do-nothing baseline.
struct AgentRef {
  std::string name;                    // report label; defaults to the algo
  std::string algo;                    // an Algo name, "scripted" or "stay"
  std::filesystem::path checkpoint;    // for trained algos
  std::optional<PartnerSpec> scripted; // for "scripted"

  std::string label() const { return name.empty() ? algo : name; }
};

struct PartnerRef {
  std::string id;
  PartnerSpec spec;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::string layout = "asymmetric_advantages";  // builtin name
  std::string layout_text;                       // overrides `layout` when set
  RewardSpec reward;
  EnvConfig env;
  AgentRef agent;
  PartnerRef partner;
  int n_rollouts = 30;
  int horizon = kDefaultHorizon;
  std::uint64_t seed = 0;
  std::filesystem::path output;  // stem for <output>.csv / <output>.json; empty = no files
  bool keep_records = false;

  LayoutPtr resolve_layout() const;
  void validate() const;
};

nlohmann::json to_json(const AgentRef& a);
AgentRef agent_ref_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct RolloutRow {
  int index = 0;
  std::uint64_t seed = 0;
  int total = 0;
  double improvement = 0.0;
  bool partner_flipped = false;
};

struct ExperimentReport {
  std::string name;
  std::string agent;
  std::string partner_id;
  std::string layout;
  std::vector<RolloutRow> rows;
  SampleStats reward;
  SampleStats improvement;
  double flip_rate = 0.0;
  // Rollouts that scored while the partner's logged preference had
  // switched away from its starting ingredient.
  double influence_success_rate = 0.0;
  std::vector<std::string> warnings;
  std::vector<RolloutRecord> records;  // filled when keep_records is set

  nlohmann::json to_json() const;
  void write_csv(const std::filesystem::path& path) const;
};

// Seed of rollout i: derive_seed(fnv1a(master, layout, algo), i).
std::uint64_t rollout_seed(std::uint64_t master, std::string_view layout, std::string_view algo, int index);

std::unique_ptr<Agent> load_agent(const AgentRef& ref, std::uint64_t seed);

// Rollouts run in parallel on clones of `prototype`; aggregation is in
// index order so the report does not depend on the thread count.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const Agent& prototype);
ExperimentReport run_experiment(const ExperimentConfig& cfg);

struct SuiteCheck {
  enum class Kind { ordering, dominates, parity, positive_improvement, zero_improvement };
  Kind kind = Kind::ordering;
  std::string partner;
  std::vector<std::string> agents;  // ordering: best first; dominates: winners
  std::string baseline;             // dominates: the agent every winner must beat
  double tolerance = 0.15;          // parity: allowed gap as a fraction of the best mean
};

struct SuiteConfig {
  std::string name = "suite";
  std::string layout = "asymmetric_advantages";
  std::string layout_text;
  RewardSpec reward;
  EnvConfig env;
  int n_rollouts = 30;
  int horizon = kDefaultHorizon;
  std::uint64_t master_seed = 0;
  std::vector<AgentRef> agents;
  std::vector<PartnerRef> partners;
  std::vector<SuiteCheck> checks;
  std::filesystem::path output;

  void validate() const;
};

SuiteConfig suite_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SuiteConfig& s);
SuiteConfig load_suite_config(const std::filesystem::path& path);

struct CheckResult {
  std::string description;
  bool passed = false;
  std::string detail;
};

struct SuiteReport {
  std::string name;
  std::vector<ExperimentReport> cells;  // agents-major order
  std::vector<CheckResult> checks;

  const ExperimentReport& cell(std::string_view agent, std::string_view partner) const;
  bool all_passed() const;
  nlohmann::json to_json() const;
  void write_csv(const std::filesystem::path& path) const;
};

using AgentFactory = std::function<std::unique_ptr<Agent>(const AgentRef&)>;

SuiteReport run_suite(const SuiteConfig& cfg, const AgentFactory& factory = {});
CheckResult evaluate_check(const SuiteCheck& check, const SuiteReport& report);

}  // namespace influence
