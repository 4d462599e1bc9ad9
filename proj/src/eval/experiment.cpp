#include "influence/eval/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>

#include "influence/data/dataset.hpp"
#include "influence/env/json.hpp"

namespace influence {

using nlohmann::json;

namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw ConfigError(path.string() + " is empty");
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void resolve_relative(AgentRef& a, const std::filesystem::path& base) {
  if (!a.checkpoint.empty() && a.checkpoint.is_relative()) a.checkpoint = base / a.checkpoint;
}

LayoutPtr layout_of(const std::string& name, const std::string& text) {
  if (!text.empty()) return parse_layout(text, name);
  try {
    return builtin_layout(name);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

json partner_ref_json(const PartnerRef& p) { return json{{"id", p.id}, {"spec", to_json(p.spec)}}; }

PartnerRef partner_ref_from_json(const json& j) {
  PartnerRef p;
  p.spec = partner_spec_from_json(j.at("spec"));
  p.id = j.value("id", std::string(to_string(p.spec.kind)));
  return p;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

constexpr std::array<std::pair<SuiteCheck::Kind, std::string_view>, 5> kCheckNames{{
    {SuiteCheck::Kind::ordering, "ordering"},
    {SuiteCheck::Kind::dominates, "dominates"},
    {SuiteCheck::Kind::parity, "parity"},
    {SuiteCheck::Kind::positive_improvement, "positive_improvement"},
    {SuiteCheck::Kind::zero_improvement, "zero_improvement"},
}};

std::string_view check_name(SuiteCheck::Kind k) {
  for (const auto& [kind, name] : kCheckNames)
    if (kind == k) return name;
  return "?";
}

SuiteCheck::Kind check_kind(std::string_view s) {
  for (const auto& [kind, name] : kCheckNames)
    if (name == s) return kind;
  throw ConfigError("unknown check kind '" + std::string(s) + "'");
}

double pooled_se(const ExperimentReport& a, const ExperimentReport& b) {
  return std::sqrt(a.reward.se * a.reward.se + b.reward.se * b.reward.se);
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

}  // namespace

LayoutPtr ExperimentConfig::resolve_layout() const { return layout_of(layout, layout_text); }

void ExperimentConfig::validate() const {
  if (n_rollouts < 1) throw ConfigError("n_rollouts must be at least 1");
  if (horizon < kImprovementWindow) throw ConfigError("horizon must be at least 100 for the improvement metric");
  if (agent.algo.empty()) throw ConfigError("agent.algo is required");
  partner.spec.validate();
  resolve_layout();
}

json to_json(const AgentRef& a) {
  json j{{"algo", a.algo}};
  if (!a.name.empty()) j["name"] = a.name;
  if (!a.checkpoint.empty()) j["checkpoint"] = a.checkpoint.string();
  if (a.scripted) j["scripted"] = to_json(*a.scripted);
  return j;
}

AgentRef agent_ref_from_json(const json& j) {
  AgentRef a;
  a.algo = j.at("algo").get<std::string>();
  a.name = j.value("name", std::string());
  a.checkpoint = j.value("checkpoint", std::string());
  if (j.contains("scripted")) a.scripted = partner_spec_from_json(j.at("scripted"));
  if (a.algo == "scripted" && !a.scripted) throw ConfigError("scripted agent needs a 'scripted' partner spec");
  if (a.algo != "scripted" && a.algo != "stay") {
    algo_from_string(a.algo);
    if (a.checkpoint.empty()) throw ConfigError("agent '" + a.label() + "' needs a checkpoint");
  }
  return a;
}

json to_json(const ExperimentConfig& c) {
  json j{{"name", c.name},
         {"layout", c.layout},
         {"reward", to_json(c.reward)},
         {"env", {{"cook_time", c.env.cook_time}}},
         {"agent", to_json(c.agent)},
         {"partner", partner_ref_json(c.partner)},
         {"n_rollouts", c.n_rollouts},
         {"horizon", c.horizon},
         {"seed", c.seed},
         {"output", c.output.string()},
         {"keep_records", c.keep_records}};
  if (!c.layout_text.empty()) j["layout_text"] = c.layout_text;
  return j;
}

ExperimentConfig experiment_config_from_json(const json& j) {
  if (!j.is_object() || j.empty()) throw ConfigError("experiment config must be a non-empty object");
  try {
    ExperimentConfig c;
    c.name = j.value("name", c.name);
    c.layout = j.value("layout", c.layout);
    c.layout_text = j.value("layout_text", std::string());
    if (j.contains("reward")) c.reward = reward_spec_from_json(j.at("reward"));
    if (j.contains("env")) c.env.cook_time = j.at("env").value("cook_time", c.env.cook_time);
    c.agent = agent_ref_from_json(j.at("agent"));
    c.partner = partner_ref_from_json(j.at("partner"));
    c.n_rollouts = j.value("n_rollouts", c.n_rollouts);
    c.horizon = j.value("horizon", c.horizon);
    c.seed = j.value("seed", c.seed);
    c.output = j.value("output", std::string());
    c.keep_records = j.value("keep_records", false);
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  ExperimentConfig c = experiment_config_from_json(read_json_file(path));
  resolve_relative(c.agent, path.parent_path());
  return c;
}

json ExperimentReport::to_json() const {
  json j{{"name", name},
         {"agent", agent},
         {"partner_id", partner_id},
         {"layout", layout},
         {"n", reward.n},
         {"mean_reward", reward.mean},
         {"stdev_reward", reward.stdev},
         {"se_reward", reward.se},
         {"mean_improvement", improvement.mean},
         {"se_improvement", improvement.se},
         {"flip_rate", flip_rate},
         {"influence_success_rate", influence_success_rate},
         {"warnings", warnings}};
  auto& rs = j["rollouts"] = json::array();
  for (const auto& r : rows)
    rs.push_back({{"index", r.index},
                  {"seed", r.seed},
                  {"total", r.total},
                  {"improvement", r.improvement},
                  {"partner_flipped", r.partner_flipped}});
  return j;
}

void ExperimentReport::write_csv(const std::filesystem::path& path) const {
  std::ostringstream os;
  os << "index,seed,agent,partner_id,layout,total,improvement,partner_flipped\n";
  for (const auto& r : rows)
    os << r.index << ',' << r.seed << ',' << agent << ',' << partner_id << ',' << layout << ',' << r.total << ','
       << r.improvement << ',' << (r.partner_flipped ? 1 : 0) << '\n';
  write_text(path, os.str());
}

std::uint64_t rollout_seed(std::uint64_t master, std::string_view layout, std::string_view algo, int index) {
  std::uint64_t h = fnv1a(std::string_view(reinterpret_cast<const char*>(&master), sizeof master));
  h = fnv1a(layout, h);
  h = fnv1a("/", h);
  h = fnv1a(algo, h);
  return derive_seed(h, static_cast<std::uint64_t>(index));
}

std::unique_ptr<Agent> load_agent(const AgentRef& ref, std::uint64_t seed) {
  if (ref.algo == "stay") return std::make_unique<StayAgent>();
  if (ref.algo == "scripted") {
    if (!ref.scripted) throw ConfigError("scripted agent without a spec");
    return std::make_unique<ScriptedAgent>(*ref.scripted, seed);
  }
  const Algo expected = algo_from_string(ref.algo);
  auto policy = std::make_shared<const PolicyBundle>(load_policy(ref.checkpoint));
  if (policy->algo != expected)
    throw ConfigError("checkpoint " + ref.checkpoint.string() + " holds a " + std::string(to_string(policy->algo)) +
                      " policy, config says " + ref.algo);
  return make_agent(std::move(policy));
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const Agent& prototype) {
  cfg.validate();
  const LayoutPtr layout = cfg.resolve_layout();
  const std::string layout_key = cfg.layout_text.empty() ? cfg.layout : canonical_layout_text(cfg.layout_text);
  const int n = cfg.n_rollouts;

  std::vector<RolloutRecord> records(static_cast<std::size_t>(n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      const std::uint64_t seed = rollout_seed(cfg.seed, layout_key, cfg.agent.algo, i);
      auto ego = prototype.clone();
      ego->reseed(derive_seed(seed, 0));
      records[static_cast<std::size_t>(i)] =
          rollout(*ego, cfg.partner.spec, layout, cfg.reward, cfg.horizon, seed, cfg.env);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  ExperimentReport rep;
  rep.name = cfg.name;
  rep.agent = cfg.agent.label();
  rep.partner_id = cfg.partner.id.empty() ? std::string(to_string(cfg.partner.spec.kind)) : cfg.partner.id;
  rep.layout = cfg.layout;
  std::vector<double> totals, improvements;
  int flips = 0, successes = 0;
  for (int i = 0; i < n; ++i) {
    RolloutRecord& r = records[static_cast<std::size_t>(i)];
    r.agent = rep.agent;
    r.partner_id = rep.partner_id;
    RolloutRow row{i, r.seed, r.total, improvement(r), r.partner_flipped};
    totals.push_back(row.total);
    improvements.push_back(row.improvement);
    flips += row.partner_flipped ? 1 : 0;
    successes += row.partner_flipped && row.total > 0 ? 1 : 0;
    rep.rows.push_back(row);
  }
  rep.reward = sample_stats(totals);
  rep.improvement = sample_stats(improvements);
  rep.flip_rate = static_cast<double>(flips) / n;
  rep.influence_success_rate = static_cast<double>(successes) / n;
  if (n == 1) rep.warnings.push_back("n_rollouts = 1: standard error is undefined and reported as 0");
  if (cfg.keep_records) rep.records = std::move(records);

  if (!cfg.output.empty()) {
    std::filesystem::path stem = cfg.output;
    write_text(stem.string() + ".json", rep.to_json().dump(2) + "\n");
    rep.write_csv(stem.string() + ".csv");
  }
  return rep;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  auto agent = load_agent(cfg.agent, derive_seed(cfg.seed, 0));
  return run_experiment(cfg, *agent);
}

void SuiteConfig::validate() const {
  if (agents.empty()) throw ConfigError("suite '" + name + "' lists no agents");
  if (partners.empty()) throw ConfigError("suite '" + name + "' lists no partners");
  if (n_rollouts < 1) throw ConfigError("n_rollouts must be at least 1");
  if (horizon < kImprovementWindow) throw ConfigError("horizon must be at least 100 for the improvement metric");
  std::set<std::string> agent_names, partner_ids;
  for (const auto& a : agents)
    if (!agent_names.insert(a.label()).second) throw ConfigError("duplicate agent '" + a.label() + "'");
  for (const auto& p : partners) {
    if (!partner_ids.insert(p.id).second) throw ConfigError("duplicate partner '" + p.id + "'");
    p.spec.validate();
  }
  for (const auto& c : checks) {
    if (!partner_ids.count(c.partner)) throw ConfigError("check refers to unknown partner '" + c.partner + "'");
    for (const auto& a : c.agents)
      if (!agent_names.count(a)) throw ConfigError("check refers to unknown agent '" + a + "'");
    if (c.kind == SuiteCheck::Kind::dominates && !agent_names.count(c.baseline))
      throw ConfigError("dominates check needs a known baseline");
    if (c.agents.empty()) throw ConfigError("check lists no agents");
  }
  layout_of(layout, layout_text);
}

SuiteConfig suite_config_from_json(const json& j) {
  if (!j.is_object() || j.empty()) throw ConfigError("suite file is empty");
  try {
    SuiteConfig s;
    s.name = j.value("name", s.name);
    s.layout = j.value("layout", s.layout);
    s.layout_text = j.value("layout_text", std::string());
    if (j.contains("reward")) s.reward = reward_spec_from_json(j.at("reward"));
    if (j.contains("env")) s.env.cook_time = j.at("env").value("cook_time", s.env.cook_time);
    s.n_rollouts = j.value("n_rollouts", s.n_rollouts);
    s.horizon = j.value("horizon", s.horizon);
    s.master_seed = j.value("master_seed", s.master_seed);
    s.output = j.value("output", std::string());
    for (const auto& a : j.value("agents", json::array())) s.agents.push_back(agent_ref_from_json(a));
    for (const auto& p : j.value("partners", json::array())) s.partners.push_back(partner_ref_from_json(p));
    for (const auto& c : j.value("checks", json::array())) {
      SuiteCheck k;
      k.kind = check_kind(c.at("kind").get<std::string>());
      k.partner = c.at("partner").get<std::string>();
      k.agents = c.at("agents").get<std::vector<std::string>>();
      k.baseline = c.value("baseline", std::string());
      k.tolerance = c.value("tolerance", k.tolerance);
      s.checks.push_back(std::move(k));
    }
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("suite file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("suite file: ") + e.what());
  }
}

json to_json(const SuiteConfig& s) {
  json j{{"name", s.name},
         {"layout", s.layout},
         {"reward", to_json(s.reward)},
         {"env", {{"cook_time", s.env.cook_time}}},
         {"n_rollouts", s.n_rollouts},
         {"horizon", s.horizon},
         {"master_seed", s.master_seed},
         {"output", s.output.string()}};
  if (!s.layout_text.empty()) j["layout_text"] = s.layout_text;
  for (const auto& a : s.agents) j["agents"].push_back(to_json(a));
  for (const auto& p : s.partners) j["partners"].push_back(partner_ref_json(p));
  j["checks"] = json::array();
  for (const auto& c : s.checks) {
    json cj{{"kind", std::string(check_name(c.kind))}, {"partner", c.partner}, {"agents", c.agents}};
    if (!c.baseline.empty()) cj["baseline"] = c.baseline;
    if (c.kind == SuiteCheck::Kind::parity) cj["tolerance"] = c.tolerance;
    j["checks"].push_back(std::move(cj));
  }
  return j;
}

SuiteConfig load_suite_config(const std::filesystem::path& path) {
  SuiteConfig s = suite_config_from_json(read_json_file(path));
  for (auto& a : s.agents) resolve_relative(a, path.parent_path());
  return s;
}

const ExperimentReport& SuiteReport::cell(std::string_view agent, std::string_view partner) const {
  for (const auto& c : cells)
    if (c.agent == agent && c.partner_id == partner) return c;
  throw std::out_of_range("no suite cell for " + std::string(agent) + " x " + std::string(partner));
}

bool SuiteReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

json SuiteReport::to_json() const {
  json j{{"name", name}};
  j["cells"] = json::array();
  for (const auto& c : cells) j["cells"].push_back(c.to_json());
  j["checks"] = json::array();
  for (const auto& c : checks)
    j["checks"].push_back({{"description", c.description}, {"passed", c.passed}, {"detail", c.detail}});
  return j;
}

void SuiteReport::write_csv(const std::filesystem::path& path) const {
  std::ostringstream os;
  os << "agent,partner_id,layout,n,mean_reward,se_reward,mean_improvement,se_improvement,flip_rate,"
        "influence_success_rate\n";
  for (const auto& c : cells)
    os << c.agent << ',' << c.partner_id << ',' << c.layout << ',' << c.reward.n << ',' << c.reward.mean << ','
       << c.reward.se << ',' << c.improvement.mean << ',' << c.improvement.se << ',' << c.flip_rate << ','
       << c.influence_success_rate << '\n';
  write_text(path, os.str());
}

CheckResult evaluate_check(const SuiteCheck& check, const SuiteReport& report) {
  CheckResult res;
  std::ostringstream detail;
  const auto get = [&](const std::string& a) -> const ExperimentReport& { return report.cell(a, check.partner); };
  switch (check.kind) {
    case SuiteCheck::Kind::ordering: {
      res.description = "ordering vs " + check.partner + ":";
      for (const auto& a : check.agents) res.description += " " + a;
      res.passed = true;
      for (std::size_t i = 0; i + 1 < check.agents.size(); ++i) {
        const auto& hi = get(check.agents[i]);
        const auto& lo = get(check.agents[i + 1]);
        const double gap = hi.reward.mean - lo.reward.mean;
        const double se = pooled_se(hi, lo);
        const bool ok = gap > se;
        res.passed = res.passed && ok;
        detail << hi.agent << '-' << lo.agent << " gap " << fmt(gap) << " vs pooled se " << fmt(se)
               << (ok ? "" : " FAIL") << "; ";
      }
      break;
    }
    case SuiteCheck::Kind::dominates: {
      res.description = "each of {";
      for (const auto& a : check.agents) res.description += " " + a;
      res.description += " } beats " + check.baseline + " vs " + check.partner;
      res.passed = true;
      const auto& base = get(check.baseline);
      for (const auto& a : check.agents) {
        const auto& w = get(a);
        const double gap = w.reward.mean - base.reward.mean;
        const double se = pooled_se(w, base);
        const bool ok = gap > se;
        res.passed = res.passed && ok;
        detail << a << " gap " << fmt(gap) << " vs pooled se " << fmt(se) << (ok ? "" : " FAIL") << "; ";
      }
      break;
    }
    case SuiteCheck::Kind::parity: {
      res.description = "parity within " + fmt(check.tolerance * 100) + "% vs " + check.partner;
      double best = -1e300, worst = 1e300;
      for (const auto& a : check.agents) {
        const double m = get(a).reward.mean;
        best = std::max(best, m);
        worst = std::min(worst, m);
        detail << a << '=' << fmt(m) << ' ';
      }
      const double gap = best - worst;
      res.passed = gap <= check.tolerance * std::abs(best);
      detail << "max gap " << fmt(gap) << " allowed " << fmt(check.tolerance * std::abs(best));
      break;
    }
    case SuiteCheck::Kind::positive_improvement: {
      res.description = "mean improvement > 0 vs " + check.partner;
      res.passed = true;
      for (const auto& a : check.agents) {
        const double m = get(a).improvement.mean;
        res.passed = res.passed && m > 0;
        detail << a << '=' << fmt(m) << ' ';
      }
      break;
    }
    case SuiteCheck::Kind::zero_improvement: {
      res.description = "improvement exactly 0 vs " + check.partner;
      res.passed = true;
      for (const auto& a : check.agents)
        for (const auto& row : get(a).rows) res.passed = res.passed && row.improvement == 0.0;
      detail << (res.passed ? "all rollouts 0" : "non-zero improvement found");
      break;
    }
  }
  res.detail = detail.str();
  return res;
}

SuiteReport run_suite(const SuiteConfig& cfg, const AgentFactory& factory) {
  cfg.validate();
  SuiteReport rep;
  rep.name = cfg.name;
  for (const auto& a : cfg.agents) {
    std::unique_ptr<Agent> agent = factory ? factory(a) : load_agent(a, derive_seed(cfg.master_seed, 0));
    for (const auto& p : cfg.partners) {
      ExperimentConfig ec;
      ec.name = cfg.name;
      ec.layout = cfg.layout;
      ec.layout_text = cfg.layout_text;
      ec.reward = cfg.reward;
      ec.env = cfg.env;
      ec.agent = a;
      ec.partner = p;
      ec.n_rollouts = cfg.n_rollouts;
      ec.horizon = cfg.horizon;
      ec.seed = cfg.master_seed;
      rep.cells.push_back(run_experiment(ec, *agent));
    }
  }
  for (const auto& c : cfg.checks) rep.checks.push_back(evaluate_check(c, rep));
  if (!cfg.output.empty()) {
    write_text(cfg.output.string() + ".json", rep.to_json().dump(2) + "\n");
    rep.write_csv(cfg.output.string() + ".csv");
  }
  return rep;
}

}  // namespace influence
