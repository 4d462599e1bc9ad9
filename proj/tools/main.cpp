#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "influence/data/dataset.hpp"
#include "influence/env/json.hpp"
#include "influence/eval/experiment.hpp"
#ifdef INFLUENCE_HAVE_SERVER
#include "influence/play/server.hpp"
#endif

using namespace influence;
using nlohmann::json;

namespace {

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return json::parse(in);
}

// Accepts inline JSON, a path to a JSON file, or a bare kind / variant name.
json json_arg(const std::string& s) {
  if (!s.empty() && (s.front() == '{' || s.front() == '"')) return json::parse(s);
  if (std::filesystem::is_regular_file(s)) return read_json(s);
  return json(s);
}

LayoutPtr layout_arg(const std::string& s) {
  if (std::filesystem::is_regular_file(s)) {
    std::ifstream in(s);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_layout(ss.str(), std::filesystem::path(s).stem().string());
  }
  return builtin_layout(s);
}

void print_summary(const Dataset& d) {
  double total = 0;
  for (const auto& ep : d.episodes) total += ep.total_reward();
  std::cout << "layout " << d.meta.layout_name << ", reward " << to_string(d.meta.reward_spec.variant) << ", "
            << d.episodes.size() << " episodes, " << d.num_transitions() << " transitions, mean return "
            << (d.episodes.empty() ? 0.0 : total / static_cast<double>(d.episodes.size())) << "\n";
}

void print_report(const ExperimentReport& r) {
  std::cout << r.agent << " vs " << r.partner_id << " on " << r.layout << ": reward " << r.reward.mean << " +/- "
            << r.reward.se << " (n=" << r.reward.n << "), improvement " << r.improvement.mean << " +/- "
            << r.improvement.se << ", partner flip rate " << r.flip_rate << "\n";
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offline RL with partner-strategy inference in a two-player cooking game"};
  app.require_subcommand(1);

  auto* layouts = app.add_subcommand("layouts", "List built-in layouts");
  std::string show;
  layouts->add_option("--show", show, "Print the grid of one layout");

  auto* gen = app.add_subcommand("generate", "Record scripted-pair episodes into a dataset file");
  std::string g_layout = "asymmetric_advantages", g_ego = "greedy_next_task", g_partner = "greedy_next_task",
              g_reward = "standard", g_out;
  int g_episodes = 10, g_horizon = 400, g_cook = 20;
  std::uint64_t g_seed = 0;
  bool g_both = false;
  gen->add_option("--layout", g_layout, "Built-in layout name or layout file");
  gen->add_option("--ego", g_ego, "Ego scripted spec: kind name, JSON or JSON file");
  gen->add_option("--partner", g_partner, "Partner scripted spec: kind name, JSON or JSON file");
  gen->add_option("--reward", g_reward, "Reward variant name or RewardSpec JSON");
  gen->add_option("--episodes", g_episodes)->check(CLI::PositiveNumber);
  gen->add_option("--horizon", g_horizon)->check(CLI::PositiveNumber);
  gen->add_option("--cook-time", g_cook)->check(CLI::PositiveNumber);
  gen->add_option("--seed", g_seed);
  gen->add_flag("--both-perspectives", g_both, "Also store every episode from the partner's side");
  gen->add_option("--out", g_out)->required();

  auto* rel = app.add_subcommand("relabel", "Recompute rewards under another reward spec");
  std::string r_in, r_out, r_reward;
  rel->add_option("--in", r_in)->required();
  rel->add_option("--out", r_out)->required();
  rel->add_option("--reward", r_reward, "Reward variant name or RewardSpec JSON")->required();

  auto* filt = app.add_subcommand("filter", "Keep the k highest-return episodes");
  std::string f_in, f_out;
  int f_k = 10;
  filt->add_option("--in", f_in)->required();
  filt->add_option("--out", f_out)->required();
  filt->add_option("--k", f_k)->check(CLI::PositiveNumber);

  auto* cat = app.add_subcommand("concat", "Merge datasets recorded on the same layout");
  std::vector<std::string> c_in;
  std::string c_out;
  cat->add_option("--in", c_in)->required()->expected(1, -1);
  cat->add_option("--out", c_out)->required();

  auto* info = app.add_subcommand("info", "Summarize a dataset or checkpoint");
  std::string i_path;
  info->add_option("path", i_path)->required();

  auto* train = app.add_subcommand("train", "Train a policy on a dataset");
  std::string t_algo, t_data, t_config, t_out, t_curve;
  int t_iterations = -1;
  std::int64_t t_seed = -1;
  train->add_option("--algo", t_algo, "bc, filtered-bc, cql, memory-cql, offline-lili, latent-cql")->required();
  train->add_option("--data,--dataset", t_data)->required();
  train->add_option("--config", t_config, "AlgoConfig JSON file");
  train->add_option("--out", t_out, "Checkpoint path")->required();
  train->add_option("--curve", t_curve, "Write the per-iteration training curve as CSV");
  train->add_option("--iterations", t_iterations, "Override train.iterations");
  train->add_option("--seed", t_seed, "Override the training seeds");

  auto* eval = app.add_subcommand("eval", "Run one experiment config");
  std::string e_config;
  eval->add_option("--config", e_config)->required();

  auto* suite = app.add_subcommand("suite", "Run an agents x partners suite file");
  std::string s_file;
  suite->add_option("--file", s_file)->required();

  auto* serve = app.add_subcommand("serve", "Run the realtime play server");
  std::string v_bind, v_ckpt, v_static;
  int v_port = -1;
  serve->add_option("--bind", v_bind, "Bind address (env INFLUENCE_BIND)");
  serve->add_option("--port", v_port, "Port (env INFLUENCE_PORT)");
  serve->add_option("--checkpoints", v_ckpt, "Checkpoint directory (env INFLUENCE_CHECKPOINT_DIR)");
  serve->add_option("--static", v_static, "Web client bundle directory (env INFLUENCE_STATIC_DIR)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*layouts) {
      if (!show.empty()) {
        std::cout << layout_text(show);
        return 0;
      }
      for (const auto& n : layout_names()) {
        const auto l = builtin_layout(n);
        std::cout << n << " (" << l->width() << "x" << l->height() << ")\n";
      }
    } else if (*gen) {
      GenerateConfig cfg;
      cfg.layout = layout_arg(g_layout);
      cfg.ego_spec = partner_spec_from_json(json_arg(g_ego));
      cfg.partner_spec = partner_spec_from_json(json_arg(g_partner));
      cfg.reward_spec = reward_spec_from_json(json_arg(g_reward));
      cfg.env.cook_time = g_cook;
      cfg.episodes = g_episodes;
      cfg.horizon = g_horizon;
      cfg.seed = g_seed;
      cfg.both_perspectives = g_both;
      const Dataset d = generate(cfg);
      save(d, g_out);
      print_summary(d);
    } else if (*rel) {
      const Dataset d = relabel(load_dataset(r_in), reward_spec_from_json(json_arg(r_reward)));
      save(d, r_out);
      print_summary(d);
    } else if (*filt) {
      const Dataset d = filter_top_k(load_dataset(f_in), f_k);
      save(d, f_out);
      print_summary(d);
    } else if (*cat) {
      Dataset d = load_dataset(c_in.front());
      for (std::size_t i = 1; i < c_in.size(); ++i) d = concat(d, load_dataset(c_in[i]));
      save(d, c_out);
      print_summary(d);
    } else if (*info) {
      try {
        print_summary(load_dataset(i_path));
      } catch (const DatasetError&) {
        const nn::Checkpoint ck = nn::load_checkpoint(i_path);
        std::cout << ck.meta.dump(2) << "\n" << ck.params.size() << " parameters\n";
      }
    } else if (*train) {
      AlgoConfig cfg = t_config.empty() ? AlgoConfig{} : algo_config_from_json(read_json(t_config));
      if (t_iterations > 0) cfg.train.iterations = t_iterations;
      if (t_seed >= 0) {
        cfg.train.seed = static_cast<std::uint64_t>(t_seed);
        cfg.latent.seed = static_cast<std::uint64_t>(t_seed) + 1;
      }
      const Algo algo = algo_from_string(t_algo);
      const Dataset d = load_dataset(t_data);
      TrainLogs logs;
      const PolicyBundle p = train_policy(algo, d, cfg, &logs);
      save_policy(p, t_out, json{{"config", to_json(cfg)}, {"dataset", t_data}, {"layout", d.meta.layout_name}});
      if (!t_curve.empty()) {
        std::ofstream out(t_curve);
        logs.q_curve.write_csv(out);
      }
      if (!logs.q_curve.iterations.empty()) {
        const auto& last = logs.q_curve.iterations.back();
        std::cout << "trained " << t_algo << ": final loss " << last.loss << ", accuracy " << last.accuracy << "\n";
      }
    } else if (*eval) {
      print_report(run_experiment(load_experiment_config(e_config)));
    } else if (*suite) {
      const SuiteReport rep = run_suite(load_suite_config(s_file));
      for (const auto& c : rep.cells) print_report(c);
      for (const auto& c : rep.checks)
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.description << " [" << c.detail << "]\n";
      return rep.all_passed() ? 0 : 3;
    } else if (*serve) {
#ifdef INFLUENCE_HAVE_SERVER
      play::ServerOptions o = play::options_from_env();
      if (!v_bind.empty()) o.address = v_bind;
      if (v_port >= 0) o.port = static_cast<unsigned short>(v_port);
      if (!v_ckpt.empty()) o.checkpoint_dir = v_ckpt;
      if (!v_static.empty()) o.static_dir = v_static;
      play::Server server(o);
      std::cout << "listening on " << o.address << ":" << server.port() << ", checkpoints in " << o.checkpoint_dir
                << std::endl;
      server.run();
#else
      std::cerr << "this build has no play server (configure with -DINFLUENCE_BUILD_SERVER=ON)\n";
      return 2;
#endif
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
