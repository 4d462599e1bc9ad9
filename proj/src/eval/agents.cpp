#include "influence/eval/agents.hpp"

#include <array>
#include <stdexcept>

namespace influence {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 6> kAlgoNames{"cql", "bc", "filtered-bc", "latent-cql", "memory-cql",
                                                     "offline-lili"};

std::string_view decoder_name(DecoderKind k) { return k == DecoderKind::action ? "action" : "next_state"; }
DecoderKind decoder_from(std::string_view s) {
  if (s == "action") return DecoderKind::action;
  if (s == "next_state") return DecoderKind::next_state;
  throw std::invalid_argument("unknown decoder kind '" + std::string(s) + "'");
}

}  // namespace

std::string_view to_string(Algo a) { return kAlgoNames[static_cast<std::size_t>(a)]; }

Algo algo_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kAlgoNames.size(); ++i)
    if (kAlgoNames[i] == s) return static_cast<Algo>(i);
  throw std::invalid_argument("unknown algorithm '" + std::string(s) + "'");
}

bool uses_latent(Algo a) { return a == Algo::latent_cql || a == Algo::offline_lili; }

void ScriptedAgent::reset(const GameState& initial) { state_ = make_partner(spec_, pid, seed_, initial); }

Action ScriptedAgent::act(const GameState& s) {
  if (!state_) reset(s);
  auto [a, next] = partner_act(*state_, s);
  state_ = std::move(next);
  return a;
}

void ScriptedAgent::observe(const std::vector<Event>& events, const GameState& next) {
  if (state_) state_ = latent_transition(*state_, events, next);
}

void PolicyAgent::reset(const GameState&) {
  past_.clear();
  lili_ = LiliState{};
  belief_.reset();
}

History PolicyAgent::current_history() const {
  const int w = policy_->latent ? policy_->latent->spec.window : kHistoryWindow;
  History h(static_cast<std::size_t>(w));
  const int have = static_cast<int>(past_.size());
  for (int k = 0; k < w; ++k) {
    const int from_end = w - k;  // step t - from_end
    if (from_end <= have) h[static_cast<std::size_t>(k)] = past_[static_cast<std::size_t>(have - from_end)];
  }
  return h;
}

Action PolicyAgent::act(const GameState& s) {
  const FeatureVector f = featurize(s, pid);
  const PolicyBundle& p = *policy_;
  Action a = Action::stay;
  switch (p.algo) {
    case Algo::cql:
    case Algo::bc:
    case Algo::filtered_bc:
      a = influence::act(p.q, f);
      break;
    case Algo::memory_cql: {
      std::vector<FeatureVector> window{f};
      for (auto it = past_.rbegin(); it != past_.rend() && static_cast<int>(window.size()) <= p.memory_window; ++it)
        window.push_back(it->s);
      a = act_memory(p.q, window, p.memory_window);
      break;
    }
    case Algo::latent_cql: {
      belief_ = p.latent->encode(current_history());
      a = act_with_z(p.q, f, belief_->mean);
      break;
    }
    case Algo::offline_lili: {
      if (!lili_.ready || s.timestep % p.latent->spec.window == 0) {
        belief_ = p.latent->encode(current_history());
        lili_.z = belief_->mean;
        lili_.ready = true;
      }
      a = act_with_z(p.q, f, lili_.z);
      break;
    }
  }
  past_.push_back(HistoryStep{f, a, true});
  const std::size_t keep = static_cast<std::size_t>(std::max(p.memory_window, kHistoryWindow) +
                                                    (p.latent ? p.latent->spec.window : 0) + 1);
  while (past_.size() > keep) past_.pop_front();
  return a;
}

json to_json(const TrainConfig& c) {
  return json{{"gamma", c.gamma},
              {"batch_size", c.batch_size},
              {"target_update_period", c.target_update_period},
              {"updates_per_iteration", c.updates_per_iteration},
              {"iterations", c.iterations},
              {"lr", c.lr},
              {"lr_final", c.lr_final},
              {"alpha", c.alpha},
              {"seed", c.seed},
              {"reward_scale", c.reward_scale},
              {"bootstrap_time_limit", c.bootstrap_time_limit},
              {"hidden", c.hidden}};
}

TrainConfig train_config_from_json(const json& j, TrainConfig c) {
  c.gamma = j.value("gamma", c.gamma);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.target_update_period = j.value("target_update_period", c.target_update_period);
  c.updates_per_iteration = j.value("updates_per_iteration", c.updates_per_iteration);
  c.iterations = j.value("iterations", c.iterations);
  c.lr = j.value("lr", c.lr);
  c.lr_final = j.value("lr_final", c.lr_final);
  c.alpha = j.value("alpha", c.alpha);
  c.seed = j.value("seed", c.seed);
  c.reward_scale = j.value("reward_scale", c.reward_scale);
  c.bootstrap_time_limit = j.value("bootstrap_time_limit", c.bootstrap_time_limit);
  c.hidden = j.value("hidden", c.hidden);
  return c;
}

json to_json(const LatentConfig& c) {
  return json{{"window", c.spec.window},
              {"hidden", c.spec.hidden},
              {"latent_dim", c.spec.latent_dim},
              {"decoder_hidden", c.spec.decoder_hidden},
              {"decoder", std::string(decoder_name(c.spec.decoder))},
              {"beta", c.beta},
              {"batch_size", c.batch_size},
              {"iterations", c.iterations},
              {"updates_per_iteration", c.updates_per_iteration},
              {"lr", c.lr},
              {"seed", c.seed}};
}

LatentConfig latent_config_from_json(const json& j, LatentConfig c) {
  c.spec.window = j.value("window", c.spec.window);
  c.spec.hidden = j.value("hidden", c.spec.hidden);
  c.spec.latent_dim = j.value("latent_dim", c.spec.latent_dim);
  c.spec.decoder_hidden = j.value("decoder_hidden", c.spec.decoder_hidden);
  if (j.contains("decoder")) c.spec.decoder = decoder_from(j.at("decoder").get<std::string>());
  c.beta = j.value("beta", c.beta);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.iterations = j.value("iterations", c.iterations);
  c.updates_per_iteration = j.value("updates_per_iteration", c.updates_per_iteration);
  c.lr = j.value("lr", c.lr);
  c.seed = j.value("seed", c.seed);
  return c;
}

json to_json(const AlgoConfig& c) {
  return json{{"train", to_json(c.train)},
              {"latent", to_json(c.latent)},
              {"filter_k", c.filter_k},
              {"memory_window", c.memory_window},
              {"lili_beta", c.lili_beta}};
}

AlgoConfig algo_config_from_json(const json& j, AlgoConfig c) {
  if (j.contains("train")) c.train = train_config_from_json(j.at("train"), c.train);
  if (j.contains("latent")) c.latent = latent_config_from_json(j.at("latent"), c.latent);
  c.filter_k = j.value("filter_k", c.filter_k);
  c.memory_window = j.value("memory_window", c.memory_window);
  c.lili_beta = j.value("lili_beta", c.lili_beta);
  return c;
}

PolicyBundle train_policy(Algo algo, const Dataset& d, const AlgoConfig& cfg, TrainLogs* logs,
                          const std::optional<LatentModel>& pretrained) {
  PolicyBundle p;
  p.algo = algo;
  TrainingCurve* curve = logs ? &logs->q_curve : nullptr;
  switch (algo) {
    case Algo::cql:
      p.q = train_q(q_data(d), cfg.train, curve);
      break;
    case Algo::bc:
      p.q = train_bc(q_data(d), cfg.train, curve);
      break;
    case Algo::filtered_bc:
      p.q = train_bc(q_data(filter_top_k(d, std::min<int>(cfg.filter_k, static_cast<int>(d.episodes.size())))),
                     cfg.train, curve);
      break;
    case Algo::memory_cql:
      p.memory_window = cfg.memory_window;
      p.q = train_q(memory_q_data(d, cfg.memory_window), cfg.train, curve);
      break;
    case Algo::latent_cql:
    case Algo::offline_lili: {
      LatentConfig lc = cfg.latent;
      if (algo == Algo::offline_lili) lc.beta = cfg.lili_beta;
      p.latent = pretrained ? *pretrained : train_latent(d, lc, logs ? &logs->latent_log : nullptr);
      const ZSchedule schedule = algo == Algo::latent_cql ? ZSchedule::every_tick : ZSchedule::block_start;
      p.q = train_q(latent_q_data(d, *p.latent, schedule), cfg.train, curve);
      break;
    }
  }
  return p;
}

nn::Checkpoint to_checkpoint(const PolicyBundle& p, const json& extra_meta) {
  nn::Checkpoint ck;
  ck.meta = json{{"format", "influence-policy"},
                 {"algo", std::string(to_string(p.algo))},
                 {"feature_dim", kFeatureDim},
                 {"input_dim", p.q.input_dim()},
                 {"hidden", p.q.net.spec().hidden},
                 {"memory_window", p.memory_window}};
  if (p.latent) {
    LatentConfig lc;
    lc.spec = p.latent->spec;
    ck.meta["latent"] = to_json(lc);
  }
  if (!extra_meta.is_null()) ck.meta["extra"] = extra_meta;
  ck.params = p.q.params;
  if (p.latent) ck.params.merge(p.latent->params);
  return ck;
}

PolicyBundle policy_from_checkpoint(const nn::Checkpoint& ck) {
  if (ck.meta.value("format", std::string()) != "influence-policy")
    throw nn::CheckpointError("checkpoint does not hold a policy");
  if (ck.meta.value("feature_dim", 0) != kFeatureDim)
    throw nn::CheckpointError("checkpoint was trained on a different feature layout");
  PolicyBundle p;
  p.algo = algo_from_string(ck.meta.at("algo").get<std::string>());
  p.memory_window = ck.meta.value("memory_window", 0);
  const int input = ck.meta.at("input_dim").get<int>();
  p.q = make_q_function(input, 0, ck.meta.at("hidden").get<std::vector<int>>());
  const nn::ParamBundle q_params = ck.params.subset("q/");
  if (!q_params.same_shapes(p.q.params)) throw nn::CheckpointError("Q-network tensors do not match the metadata");
  p.q.params = q_params;
  if (uses_latent(p.algo)) {
    if (!ck.meta.contains("latent")) throw nn::CheckpointError("latent policy without encoder metadata");
    const LatentConfig lc = latent_config_from_json(ck.meta.at("latent"));
    LatentModel m = make_latent_model(lc.spec, 0);
    nn::ParamBundle lp = ck.params.subset("enc/");
    lp.merge(ck.params.subset("dec/"));
    if (!lp.same_shapes(m.params)) throw nn::CheckpointError("encoder tensors do not match the metadata");
    m.params = lp;
    if (input != kFeatureDim + m.spec.latent_dim) throw nn::CheckpointError("latent policy input width mismatch");
    p.latent = std::move(m);
  } else {
    const int expected = p.algo == Algo::memory_cql ? kFeatureDim * (p.memory_window + 1) : kFeatureDim;
    if (input != expected) throw nn::CheckpointError("policy input width does not match its algorithm");
  }
  return p;
}

void save_policy(const PolicyBundle& p, const std::filesystem::path& path, const json& extra_meta) {
  nn::save_checkpoint(to_checkpoint(p, extra_meta), path);
}

PolicyBundle load_policy(const std::filesystem::path& path) { return policy_from_checkpoint(nn::load_checkpoint(path)); }

std::unique_ptr<Agent> make_agent(std::shared_ptr<const PolicyBundle> policy) {
  return std::make_unique<PolicyAgent>(std::move(policy));
}

}  // namespace influence
