#include "influence/data/dataset.hpp"

#include <zlib.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <cstring>
#include <sstream>

#include "influence/env/infer.hpp"
#include "influence/env/json.hpp"
#include "influence/util/bytes.hpp"

namespace influence {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'I', 'N', 'F', 'L', 'D', 'S', 'E', 'T'};

void put_features(ByteWriter& w, const FeatureVector& f) { w.put_bytes(f.data(), sizeof(double) * f.size()); }
void get_features(ByteReader& r, FeatureVector& f) { r.get_bytes(f.data(), sizeof(double) * f.size()); }

void put_object(ByteWriter& w, const Object& o) {
  w.put<std::uint8_t>(static_cast<std::uint8_t>(o.kind));
  w.put<std::uint8_t>(o.onions);
  w.put<std::uint8_t>(o.tomatoes);
}
Object get_object(ByteReader& r) {
  Object o;
  o.kind = static_cast<ObjectKind>(r.get<std::uint8_t>());
  o.onions = r.get<std::uint8_t>();
  o.tomatoes = r.get<std::uint8_t>();
  return o;
}

void put_state(ByteWriter& w, const GameState& s) {
  for (const auto& p : s.players) {
    w.put<std::int32_t>(p.position.col);
    w.put<std::int32_t>(p.position.row);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(p.orientation));
    put_object(w, p.held);
  }
  w.put<std::uint32_t>(static_cast<std::uint32_t>(s.pots.size()));
  for (const auto& p : s.pots) {
    w.put<std::uint8_t>(p.onions);
    w.put<std::uint8_t>(p.tomatoes);
    w.put<std::int32_t>(p.cook_timer);
    w.put<std::uint8_t>(p.done ? 1 : 0);
  }
  w.put<std::uint32_t>(static_cast<std::uint32_t>(s.counters.size()));
  for (const auto& o : s.counters) put_object(w, o);
  w.put<std::int32_t>(s.timestep);
  w.put<std::int32_t>(s.horizon);
  w.put<std::int32_t>(s.score);
  w.put<std::uint64_t>(s.seed);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(s.reward_spec.variant));
  w.put<std::int32_t>(s.reward_spec.base_soup_reward);
  w.put<std::int32_t>(s.reward_spec.multiplier);
  w.put<std::int32_t>(s.reward_spec.counter_drop_reward);
  w.put<std::int32_t>(s.config.cook_time);
}

GameState get_state(ByteReader& r, const LayoutPtr& layout) {
  GameState s;
  s.layout = layout;
  for (auto& p : s.players) {
    p.position.col = r.get<std::int32_t>();
    p.position.row = r.get<std::int32_t>();
    p.orientation = static_cast<Direction>(r.get<std::uint8_t>());
    p.held = get_object(r);
  }
  s.pots.resize(r.get<std::uint32_t>());
  if (s.pots.size() != layout->pots().size()) throw DatasetError("state pot count does not match layout");
  for (auto& p : s.pots) {
    p.onions = r.get<std::uint8_t>();
    p.tomatoes = r.get<std::uint8_t>();
    p.cook_timer = r.get<std::int32_t>();
    p.done = r.get<std::uint8_t>() != 0;
  }
  s.counters.resize(r.get<std::uint32_t>());
  if (s.counters.size() != static_cast<std::size_t>(layout->width() * layout->height()))
    throw DatasetError("state counter grid does not match layout");
  for (auto& o : s.counters) o = get_object(r);
  s.timestep = r.get<std::int32_t>();
  s.horizon = r.get<std::int32_t>();
  s.score = r.get<std::int32_t>();
  s.seed = r.get<std::uint64_t>();
  s.reward_spec.variant = static_cast<RewardVariant>(r.get<std::uint8_t>());
  s.reward_spec.base_soup_reward = r.get<std::int32_t>();
  s.reward_spec.multiplier = r.get<std::int32_t>();
  s.reward_spec.counter_drop_reward = r.get<std::int32_t>();
  s.config.cook_time = r.get<std::int32_t>();
  return s;
}

std::string episode_record(const Episode& ep) {
  ByteWriter w;
  w.put<std::int32_t>(ep.perspective);
  w.put<std::uint64_t>(ep.seed);
  w.put_string(to_json(ep.ego_spec).dump());
  w.put_string(to_json(ep.partner_spec).dump());

  w.put<std::uint64_t>(ep.transitions.size());
  for (const auto& tr : ep.transitions) {
    put_features(w, tr.s);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(tr.a));
    w.put<double>(tr.r);
    put_features(w, tr.s_next);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(tr.partner_a));
    w.put<std::uint8_t>(tr.partner_a_recorded ? 1 : 0);
    w.put<std::uint8_t>(tr.done ? 1 : 0);
    w.put<std::int32_t>(tr.t);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(tr.history.size()));
    for (const auto& h : tr.history) {
      put_features(w, h.s);
      w.put<std::uint8_t>(static_cast<std::uint8_t>(h.a));
      w.put<std::uint8_t>(h.valid ? 1 : 0);
    }
  }
  w.put<std::uint64_t>(ep.states.size());
  for (const auto& s : ep.states) put_state(w, s);
  w.put<std::uint64_t>(ep.events.size());
  for (const auto& tick : ep.events) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(tick.size()));
    for (const auto& e : tick) {
      w.put<std::uint8_t>(static_cast<std::uint8_t>(e.kind));
      w.put<std::int8_t>(static_cast<std::int8_t>(e.actor));
      w.put<std::int32_t>(e.cell.col);
      w.put<std::int32_t>(e.cell.row);
      put_object(w, e.object);
    }
  }
  w.put<std::uint64_t>(ep.partner_latents.size());
  for (const auto& l : ep.partner_latents) {
    w.put<std::uint8_t>(static_cast<std::uint8_t>(l.goal));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(l.ingredient_preference));
    w.put<std::int32_t>(l.commitment);
  }
  return w.take();
}

Episode read_episode(std::string_view bytes, const LayoutPtr& layout) {
  ByteReader r(bytes);
  Episode ep;
  ep.perspective = r.get<std::int32_t>();
  ep.seed = r.get<std::uint64_t>();
  ep.ego_spec = partner_spec_from_json(json::parse(r.get_string()));
  ep.partner_spec = partner_spec_from_json(json::parse(r.get_string()));

  ep.transitions.resize(r.get<std::uint64_t>());
  for (auto& tr : ep.transitions) {
    get_features(r, tr.s);
    tr.a = action_at(r.get<std::uint8_t>());
    tr.r = r.get<double>();
    get_features(r, tr.s_next);
    tr.partner_a = action_at(r.get<std::uint8_t>());
    tr.partner_a_recorded = r.get<std::uint8_t>() != 0;
    tr.done = r.get<std::uint8_t>() != 0;
    tr.t = r.get<std::int32_t>();
    tr.history.resize(r.get<std::uint32_t>());
    for (auto& h : tr.history) {
      get_features(r, h.s);
      h.a = action_at(r.get<std::uint8_t>());
      h.valid = r.get<std::uint8_t>() != 0;
    }
  }
  ep.states.resize(r.get<std::uint64_t>());
  for (auto& s : ep.states) s = get_state(r, layout);
  ep.events.resize(r.get<std::uint64_t>());
  for (auto& tick : ep.events) {
    tick.resize(r.get<std::uint32_t>());
    for (auto& e : tick) {
      e.kind = static_cast<EventKind>(r.get<std::uint8_t>());
      e.actor = r.get<std::int8_t>();
      e.cell.col = r.get<std::int32_t>();
      e.cell.row = r.get<std::int32_t>();
      e.object = get_object(r);
    }
  }
  ep.partner_latents.resize(r.get<std::uint64_t>());
  for (auto& l : ep.partner_latents) {
    l.goal = static_cast<Goal>(r.get<std::uint8_t>());
    l.ingredient_preference = static_cast<Preference>(r.get<std::uint8_t>());
    l.commitment = r.get<std::int32_t>();
  }
  if (r.remaining() != 0) throw DatasetError("episode record has trailing bytes");
  return ep;
}

json meta_json(const Dataset& d) {
  return json{{"layout_name", d.meta.layout_name},
              {"layout_text", d.meta.layout_text},
              {"reward_spec", to_json(d.meta.reward_spec)},
              {"horizon", d.meta.horizon},
              {"seed", d.meta.seed},
              {"notes", d.meta.notes},
              {"history_window", d.history_window},
              {"episodes", d.episodes.size()}};
}

std::uint32_t crc_of(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - pos, 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + pos), chunk);
    pos += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Episode::total_reward() const {
  double sum = 0.0;
  for (const auto& tr : transitions) sum += tr.r;
  return sum;
}

std::size_t Dataset::num_transitions() const {
  std::size_t n = 0;
  for (const auto& ep : episodes) n += ep.transitions.size();
  return n;
}

LayoutPtr Dataset::layout() const {
  if (!episodes.empty() && !episodes.front().states.empty()) return episodes.front().states.front().layout;
  try {
    auto builtin = builtin_layout(meta.layout_name);
    if (serialize_layout(*builtin) == canonical_layout_text(meta.layout_text)) return builtin;
  } catch (const std::exception&) {
  }
  return parse_layout(meta.layout_text, meta.layout_name);
}

Episode episode_from_stream(std::vector<GameState> states, const std::vector<Action>& ego_actions,
                            const std::vector<Action>& partner_actions, std::vector<std::vector<Event>> events,
                            int perspective) {
  const std::size_t n = events.size();
  if (states.size() != n + 1 || ego_actions.size() != n || partner_actions.size() != n)
    throw DatasetError("episode stream lengths disagree");
  if (perspective != 0 && perspective != 1) throw DatasetError("perspective must be 0 or 1");
  Episode ep;
  ep.perspective = perspective;
  ep.transitions.resize(n);
  const auto& mine = perspective == 0 ? ego_actions : partner_actions;
  const auto& theirs = perspective == 0 ? partner_actions : ego_actions;
  for (std::size_t t = 0; t < n; ++t) {
    Transition& tr = ep.transitions[t];
    tr.s = featurize(states[t], perspective);
    tr.s_next = featurize(states[t + 1], perspective);
    tr.a = mine[t];
    tr.partner_a = theirs[t];
    tr.r = compute_reward(states[t].reward_spec, events[t]);
    tr.t = states[t].timestep;
    tr.done = states[t + 1].finished();
  }
  ep.states = std::move(states);
  ep.events = std::move(events);
  return ep;
}

Episode record_episode(const GenerateConfig& cfg, std::uint64_t episode_seed) {
  GameState s = reset(cfg.layout, cfg.reward_spec, cfg.horizon, episode_seed, cfg.env);
  PartnerState ego = make_partner(cfg.ego_spec, 0, derive_seed(episode_seed, 0), s);
  PartnerState mate = make_partner(cfg.partner_spec, 1, derive_seed(episode_seed, 1), s);

  std::vector<GameState> states;
  std::vector<Action> a0s, a1s;
  std::vector<std::vector<Event>> events;
  std::vector<LatentStrategy> latents;
  states.reserve(static_cast<std::size_t>(cfg.horizon) + 1);
  states.push_back(s);
  while (!s.finished()) {
    latents.push_back(mate.latent);
    auto [a0, ego_next] = partner_act(ego, s);
    auto [a1, mate_next] = partner_act(mate, s);
    StepResult res = step(s, a0, a1);
    ego = latent_transition(ego_next, res.events, res.state);
    mate = latent_transition(mate_next, res.events, res.state);
    a0s.push_back(a0);
    a1s.push_back(a1);
    events.push_back(std::move(res.events));
    s = std::move(res.state);
    states.push_back(s);
  }
  Episode ep = episode_from_stream(std::move(states), a0s, a1s, std::move(events), 0);
  ep.seed = episode_seed;
  ep.ego_spec = cfg.ego_spec;
  ep.partner_spec = cfg.partner_spec;
  ep.partner_latents = std::move(latents);
  return ep;
}

Dataset generate(const GenerateConfig& cfg) {
  if (cfg.episodes < 1) throw std::invalid_argument("generate: need at least one episode");
  if (!cfg.layout) throw std::invalid_argument("generate: null layout");
  Dataset d;
  d.meta.layout_name = cfg.layout->name();
  d.meta.layout_text = serialize_layout(*cfg.layout);
  d.meta.reward_spec = cfg.reward_spec;
  d.meta.horizon = cfg.horizon;
  d.meta.seed = cfg.seed;
  d.meta.notes = json{{"ego_spec", to_json(cfg.ego_spec)},
                      {"partner_spec", to_json(cfg.partner_spec)},
                      {"cook_time", cfg.env.cook_time},
                      {"both_perspectives", cfg.both_perspectives}};

  std::vector<Episode> eps(static_cast<std::size_t>(cfg.episodes));
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < cfg.episodes; ++i)
    eps[static_cast<std::size_t>(i)] = record_episode(cfg, cfg.seed + static_cast<std::uint64_t>(i));

  for (auto& ep : eps) {
    if (cfg.both_perspectives) {
      Episode other = swap_perspective(ep);
      d.episodes.push_back(std::move(ep));
      d.episodes.push_back(std::move(other));
    } else {
      d.episodes.push_back(std::move(ep));
    }
  }
  return d;
}

Episode swap_perspective(const Episode& ep) {
  std::vector<Action> a0, a1;
  for (const auto& tr : ep.transitions) {
    a0.push_back(ep.perspective == 0 ? tr.a : tr.partner_a);
    a1.push_back(ep.perspective == 0 ? tr.partner_a : tr.a);
  }
  Episode out = episode_from_stream(ep.states, a0, a1, ep.events, 1 - ep.perspective);
  for (std::size_t t = 0; t < out.transitions.size(); ++t) {
    out.transitions[t].r = ep.transitions[t].r;
    out.transitions[t].partner_a_recorded = ep.transitions[t].partner_a_recorded;
  }
  out.seed = ep.seed;
  out.ego_spec = ep.ego_spec;
  out.partner_spec = ep.partner_spec;
  out.partner_latents = ep.partner_latents;
  return out;
}

Dataset relabel(const Dataset& d, const RewardSpec& spec) {
  Dataset out = d;
  out.meta.reward_spec = spec;
  for (auto& ep : out.episodes) {
    if (ep.events.size() != ep.transitions.size() || ep.states.size() != ep.transitions.size() + 1)
      throw DatasetError("relabel: episode is missing its raw state/event stream");
    int score = ep.states.front().score;
    for (std::size_t t = 0; t < ep.transitions.size(); ++t) {
      const int r = compute_reward(spec, ep.events[t]);
      ep.transitions[t].r = r;
      ep.states[t].reward_spec = spec;
      ep.states[t].score = score;
      score += r;
    }
    ep.states.back().reward_spec = spec;
    ep.states.back().score = score;
  }
  return out;
}

History history_at(const Episode& ep, int index, int c) {
  History h(static_cast<std::size_t>(c));
  for (int k = 0; k < c; ++k) {
    const int j = index - c + k;
    if (j < 0) continue;
    const Transition& src = ep.transitions[static_cast<std::size_t>(j)];
    h[static_cast<std::size_t>(k)] = HistoryStep{src.s, src.a, true};
  }
  return h;
}

Dataset attach_histories(const Dataset& d, int c) {
  if (c < 1) throw std::invalid_argument("attach_histories: window must be at least 1");
  Dataset out = d;
  out.history_window = c;
  for (auto& ep : out.episodes)
    for (std::size_t t = 0; t < ep.transitions.size(); ++t)
      ep.transitions[t].history = history_at(ep, static_cast<int>(t), c);
  return out;
}

Dataset filter_top_k(const Dataset& d, int k) {
  if (k < 0 || static_cast<std::size_t>(k) > d.episodes.size())
    throw std::invalid_argument("filter_top_k: k exceeds the episode count");
  std::vector<std::size_t> order(d.episodes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> totals;
  for (const auto& ep : d.episodes) totals.push_back(ep.total_reward());
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return totals[a] > totals[b]; });
  Dataset out;
  out.meta = d.meta;
  out.history_window = d.history_window;
  for (int i = 0; i < k; ++i) out.episodes.push_back(d.episodes[order[static_cast<std::size_t>(i)]]);
  return out;
}

Episode slice_episode(const Episode& ep, int begin, int end) {
  const int n = static_cast<int>(ep.transitions.size());
  if (begin < 0 || end > n || begin >= end) throw std::invalid_argument("slice_episode: bad range");
  Episode out;
  out.perspective = ep.perspective;
  out.seed = ep.seed;
  out.ego_spec = ep.ego_spec;
  out.partner_spec = ep.partner_spec;
  out.transitions.assign(ep.transitions.begin() + begin, ep.transitions.begin() + end);
  out.states.assign(ep.states.begin() + begin, ep.states.begin() + end + 1);
  out.events.assign(ep.events.begin() + begin, ep.events.begin() + end);
  if (!ep.partner_latents.empty())
    out.partner_latents.assign(ep.partner_latents.begin() + begin, ep.partner_latents.begin() + end);
  for (auto& tr : out.transitions) tr.history.clear();
  return out;
}

Action partner_action(const Episode& ep, int index) {
  const Transition& tr = ep.transitions[static_cast<std::size_t>(index)];
  if (tr.partner_a_recorded) return tr.partner_a;
  return infer_action_from_states(ep.states[static_cast<std::size_t>(index)],
                                  ep.states[static_cast<std::size_t>(index) + 1], 1 - ep.perspective);
}

Dataset concat(const Dataset& a, const Dataset& b) {
  if (canonical_layout_text(a.meta.layout_text) != canonical_layout_text(b.meta.layout_text))
    throw DatasetError("concat: datasets use different layouts");
  if (a.history_window != b.history_window) throw DatasetError("concat: history windows differ");
  Dataset out = a;
  out.episodes.insert(out.episodes.end(), b.episodes.begin(), b.episodes.end());
  return out;
}

std::string serialize_dataset(const Dataset& d) {
  ByteWriter w;
  w.put_bytes(kMagic, sizeof kMagic);
  w.put<std::uint32_t>(kDatasetVersion);
  w.put_string(meta_json(d).dump());
  w.put<std::uint64_t>(d.episodes.size());
  for (const auto& ep : d.episodes) w.put_string(episode_record(ep));
  std::string bytes = w.take();
  const std::uint32_t crc = crc_of(bytes);
  bytes.append(reinterpret_cast<const char*>(&crc), sizeof crc);
  return bytes;
}

Dataset deserialize_dataset(const std::string& bytes) {
  constexpr std::size_t kMinSize = sizeof kMagic + sizeof(std::uint32_t) + sizeof(std::uint32_t);
  if (bytes.size() < kMinSize) throw DatasetError("dataset file is truncated");
  if (bytes.compare(0, sizeof kMagic, kMagic, sizeof kMagic) != 0) throw DatasetError("not a dataset file");
  std::uint32_t version;
  std::memcpy(&version, bytes.data() + sizeof kMagic, sizeof version);
  if (version != kDatasetVersion)
    throw DatasetError("dataset version " + std::to_string(version) + " is not supported (expected " +
                       std::to_string(kDatasetVersion) + ")");
  const std::string_view body(bytes.data(), bytes.size() - sizeof(std::uint32_t));
  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + body.size(), sizeof stored);
  if (crc_of(body) != stored) throw DatasetError("dataset checksum mismatch (file corrupted or truncated)");

  try {
    ByteReader r(body);
    r.view(sizeof kMagic + sizeof(std::uint32_t));
    const json header = json::parse(r.get_string());
    Dataset d;
    d.meta.layout_name = header.at("layout_name").get<std::string>();
    d.meta.layout_text = header.at("layout_text").get<std::string>();
    d.meta.reward_spec = reward_spec_from_json(header.at("reward_spec"));
    d.meta.horizon = header.at("horizon").get<int>();
    d.meta.seed = header.at("seed").get<std::uint64_t>();
    d.meta.notes = header.at("notes");
    d.history_window = header.at("history_window").get<int>();
    const LayoutPtr layout = d.layout();
    const auto n = r.get<std::uint64_t>();
    if (n != header.at("episodes").get<std::uint64_t>()) throw DatasetError("episode count disagrees with header");
    d.episodes.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      const auto len = r.get<std::uint64_t>();
      d.episodes.push_back(read_episode(r.view(len), layout));
    }
    if (r.remaining() != 0) throw DatasetError("dataset has trailing bytes after the last episode");
    return d;
  } catch (const TruncatedInput&) {
    throw DatasetError("dataset file is truncated");
  } catch (const json::exception& e) {
    throw DatasetError(std::string("dataset header is malformed: ") + e.what());
  }
}

void save(const Dataset& d, const std::filesystem::path& path) {
  const std::string bytes = serialize_dataset(d);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DatasetError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DatasetError("write to " + path.string() + " failed");
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_dataset(ss.str());
}

json to_json(const PartnerSpec& spec) {
  return json{{"kind", std::string(to_string(spec.kind))},
              {"block_switch_threshold", spec.block_switch_threshold},
              {"plate_pickup_radius", spec.plate_pickup_radius},
              {"epsilon", spec.epsilon},
              {"preference", std::string(to_string(spec.preference))},
              {"commitment_ticks", spec.commitment_ticks},
              {"counter_item", std::string(to_string(spec.counter_item))},
              {"counter_task_prob", spec.counter_task_prob},
              {"max_counter_moves", spec.max_counter_moves},
              {"block_prob", spec.block_prob},
              {"block_min_ticks", spec.block_min_ticks},
              {"block_max_ticks", spec.block_max_ticks}};
}

PartnerSpec partner_spec_from_json(const json& j) {
  PartnerSpec s;
  if (j.is_string()) {
    s.kind = partner_kind_from_string(j.get<std::string>());
    if (s.kind == PartnerKind::preference_stubborn || s.kind == PartnerKind::preference_adaptive)
      s.preference = Preference::onion;
    if (s.kind == PartnerKind::blocker) s.preference = Preference::tomato;
    return s;
  }
  s.kind = partner_kind_from_string(j.at("kind").get<std::string>());
  if (s.kind == PartnerKind::preference_stubborn || s.kind == PartnerKind::preference_adaptive)
    s.preference = Preference::onion;
  if (s.kind == PartnerKind::blocker) s.preference = Preference::tomato;
  s.block_switch_threshold = j.value("block_switch_threshold", s.block_switch_threshold);
  s.plate_pickup_radius = j.value("plate_pickup_radius", s.plate_pickup_radius);
  s.epsilon = j.value("epsilon", s.epsilon);
  if (j.contains("preference")) s.preference = preference_from_string(j.at("preference").get<std::string>());
  s.commitment_ticks = j.value("commitment_ticks", s.commitment_ticks);
  if (j.contains("counter_item")) {
    const auto k = object_kind_from_string(j.at("counter_item").get<std::string>());
    if (!k) throw std::invalid_argument("unknown counter_item");
    s.counter_item = *k;
  }
  s.counter_task_prob = j.value("counter_task_prob", s.counter_task_prob);
  s.max_counter_moves = j.value("max_counter_moves", s.max_counter_moves);
  s.block_prob = j.value("block_prob", s.block_prob);
  s.block_min_ticks = j.value("block_min_ticks", s.block_min_ticks);
  s.block_max_ticks = j.value("block_max_ticks", s.block_max_ticks);
  s.validate();
  return s;
}

json to_json(const Dataset& d) {
  json eps = json::array();
  for (const auto& ep : d.episodes) {
    json trs = json::array();
    for (const auto& tr : ep.transitions) {
      json h = json::array();
      for (const auto& step : tr.history)
        h.push_back(json{{"s", step.s}, {"a", std::string(to_string(step.a))}, {"valid", step.valid}});
      trs.push_back(json{{"t", tr.t},
                         {"s", tr.s},
                         {"a", std::string(to_string(tr.a))},
                         {"r", tr.r},
                         {"s_next", tr.s_next},
                         {"partner_a", std::string(to_string(tr.partner_a))},
                         {"partner_a_recorded", tr.partner_a_recorded},
                         {"done", tr.done},
                         {"history", h}});
    }
    json states = json::array();
    for (const auto& s : ep.states) states.push_back(to_json(s));
    json events = json::array();
    for (const auto& tick : ep.events) {
      json row = json::array();
      for (const auto& e : tick) row.push_back(to_json(e));
      events.push_back(row);
    }
    json latents = json::array();
    for (const auto& l : ep.partner_latents)
      latents.push_back(json{{"goal", std::string(to_string(l.goal))},
                             {"preference", std::string(to_string(l.ingredient_preference))},
                             {"commitment", l.commitment}});
    eps.push_back(json{{"perspective", ep.perspective},
                       {"seed", ep.seed},
                       {"ego_spec", to_json(ep.ego_spec)},
                       {"partner_spec", to_json(ep.partner_spec)},
                       {"total_reward", ep.total_reward()},
                       {"transitions", trs},
                       {"states", states},
                       {"events", events},
                       {"partner_latents", latents}});
  }
  return json{{"meta", meta_json(d)}, {"episodes", eps}};
}

}  // namespace influence
