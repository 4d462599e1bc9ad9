#include "influence/latent/latent.hpp"

#include <cmath>
#include <stdexcept>

namespace influence {

LatentBelief LatentBelief::standard_normal(int dim) { return LatentBelief{Vec::Zero(dim), Vec::Zero(dim)}; }

double kl_diag_gauss(const LatentBelief& q, const LatentBelief& p) {
  if (q.mean.size() != p.mean.size() || q.logvar.size() != p.logvar.size() || q.mean.size() != q.logvar.size())
    throw std::invalid_argument("kl_diag_gauss: dimension mismatch");
  double kl = 0.0;
  for (Eigen::Index i = 0; i < q.mean.size(); ++i) {
    const double dm = q.mean(i) - p.mean(i);
    kl += p.logvar(i) - q.logvar(i) + (std::exp(q.logvar(i)) + dm * dm) / std::exp(p.logvar(i)) - 1.0;
  }
  return 0.5 * kl;
}

LatentModel make_latent_model(const LatentSpec& spec, std::uint64_t seed) {
  if (spec.window < 1 || spec.hidden < 1 || spec.latent_dim < 1) throw std::invalid_argument("bad latent spec");
  LatentModel m;
  m.spec = spec;
  m.lstm = nn::Lstm(nn::LstmSpec{kEncoderStepDim, spec.hidden}, "enc/lstm/");
  m.head = nn::Mlp(nn::MlpSpec{spec.hidden, {}, 2 * spec.latent_dim}, "enc/head/");
  const int dec_in =
      spec.decoder == DecoderKind::action ? spec.latent_dim : kFeatureDim + kNumActions + spec.latent_dim;
  const int dec_out = spec.decoder == DecoderKind::action ? kNumActions : kFeatureDim;
  m.decoder = nn::Mlp(nn::MlpSpec{dec_in, spec.decoder_hidden, dec_out}, "dec/");
  nn::Rng rng(seed);
  m.lstm.init(m.params, rng);
  m.head.init(m.params, rng);
  m.decoder.init(m.params, rng);
  return m;
}

void encoder_inputs(const std::vector<const History*>& hs, int window, std::vector<Mat>& xs, std::vector<Vec>& masks) {
  const auto b = static_cast<Eigen::Index>(hs.size());
  xs.assign(static_cast<std::size_t>(window), Mat::Zero(b, kEncoderStepDim));
  masks.assign(static_cast<std::size_t>(window), Vec::Zero(b));
  for (Eigen::Index i = 0; i < b; ++i) {
    const History& h = *hs[static_cast<std::size_t>(i)];
    if (static_cast<int>(h.size()) != window)
      throw std::invalid_argument("encoder: history has " + std::to_string(h.size()) + " steps, expected " +
                                  std::to_string(window));
    for (int k = 0; k < window; ++k) {
      const HistoryStep& step = h[static_cast<std::size_t>(k)];
      if (!step.valid) continue;
      Mat& x = xs[static_cast<std::size_t>(k)];
      nn::RowVec row(kFeatureDim);
      write_net_input(step.s, row.data());
      x.row(i).head(kFeatureDim) = row;
      x(i, kFeatureDim + index_of(step.a)) = 1.0;
      x(i, kEncoderStepDim - 1) = 1.0;
      masks[static_cast<std::size_t>(k)](i) = 1.0;
    }
  }
}

void LatentModel::encode_batch(const std::vector<const History*>& hs, Mat& mean, Mat& logvar) const {
  const int d = spec.latent_dim;
  const auto n = static_cast<Eigen::Index>(hs.size());
  mean.resize(n, d);
  logvar.resize(n, d);
  constexpr std::size_t kChunk = 512;
  for (std::size_t start = 0; start < hs.size(); start += kChunk) {
    const std::size_t end = std::min(hs.size(), start + kChunk);
    const std::vector<const History*> part(hs.begin() + static_cast<std::ptrdiff_t>(start),
                                           hs.begin() + static_cast<std::ptrdiff_t>(end));
    std::vector<Mat> xs;
    std::vector<Vec> masks;
    encoder_inputs(part, spec.window, xs, masks);
    const Mat out = head.forward(params, lstm.forward(params, xs, masks));
    const auto rows = static_cast<Eigen::Index>(part.size());
    mean.middleRows(static_cast<Eigen::Index>(start), rows) = out.leftCols(d);
    logvar.middleRows(static_cast<Eigen::Index>(start), rows) = out.rightCols(d);
  }
}

LatentBelief LatentModel::encode(const History& h) const {
  Mat mean, logvar;
  encode_batch({&h}, mean, logvar);
  return LatentBelief{mean.row(0).transpose(), logvar.row(0).transpose()};
}

namespace {

void compute_prior(const ElboBatch& batch, const LatentModel& model, Mat& mu_p, Mat& lv_p) {
  const auto n = static_cast<Eigen::Index>(batch.size());
  const int d = model.spec.latent_dim;
  mu_p = Mat::Zero(n, d);
  lv_p = Mat::Zero(n, d);
  std::vector<const History*> prev;
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < n; ++i)
    if (batch.has_prev[static_cast<std::size_t>(i)]) {
      prev.push_back(&batch.prev_history[static_cast<std::size_t>(i)]);
      rows.push_back(i);
    }
  if (!prev.empty()) {
    Mat pm, pl;
    model.encode_batch(prev, pm, pl);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      mu_p.row(rows[k]) = pm.row(static_cast<Eigen::Index>(k));
      lv_p.row(rows[k]) = pl.row(static_cast<Eigen::Index>(k));
    }
  }
}

}  // namespace

void freeze_prior(ElboBatch& batch, const LatentModel& model) {
  compute_prior(batch, model, batch.prior_mean, batch.prior_logvar);
}

ElboLoss elbo_loss(const ElboBatch& batch, const LatentModel& model, double beta, bool with_grads) {
  const auto n = static_cast<Eigen::Index>(batch.size());
  const int d = model.spec.latent_dim;
  if (n == 0) throw std::invalid_argument("elbo_loss: empty batch");
  if (model.spec.decoder == DecoderKind::action && batch.partner_a.size() != batch.size())
    throw std::invalid_argument("elbo_loss: batch is missing partner actions");
  if (batch.noise.rows() != n || batch.noise.cols() != d) throw std::invalid_argument("elbo_loss: noise shape");

  std::vector<const History*> hs;
  for (const auto& h : batch.history) hs.push_back(&h);
  std::vector<Mat> xs;
  std::vector<Vec> masks;
  encoder_inputs(hs, model.spec.window, xs, masks);
  nn::LstmCache lc;
  nn::MlpCache hc;
  const Mat h_final = model.lstm.forward(model.params, xs, masks, with_grads ? &lc : nullptr);
  const Mat out = model.head.forward(model.params, h_final, with_grads ? &hc : nullptr);
  const Mat mu = out.leftCols(d);
  const Mat lv = out.rightCols(d);

  Mat mu_p, lv_p;
  if (batch.prior_mean.rows() == n && batch.prior_mean.cols() == d) {
    mu_p = batch.prior_mean;
    lv_p = batch.prior_logvar;
  } else {
    compute_prior(batch, model, mu_p, lv_p);
  }

  const Mat sd = (0.5 * lv.array()).exp().matrix();
  const Mat z = mu + sd.cwiseProduct(batch.noise);
  const double inv_n = 1.0 / static_cast<double>(n);

  ElboLoss res;
  Mat dec_in;
  if (model.spec.decoder == DecoderKind::action) {
    dec_in = z;
  } else {
    dec_in = Mat::Zero(n, kFeatureDim + kNumActions + d);
    dec_in.leftCols(kFeatureDim) = batch.s;
    for (Eigen::Index i = 0; i < n; ++i) dec_in(i, kFeatureDim + batch.a[static_cast<std::size_t>(i)]) = 1.0;
    dec_in.rightCols(d) = z;
  }
  nn::MlpCache dc;
  const Mat pred = model.decoder.forward(model.params, dec_in, with_grads ? &dc : nullptr);
  Mat dpred;
  if (model.spec.decoder == DecoderKind::action) {
    const Vec lse = nn::logsumexp_rows(pred);
    dpred = nn::softmax_rows(pred) * inv_n;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int a = batch.partner_a[static_cast<std::size_t>(i)];
      res.reconstruction += lse(i) - pred(i, a);
      if (argmax_action(pred.row(i).transpose()) == a) res.accuracy += 1.0;
      dpred(i, a) -= inv_n;
    }
  } else {
    const Mat diff = pred - batch.s_next;
    res.reconstruction = 0.5 * diff.squaredNorm();
    dpred = diff * inv_n;
  }
  res.reconstruction *= inv_n;
  res.accuracy *= inv_n;

  const Mat var_ratio = (lv - lv_p).array().exp().matrix();
  const Mat inv_var_p = (-lv_p.array()).exp().matrix();
  const Mat dm = mu - mu_p;
  const Mat kl_terms = lv_p - lv + var_ratio + dm.cwiseProduct(dm).cwiseProduct(inv_var_p) - Mat::Ones(n, d);
  res.kl = 0.5 * kl_terms.sum() * inv_n;
  res.loss = res.reconstruction + beta * res.kl;

  if (with_grads) {
    res.grads = model.params.zeros_like();
    const Mat d_in = model.decoder.backward(model.params, dc, dpred, res.grads);
    const Mat dz = d_in.rightCols(d);
    Mat dout(n, 2 * d);
    dout.leftCols(d) = dz + beta * inv_n * dm.cwiseProduct(inv_var_p);
    dout.rightCols(d) = dz.cwiseProduct(batch.noise).cwiseProduct(sd) * 0.5 +
                        beta * inv_n * 0.5 * (var_ratio - Mat::Ones(n, d));
    const Mat dh = model.head.backward(model.params, hc, dout, res.grads);
    model.lstm.backward(model.params, lc, dh, res.grads);
  }
  return res;
}

ElboBatch make_elbo_batch(const Dataset& d, const std::vector<std::pair<std::size_t, std::size_t>>& picks,
                          int window, int latent_dim, nn::Rng& rng) {
  ElboBatch b;
  const auto n = static_cast<Eigen::Index>(picks.size());
  b.s.resize(n, kFeatureDim);
  b.s_next.resize(n, kFeatureDim);
  b.noise.resize(n, latent_dim);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto [e, t] = picks[static_cast<std::size_t>(i)];
    const Episode& ep = d.episodes[e];
    const Transition& tr = ep.transitions[t];
    const int ti = static_cast<int>(t);
    b.history.push_back(d.history_window == window && !tr.history.empty() ? tr.history : history_at(ep, ti, window));
    b.has_prev.push_back(t > 0 ? 1 : 0);
    b.prev_history.push_back(t > 0 ? history_at(ep, ti - 1, window) : History{});
    b.partner_a.push_back(index_of(partner_action(ep, ti)));
    b.a.push_back(index_of(tr.a));
    nn::RowVec row(kFeatureDim);
    write_net_input(tr.s, row.data());
    b.s.row(i) = row;
    write_net_input(tr.s_next, row.data());
    b.s_next.row(i) = row;
    for (int j = 0; j < latent_dim; ++j) b.noise(i, j) = gauss(rng);
  }
  return b;
}

LatentModel train_latent(const Dataset& d, const LatentConfig& cfg, std::vector<LatentIterationLog>* log) {
  if (d.num_transitions() == 0) throw std::invalid_argument("train_latent: empty dataset");
  LatentModel model = make_latent_model(cfg.spec, derive_seed(cfg.seed, 23));
  nn::Rng rng(cfg.seed);
  nn::AdamState adam = nn::adam_init(model.params);
  const nn::AdamConfig opt{cfg.lr};

  std::vector<std::pair<std::size_t, std::size_t>> all;
  for (std::size_t e = 0; e < d.episodes.size(); ++e)
    for (std::size_t t = 0; t < d.episodes[e].transitions.size(); ++t) all.emplace_back(e, t);
  std::uniform_int_distribution<std::size_t> pick(0, all.size() - 1);

  for (int it = 0; it < cfg.iterations; ++it) {
    LatentIterationLog entry{it};
    for (int u = 0; u < cfg.updates_per_iteration; ++u) {
      std::vector<std::pair<std::size_t, std::size_t>> picks(static_cast<std::size_t>(cfg.batch_size));
      for (auto& p : picks) p = all[pick(rng)];
      const ElboBatch batch = make_elbo_batch(d, picks, cfg.spec.window, cfg.spec.latent_dim, rng);
      ElboLoss l = elbo_loss(batch, model, cfg.beta);
      if (!std::isfinite(l.loss) || !l.grads.all_finite())
        throw nn::NonFiniteError("latent training diverged at iteration " + std::to_string(it));
      nn::adam_step(model.params, l.grads, adam, opt);
      entry.loss += l.loss;
      entry.reconstruction += l.reconstruction;
      entry.accuracy += l.accuracy;
      entry.kl += l.kl;
    }
    const double k = 1.0 / cfg.updates_per_iteration;
    entry.loss *= k;
    entry.reconstruction *= k;
    entry.accuracy *= k;
    entry.kl *= k;
    if (log) log->push_back(entry);
  }
  return model;
}

BeliefTable belief_table(const Dataset& d, const LatentModel& model) {
  BeliefTable table;
  for (const auto& ep : d.episodes) {
    const int n = static_cast<int>(ep.transitions.size());
    std::vector<History> hs;
    hs.reserve(static_cast<std::size_t>(n) + 1);
    for (int j = 0; j <= n; ++j) hs.push_back(history_at(ep, j, model.spec.window));
    std::vector<const History*> ptrs;
    for (const auto& h : hs) ptrs.push_back(&h);
    Mat mean, logvar;
    model.encode_batch(ptrs, mean, logvar);
    table.mean.push_back(std::move(mean));
    table.logvar.push_back(std::move(logvar));
  }
  return table;
}

int z_source_index(const Episode& ep, int index, ZSchedule schedule, int c) {
  const int n = static_cast<int>(ep.transitions.size());
  if (index < 0 || index > n) throw std::out_of_range("z_source_index: index outside the episode");
  if (schedule == ZSchedule::every_tick) return index;
  const int t = index < n ? ep.transitions[static_cast<std::size_t>(index)].t
                          : ep.transitions[static_cast<std::size_t>(n - 1)].t + 1;
  return std::max(0, index - t % c);
}

QData latent_q_data(const Dataset& d, const BeliefTable& beliefs, ZSchedule schedule, int c) {
  QData out = q_data(d);
  const auto n = static_cast<Eigen::Index>(out.size());
  const Eigen::Index dim = beliefs.mean.empty() ? kLatentDim : beliefs.mean.front().cols();
  out.z_mean.resize(n, dim);
  out.z_logvar.resize(n, dim);
  out.z_mean_next.resize(n, dim);
  out.z_logvar_next.resize(n, dim);
  Eigen::Index row = 0;
  for (std::size_t e = 0; e < d.episodes.size(); ++e) {
    const Episode& ep = d.episodes[e];
    for (int i = 0; i < static_cast<int>(ep.transitions.size()); ++i, ++row) {
      const int j = z_source_index(ep, i, schedule, c);
      const int jn = z_source_index(ep, i + 1, schedule, c);
      out.z_mean.row(row) = beliefs.mean[e].row(j);
      out.z_logvar.row(row) = beliefs.logvar[e].row(j);
      out.z_mean_next.row(row) = beliefs.mean[e].row(jn);
      out.z_logvar_next.row(row) = beliefs.logvar[e].row(jn);
    }
  }
  return out;
}

QData latent_q_data(const Dataset& d, const LatentModel& model, ZSchedule schedule) {
  return latent_q_data(d, belief_table(d, model), schedule, model.spec.window);
}

QData memory_q_data(const Dataset& d, int c) {
  if (c < 0) throw std::invalid_argument("memory window must be non-negative");
  QData out;
  const auto n = static_cast<Eigen::Index>(d.num_transitions());
  const Eigen::Index width = static_cast<Eigen::Index>(kFeatureDim) * (c + 1);
  out.s = Mat::Zero(n, width);
  out.s_next = Mat::Zero(n, width);
  out.r.resize(n);
  out.done.resize(n);
  nn::RowVec buf(kFeatureDim);
  Eigen::Index row = 0;
  for (const auto& ep : d.episodes) {
    const int len = static_cast<int>(ep.transitions.size());
    for (int i = 0; i < len; ++i, ++row) {
      const Transition& tr = ep.transitions[static_cast<std::size_t>(i)];
      for (int k = 0; k <= c; ++k) {
        const int j = i - k;
        if (j >= 0) {
          write_net_input(ep.transitions[static_cast<std::size_t>(j)].s, buf.data());
          out.s.row(row).segment(k * kFeatureDim, kFeatureDim) = buf;
        }
        if (k == 0) {
          write_net_input(tr.s_next, buf.data());
          out.s_next.row(row).head(kFeatureDim) = buf;
        } else if (j + 1 >= 0) {
          write_net_input(ep.transitions[static_cast<std::size_t>(j + 1)].s, buf.data());
          out.s_next.row(row).segment(k * kFeatureDim, kFeatureDim) = buf;
        }
      }
      out.r(row) = tr.r;
      out.done(row) = tr.done ? 1.0 : 0.0;
      out.a.push_back(index_of(tr.a));
    }
  }
  return out;
}

QBatch latent_batch_fixed_z(const QData& data, const std::vector<std::size_t>& idx, const Mat& noise,
                            const Mat& noise_next) {
  QBatch b;
  const auto n = static_cast<Eigen::Index>(idx.size());
  const Eigen::Index ds = data.s.cols();
  const Eigen::Index dz = data.z_mean.cols();
  if (noise.rows() != n || noise.cols() != dz || noise_next.rows() != n || noise_next.cols() != dz)
    throw std::invalid_argument("latent batch: noise shape mismatch");
  b.s.resize(n, ds + dz);
  b.s_next.resize(n, ds + dz);
  b.r.resize(n);
  b.done.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]);
    b.s.row(i).head(ds) = data.s.row(k);
    b.s_next.row(i).head(ds) = data.s_next.row(k);
    b.s.row(i).tail(dz) =
        data.z_mean.row(k) + (0.5 * data.z_logvar.row(k).array()).exp().matrix().cwiseProduct(noise.row(i));
    b.s_next.row(i).tail(dz) = data.z_mean_next.row(k) +
                               (0.5 * data.z_logvar_next.row(k).array()).exp().matrix().cwiseProduct(noise_next.row(i));
    b.r(i) = data.r(k);
    b.done(i) = data.done(k);
    b.a.push_back(data.a[static_cast<std::size_t>(k)]);
  }
  return b;
}

CqlLoss latent_cql_loss(const QData& data, const std::vector<std::size_t>& idx, const Mat& noise,
                        const Mat& noise_next, const QFunction& q, const QFunction& q_target, const TrainConfig& cfg,
                        bool with_grads) {
  return cql_loss(latent_batch_fixed_z(data, idx, noise, noise_next), q, q_target, cfg, with_grads);
}

Action act_with_z(const QFunction& q, const FeatureVector& s, const Vec& z) {
  nn::RowVec x(kFeatureDim + z.size());
  write_net_input(s, x.data());
  x.tail(z.size()) = z.transpose();
  return act(q, x);
}

Action act_latent(const QFunction& q, const FeatureVector& s, const History& h, const LatentModel& model) {
  return act_with_z(q, s, model.encode(h).mean);
}

Action act_offline_lili(const QFunction& q, const FeatureVector& s, const History& h, const LatentModel& model, int t,
                        LiliState& state) {
  if (!state.ready || t % model.spec.window == 0) {
    state.z = model.encode(h).mean;
    state.ready = true;
  }
  return act_with_z(q, s, state.z);
}

Action act_memory(const QFunction& q, const std::vector<FeatureVector>& window, int c) {
  nn::RowVec x = nn::RowVec::Zero(static_cast<Eigen::Index>(kFeatureDim) * (c + 1));
  for (int k = 0; k <= c && k < static_cast<int>(window.size()); ++k)
    write_net_input(window[static_cast<std::size_t>(k)], x.data() + static_cast<std::ptrdiff_t>(k) * kFeatureDim);
  return act(q, x);
}

}  // namespace influence
