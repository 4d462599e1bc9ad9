#include "influence/rl/cql.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

namespace influence {

QData q_data(const Dataset& d) {
  QData out;
  const auto n = static_cast<Eigen::Index>(d.num_transitions());
  out.s.resize(n, kFeatureDim);
  out.s_next.resize(n, kFeatureDim);
  out.r.resize(n);
  out.done.resize(n);
  out.a.reserve(static_cast<std::size_t>(n));
  Eigen::Index row = 0;
  nn::RowVec buf(kFeatureDim);
  for (const auto& ep : d.episodes)
    for (const auto& tr : ep.transitions) {
      write_net_input(tr.s, buf.data());
      out.s.row(row) = buf;
      write_net_input(tr.s_next, buf.data());
      out.s_next.row(row) = buf;
      out.r(row) = tr.r;
      out.done(row) = tr.done ? 1.0 : 0.0;
      out.a.push_back(index_of(tr.a));
      ++row;
    }
  return out;
}

QBatch make_batch(const QData& data, const std::vector<std::size_t>& idx, nn::Rng& rng) {
  QBatch b;
  const auto n = static_cast<Eigen::Index>(idx.size());
  const Eigen::Index ds = data.s.cols();
  const Eigen::Index dz = data.z_mean.cols();
  b.s.resize(n, ds + dz);
  b.s_next.resize(n, ds + dz);
  b.r.resize(n);
  b.done.resize(n);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]);
    b.s.row(i).head(ds) = data.s.row(k);
    b.s_next.row(i).head(ds) = data.s_next.row(k);
    for (Eigen::Index j = 0; j < dz; ++j) {
      b.s(i, ds + j) = data.z_mean(k, j) + std::exp(0.5 * data.z_logvar(k, j)) * gauss(rng);
      b.s_next(i, ds + j) = data.z_mean_next(k, j) + std::exp(0.5 * data.z_logvar_next(k, j)) * gauss(rng);
    }
    b.r(i) = data.r(k);
    b.done(i) = data.done(k);
    b.a.push_back(data.a[static_cast<std::size_t>(k)]);
  }
  return b;
}

CqlLoss cql_loss(const QBatch& batch, const QFunction& q, const QFunction& q_target, const TrainConfig& cfg,
                 bool with_grads) {
  const auto n = static_cast<Eigen::Index>(batch.size());
  if (n == 0) throw std::invalid_argument("cql_loss: empty batch");
  nn::MlpCache cache;
  const Mat qs = q.net.forward(q.params, batch.s, with_grads ? &cache : nullptr);
  const Mat qn = q_target.net.forward(q_target.params, batch.s_next);
  const Vec lse = nn::logsumexp_rows(qs);

  CqlLoss out;
  Mat dq = Mat::Zero(n, kNumActions);
  const Mat soft = with_grads ? nn::softmax_rows(qs) : Mat();
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int a = batch.a[static_cast<std::size_t>(i)];
    const bool terminal = batch.done(i) > 0.5 && !cfg.bootstrap_time_limit;
    const double y = cfg.reward_scale * batch.r(i) + (terminal ? 0.0 : cfg.gamma * qn.row(i).maxCoeff());
    const double err = qs(i, a) - y;
    out.bellman += err * err;
    out.regularizer += lse(i) - qs(i, a);
    out.mean_data_q += qs(i, a);
    out.ood_gap += (qs.row(i).sum() - qs(i, a)) / (kNumActions - 1) - qs(i, a);
    if (with_grads) {
      dq.row(i) = cfg.alpha * inv_n * soft.row(i);
      dq(i, a) += 2.0 * inv_n * err - cfg.alpha * inv_n;
    }
  }
  out.bellman *= inv_n;
  out.regularizer *= inv_n;
  out.mean_data_q *= inv_n;
  out.ood_gap *= inv_n;
  out.loss = out.bellman + cfg.alpha * out.regularizer;
  if (with_grads) {
    out.grads = q.params.zeros_like();
    q.net.backward(q.params, cache, dq, out.grads);
  }
  return out;
}

void TrainingCurve::write_csv(std::ostream& out) const {
  out << "iteration,loss,bellman,regularizer,mean_data_q,ood_gap,accuracy\n";
  for (const auto& it : iterations)
    out << it.iteration << ',' << it.loss << ',' << it.bellman << ',' << it.regularizer << ',' << it.mean_data_q
        << ',' << it.ood_gap << ',' << it.accuracy << '\n';
}

namespace {

std::vector<std::size_t> sample_indices(std::size_t n, int batch, nn::Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<std::size_t> idx(static_cast<std::size_t>(batch));
  for (auto& i : idx) i = pick(rng);
  return idx;
}

void check_finite(double loss, const nn::ParamBundle& grads, int iteration, int update) {
  if (std::isfinite(loss) && grads.all_finite()) return;
  std::ostringstream msg;
  msg << "training diverged at iteration " << iteration << ", update " << update << ": loss=" << loss
      << (grads.all_finite() ? "" : " (non-finite gradient)");
  throw nn::NonFiniteError(msg.str());
}

void validate(const TrainConfig& cfg, std::size_t n) {
  if (n == 0) throw std::invalid_argument("training data is empty");
  if (cfg.batch_size < 1 || cfg.iterations < 0 || cfg.updates_per_iteration < 1 || cfg.target_update_period < 1)
    throw std::invalid_argument("invalid training schedule");
}

// Linear decay from lr to lr_final over the whole run; constant when
// lr_final is negative.
double lr_at(const TrainConfig& cfg, long update) {
  if (cfg.lr_final < 0) return cfg.lr;
  const double total = static_cast<double>(cfg.iterations) * cfg.updates_per_iteration;
  const double frac = total > 0 ? static_cast<double>(update) / total : 0.0;
  return cfg.lr + (cfg.lr_final - cfg.lr) * frac;
}

}  // namespace

QFunction train_q(const QData& data, const TrainConfig& cfg, TrainingCurve* curve) {
  validate(cfg, data.size());
  nn::Rng rng(cfg.seed);
  QFunction q = make_q_function(data.input_dim(), derive_seed(cfg.seed, 17), cfg.hidden);
  QFunction target = q;
  nn::AdamState adam = nn::adam_init(q.params);
  nn::AdamConfig opt{cfg.lr};
  long updates = 0;
  for (int it = 0; it < cfg.iterations; ++it) {
    IterationLog log{it};
    for (int u = 0; u < cfg.updates_per_iteration; ++u) {
      const QBatch batch = make_batch(data, sample_indices(data.size(), cfg.batch_size, rng), rng);
      CqlLoss l = cql_loss(batch, q, target, cfg);
      check_finite(l.loss, l.grads, it, u);
      opt.lr = lr_at(cfg, updates);
      nn::adam_step(q.params, l.grads, adam, opt);
      if (++updates % cfg.target_update_period == 0) target.params = q.params;
      log.loss += l.loss;
      log.bellman += l.bellman;
      log.regularizer += l.regularizer;
      log.mean_data_q += l.mean_data_q;
      log.ood_gap += l.ood_gap;
    }
    const double k = 1.0 / cfg.updates_per_iteration;
    log.loss *= k;
    log.bellman *= k;
    log.regularizer *= k;
    log.mean_data_q *= k;
    log.ood_gap *= k;
    if (curve) curve->iterations.push_back(log);
  }
  return q;
}

QFunction train_cql(const Dataset& d, const TrainConfig& cfg, TrainingCurve* curve) {
  return train_q(q_data(d), cfg, curve);
}

BcLoss bc_loss(const Mat& x, const std::vector<int>& a, const QFunction& net, bool with_grads) {
  const auto n = static_cast<Eigen::Index>(a.size());
  if (n == 0 || x.rows() != n) throw std::invalid_argument("bc_loss: empty or mismatched batch");
  nn::MlpCache cache;
  const Mat logits = net.net.forward(net.params, x, with_grads ? &cache : nullptr);
  const Mat p = nn::softmax_rows(logits);
  const Vec lse = nn::logsumexp_rows(logits);
  BcLoss out;
  Mat d = p / static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int ai = a[static_cast<std::size_t>(i)];
    out.loss += lse(i) - logits(i, ai);
    if (argmax_action(logits.row(i).transpose()) == ai) out.accuracy += 1.0;
    d(i, ai) -= 1.0 / static_cast<double>(n);
  }
  out.loss /= static_cast<double>(n);
  out.accuracy /= static_cast<double>(n);
  if (with_grads) {
    out.grads = net.params.zeros_like();
    net.net.backward(net.params, cache, d, out.grads);
  }
  return out;
}

QFunction train_bc(const QData& data, const TrainConfig& cfg, TrainingCurve* curve) {
  validate(cfg, data.size());
  nn::Rng rng(cfg.seed);
  QFunction net = make_q_function(static_cast<int>(data.s.cols()), derive_seed(cfg.seed, 17), cfg.hidden);
  nn::AdamState adam = nn::adam_init(net.params);
  nn::AdamConfig opt{cfg.lr};
  long updates = 0;
  for (int it = 0; it < cfg.iterations; ++it) {
    IterationLog log{it};
    for (int u = 0; u < cfg.updates_per_iteration; ++u) {
      const auto idx = sample_indices(data.size(), cfg.batch_size, rng);
      Mat x(static_cast<Eigen::Index>(idx.size()), data.s.cols());
      std::vector<int> a;
      for (std::size_t i = 0; i < idx.size(); ++i) {
        x.row(static_cast<Eigen::Index>(i)) = data.s.row(static_cast<Eigen::Index>(idx[i]));
        a.push_back(data.a[idx[i]]);
      }
      BcLoss l = bc_loss(x, a, net);
      check_finite(l.loss, l.grads, it, u);
      opt.lr = lr_at(cfg, updates++);
      nn::adam_step(net.params, l.grads, adam, opt);
      log.loss += l.loss;
      log.accuracy += l.accuracy;
    }
    log.loss /= cfg.updates_per_iteration;
    log.accuracy /= cfg.updates_per_iteration;
    if (curve) curve->iterations.push_back(log);
  }
  return net;
}

QFunction train_bc(const Dataset& d, const TrainConfig& cfg, TrainingCurve* curve) {
  return train_bc(q_data(d), cfg, curve);
}

}  // namespace influence
