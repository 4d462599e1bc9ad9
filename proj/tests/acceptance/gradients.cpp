#include <numeric>

#include "common.hpp"
#include "influence/latent/latent.hpp"

using namespace influence;

namespace {

constexpr std::size_t kPointsPerDraw = 120;
constexpr int kDraws = 2;

Dataset small_corpus() {
  GenerateConfig g;
  g.layout = builtin_layout("open_asymmetric_advantages");
  g.ego_spec = PartnerSpec::greedy(Preference::none, 0.2);
  g.partner_spec = PartnerSpec::adaptive(Preference::onion, 0.2);
  g.horizon = 60;
  g.episodes = 2;
  g.seed = 77;
  return attach_histories(generate(g), kHistoryWindow);
}

std::vector<std::size_t> first_rows(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

struct Tally {
  std::size_t checked = 0;
  double worst = 0.0;
  std::size_t failures = 0;
  void add(const nn::GradCheckReport& r) {
    checked += r.checked;
    worst = std::max(worst, r.max_rel_error);
    failures += r.failures.size();
    for (const auto& f : r.failures)
      if (detail.size() < 400) detail += acceptance::cat(" [", f.tensor, "#", f.index, " a=", f.analytic, " n=", f.numeric, "]");
  }
  std::string detail;
  bool ok() const { return failures == 0 && worst < 1e-3 && checked >= 100; }
  std::string str(const char* name) const {
    return acceptance::cat(name, " ", checked, " pts max ", worst, failures ? " FAIL" : "", detail, "; ");
  }
};

nn::GradCheckOptions options(int draw) {
  nn::GradCheckOptions o;
  o.eps = 1e-5;
  o.tol = 1e-3;
  o.max_samples = kPointsPerDraw;
  o.seed = 1000 + static_cast<std::uint64_t>(draw);
  o.abs_floor = 1e-5;
  return o;
}

acceptance::Outcome gradient_suite() {
  const Dataset d = small_corpus();
  const QData plain = q_data(d);
  const auto idx = first_rows(16);
  nn::Rng rng(5);
  const QBatch batch = make_batch(plain, idx, rng);
  TrainConfig cfg;
  cfg.alpha = 1.0;

  Tally cql, bc, elbo, elbo_ns, latent;
  for (int draw = 0; draw < kDraws; ++draw) {
    const std::uint64_t seed = 31 + static_cast<std::uint64_t>(draw);
    const QFunction q = make_q_function(kFeatureDim, seed);
    const QFunction target = make_q_function(kFeatureDim, seed + 100);
    auto with = [&](const nn::ParamBundle& p) {
      QFunction qq = q;
      qq.params = p;
      return qq;
    };
    cql.add(nn::grad_check(
        [&](const nn::ParamBundle& p) {
          auto l = cql_loss(batch, with(p), target, cfg);
          return std::make_pair(l.loss, l.grads);
        },
        q.params, options(draw), [&](const nn::ParamBundle& p) { return cql_loss(batch, with(p), target, cfg, false).loss; }));

    bc.add(nn::grad_check(
        [&](const nn::ParamBundle& p) {
          auto l = bc_loss(batch.s, batch.a, with(p));
          return std::make_pair(l.loss, l.grads);
        },
        q.params, options(draw), [&](const nn::ParamBundle& p) { return bc_loss(batch.s, batch.a, with(p), false).loss; }));

    for (DecoderKind kind : {DecoderKind::action, DecoderKind::next_state}) {
      LatentSpec spec;
      spec.decoder = kind;
      const LatentModel model = make_latent_model(spec, seed);
      std::vector<std::pair<std::size_t, std::size_t>> picks;
      for (std::size_t t = 0; t < 12; ++t) picks.emplace_back(t % 2, t * 4);
      nn::Rng erng(seed);
      ElboBatch eb = make_elbo_batch(d, picks, spec.window, spec.latent_dim, erng);
      freeze_prior(eb, model);
      auto with_m = [&](const nn::ParamBundle& p) {
        LatentModel m = model;
        m.params = p;
        return m;
      };
      Tally& t = kind == DecoderKind::action ? elbo : elbo_ns;
      t.add(nn::grad_check(
          [&](const nn::ParamBundle& p) {
            auto l = elbo_loss(eb, with_m(p), 0.1);
            return std::make_pair(l.loss, l.grads);
          },
          model.params, options(draw),
          [&](const nn::ParamBundle& p) { return elbo_loss(eb, with_m(p), 0.1, false).loss; }));
    }

    const LatentModel enc = make_latent_model(LatentSpec{}, seed + 7);
    const QData ld = latent_q_data(d, enc, ZSchedule::every_tick);
    nn::Rng nrng(seed);
    std::normal_distribution<double> normal;
    Mat noise(static_cast<Eigen::Index>(idx.size()), kLatentDim), noise_next(noise.rows(), noise.cols());
    for (Eigen::Index i = 0; i < noise.size(); ++i) {
      noise.data()[i] = normal(nrng);
      noise_next.data()[i] = normal(nrng);
    }
    const QFunction lq = make_q_function(ld.input_dim(), seed);
    const QFunction lt = make_q_function(ld.input_dim(), seed + 100);
    auto with_l = [&](const nn::ParamBundle& p) {
      QFunction qq = lq;
      qq.params = p;
      return qq;
    };
    latent.add(nn::grad_check(
        [&](const nn::ParamBundle& p) {
          auto l = latent_cql_loss(ld, idx, noise, noise_next, with_l(p), lt, cfg);
          return std::make_pair(l.loss, l.grads);
        },
        lq.params, options(draw),
        [&](const nn::ParamBundle& p) { return latent_cql_loss(ld, idx, noise, noise_next, with_l(p), lt, cfg, false).loss; }));
  }
  const bool pass = cql.ok() && bc.ok() && elbo.ok() && elbo_ns.ok() && latent.ok();
  return {pass, cql.str("cql_loss") + bc.str("bc_loss") + elbo.str("elbo_loss") + elbo_ns.str("elbo_loss[next_state]") +
                    latent.str("latent_cql_loss")};
}

const acceptance::Register reg("gradient_suite", "fast", gradient_suite);

}  // namespace
