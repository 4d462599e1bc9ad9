#include <doctest.h>

#include <cmath>
#include <random>

#include "influence/eval/agents.hpp"
#include "influence/rl/cql.hpp"

using namespace influence;

namespace {

constexpr double kAbsent = -1000.0;  // exp underflows to exactly zero

// Network whose output is its bias row for every input.
QFunction constant_q(const std::array<double, kNumActions>& values) {
  QFunction q = make_q_function(3, 1, {});
  q.params["q/W0"].setZero();
  for (int a = 0; a < kNumActions; ++a) q.params["q/b0"](0, a) = values[static_cast<std::size_t>(a)];
  return q;
}

QBatch one_transition(int a, double r, bool done) {
  QBatch b;
  b.s = Mat::Ones(1, 3);
  b.s_next = Mat::Ones(1, 3);
  b.a = {a};
  b.r = Vec::Constant(1, r);
  b.done = Vec::Constant(1, done ? 1.0 : 0.0);
  return b;
}

QBatch random_batch(int n, int dim, std::mt19937& rng) {
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> act(0, kNumActions - 1);
  QBatch b;
  b.s = Mat(n, dim);
  b.s_next = Mat(n, dim);
  for (Eigen::Index i = 0; i < b.s.size(); ++i) {
    b.s.data()[i] = g(rng);
    b.s_next.data()[i] = g(rng);
  }
  b.r = Vec(n);
  b.done = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    b.a.push_back(act(rng));
    b.r(i) = g(rng);
  }
  return b;
}

Dataset small_corpus(int episodes = 12) {
  GenerateConfig g;
  g.layout = builtin_layout("asymmetric_advantages");
  g.ego_spec = PartnerSpec::greedy(Preference::none, 0.3);
  g.partner_spec = PartnerSpec::greedy(Preference::none, 0.1);
  g.episodes = episodes;
  g.horizon = 60;
  g.seed = 8;
  return generate(g);
}

TrainConfig tiny_schedule() {
  TrainConfig c;
  c.hidden = {16, 16};
  c.batch_size = 32;
  c.iterations = 3;
  c.updates_per_iteration = 10;
  c.target_update_period = 7;
  c.seed = 4;
  return c;
}

}  // namespace

TEST_CASE("defaults") {
  const TrainConfig c;
  CHECK(c.gamma == 0.99);
  CHECK(c.batch_size == 256);
  CHECK(c.target_update_period == 500);
  CHECK(c.updates_per_iteration == 200);
  CHECK(c.iterations == 100);
  CHECK(c.lr == 3e-4);
  CHECK(c.alpha == 1.0);
  CHECK(c.hidden == std::vector<int>{256, 256, 256});
}

TEST_CASE("two-action toy loss by hand") {
  const QFunction q = constant_q({0.5, 1.5, kAbsent, kAbsent, kAbsent, kAbsent});
  const QFunction target = constant_q({2.0, -1.0, kAbsent, kAbsent, kAbsent, kAbsent});
  TrainConfig cfg;
  cfg.gamma = 0.9;
  cfg.alpha = 0.7;
  const auto l = cql_loss(one_transition(0, 1.0, false), q, target, cfg);
  const double y = 1.0 + 0.9 * 2.0;
  const double bellman = (0.5 - y) * (0.5 - y);
  const double reg = std::log(std::exp(0.5) + std::exp(1.5)) - 0.5;
  CHECK(std::abs(l.bellman - bellman) < 1e-10);
  CHECK(std::abs(l.regularizer - reg) < 1e-10);
  CHECK(std::abs(l.loss - (bellman + 0.7 * reg)) < 1e-10);
  CHECK(l.mean_data_q == 0.5);

  SUBCASE("terminal without time-limit bootstrapping drops the target term") {
    cfg.bootstrap_time_limit = false;
    const auto t = cql_loss(one_transition(0, 1.0, true), q, target, cfg);
    CHECK(std::abs(t.bellman - 0.25) < 1e-10);
  }
  SUBCASE("time-limit ends bootstrap by default") {
    const auto t = cql_loss(one_transition(0, 1.0, true), q, target, cfg);
    CHECK(std::abs(t.bellman - bellman) < 1e-10);
  }
}

TEST_CASE("regularizer off reduces to fitted Q") {
  std::mt19937 rng(1);
  const QBatch b = random_batch(16, 5, rng);
  const QFunction q = make_q_function(5, 2, {8});
  const QFunction t = make_q_function(5, 3, {8});
  TrainConfig cfg;
  cfg.alpha = 0.0;
  const auto l = cql_loss(b, q, t, cfg);
  CHECK(l.loss == l.bellman);
  CHECK_THROWS(cql_loss(QBatch{}, q, t, cfg));
}

TEST_CASE("property: regularizer is nonnegative and the loss is monotone in alpha") {
  std::mt19937 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const QBatch b = random_batch(8, 4, rng);
    const QFunction q = make_q_function(4, rng(), {6});
    const QFunction t = make_q_function(4, rng(), {6});
    TrainConfig cfg;
    double previous = -1e300;
    for (double alpha : {0.0, 0.5, 1.0, 5.0}) {
      cfg.alpha = alpha;
      const auto l = cql_loss(b, q, t, cfg, false);
      CHECK(l.regularizer >= 0.0);
      CHECK(l.loss >= previous);
      previous = l.loss;
    }
  }
}

TEST_CASE("greedy action selection") {
  CHECK(argmax_action(Vec::Zero(kNumActions)) == index_of(Action::stay));
  Vec v = Vec::Zero(kNumActions);
  v(1) = 1.0;
  CHECK(action_at(argmax_action(v)) == Action::up);
  std::mt19937 rng(5);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> pos(0.01, 10.0);
  for (int i = 0; i < 1000; ++i) {
    Vec q(kNumActions);
    for (int a = 0; a < kNumActions; ++a) q(a) = std::round(g(rng) * 2.0) / 2.0;  // frequent ties
    const double c = pos(rng), shift = g(rng) * 100.0;
    const Vec moved = (c * q.array() + shift).matrix();
    CHECK(argmax_action(moved) == argmax_action(q));
  }
}

TEST_CASE("behavior cloning") {
  SUBCASE("uniform logits start at ln 6") {
    QFunction net = make_q_function(kFeatureDim, 1, {8});
    for (std::size_t i = 0; i < net.params.tensor_count(); ++i) net.params.tensor(i).setZero();
    const auto l = bc_loss(Mat::Ones(5, kFeatureDim), {0, 1, 2, 3, 4}, net, false);
    CHECK(l.loss == doctest::Approx(std::log(6.0)).epsilon(1e-12));
  }
  SUBCASE("a single repeated pair is memorized") {
    QData d;
    d.s = Mat::Constant(10, 4, 0.3);
    d.s_next = d.s;
    d.a.assign(10, index_of(Action::left));
    d.r = Vec::Zero(10);
    d.done = Vec::Zero(10);
    TrainConfig cfg = tiny_schedule();
    cfg.lr = 1e-2;
    const QFunction net = train_bc(d, cfg);
    CHECK(act(net, nn::RowVec(d.s.row(0))) == Action::left);
  }
  SUBCASE("filtered BC trains on the top episodes") {
    const Dataset d = small_corpus();
    AlgoConfig cfg;
    cfg.train = tiny_schedule();
    cfg.filter_k = 4;
    const PolicyBundle p = train_policy(Algo::filtered_bc, d, cfg);
    CHECK(p.q.params == train_bc(filter_top_k(d, 4), cfg.train).params);
  }
}

TEST_CASE("training is bit-reproducible and logs every iteration") {
  const Dataset d = small_corpus(4);
  const TrainConfig cfg = tiny_schedule();
  TrainingCurve c1, c2;
  const QFunction a = train_cql(d, cfg, &c1);
  const QFunction b = train_cql(d, cfg, &c2);
  CHECK(a.params == b.params);
  REQUIRE(c1.iterations.size() == 3);
  CHECK(c1.iterations[2].ood_gap == c2.iterations[2].ood_gap);
  std::ostringstream csv;
  c1.write_csv(csv);
  CHECK(csv.str().rfind("iteration,loss,bellman,regularizer,mean_data_q,ood_gap,accuracy\n", 0) == 0);
}

TEST_CASE("divergence aborts with a diagnostic") {
  Dataset d = small_corpus(2);
  d.episodes[0].transitions[3].r = std::numeric_limits<double>::infinity();
  TrainConfig cfg = tiny_schedule();
  cfg.batch_size = 200;
  CHECK_THROWS_AS(train_cql(d, cfg), nn::NonFiniteError);
}
