#include <doctest.h>

#include <cmath>
#include <random>

#include "influence/nn/kernels.hpp"
#include "influence/nn/layers.hpp"
#include "influence/nn/optim.hpp"
#include "influence/nn/params.hpp"

using namespace influence::nn;

namespace {

Mat random_mat(Eigen::Index r, Eigen::Index c, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

// Naive triple loop used as the product oracle.
Mat oracle_product(const Mat& a, const Mat& b) {
  Mat c = Mat::Zero(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j)
      for (Eigen::Index k = 0; k < a.cols(); ++k) c(i, j) += a(i, k) * b(k, j);
  return c;
}

// Fixed random projection of the output, so the loss is a generic scalar.
struct Projection {
  Mat r;
  double operator()(const Mat& y) const { return (y.array() * r.array()).sum() + 0.5 * y.squaredNorm(); }
  Mat grad(const Mat& y) const { return r + y; }
};

}  // namespace

TEST_CASE("serial and parallel kernels agree with the loop oracle") {
  std::mt19937 rng(3);
  for (auto [m, k, n] : {std::array<int, 3>{1, 1, 1}, {7, 13, 5}, {64, 256, 6}, {300, 71, 129}}) {
    const Mat a = random_mat(m, k, rng), b = random_mat(k, n, rng);
    const Mat at = a.transpose(), bt = b.transpose();
    const Mat expected = oracle_product(a, b);
    CHECK((serial::matmul(a, b) - expected).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((parallel::matmul(a, b) - expected).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((serial::matmul_tn(at, b) - expected).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((parallel::matmul_tn(at, b) - expected).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((serial::matmul_nt(a, bt) - expected).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((parallel::matmul_nt(a, bt) - expected).cwiseAbs().maxCoeff() < 1e-10);
  }
  set_kernel_mode(KernelMode::serial);
  CHECK(kernel_mode() == KernelMode::serial);
  set_kernel_mode(KernelMode::parallel);
}

TEST_CASE("degenerate and hand-computed forward passes") {
  ParamBundle p;
  Rng rng(1);
  Mlp zero({4, {5}, 3}, "z/");
  zero.init(p, rng);
  p["z/W0"].setZero();
  p["z/W1"].setZero();
  p["z/b1"] << 0.25, -1.5, 2.0;
  std::mt19937 g(1);
  const Mat out = zero.forward(p, random_mat(6, 4, g));
  for (Eigen::Index i = 0; i < 6; ++i) CHECK(out.row(i) == p["z/b1"]);

  Mlp lin({3, {}, 2}, "l/");
  lin.init(p, rng);
  p["l/W0"] << 1, 2, 3, 4, 5, 6;
  p["l/b0"] << 0.5, -1;
  Mat x(1, 3);
  x << 1, 2, 3;
  const Mat y = lin.forward(p, x);
  CHECK(y(0, 0) == doctest::Approx(22.5));
  CHECK(y(0, 1) == doctest::Approx(27.0));
  CHECK_THROWS(lin.forward(p, Mat::Zero(1, 4)));
}

TEST_CASE("fully padded window yields the zero state") {
  ParamBundle p;
  Rng rng(2);
  Lstm cell({5, 8}, "c/");
  cell.init(p, rng);
  std::mt19937 g(2);
  std::vector<Mat> xs(4, random_mat(3, 5, g));
  std::vector<Vec> masks(4, Vec::Zero(3));
  CHECK(cell.forward(p, xs, masks).cwiseAbs().maxCoeff() == 0.0);
  masks[2](1) = 1.0;
  const Mat h = cell.forward(p, xs, masks);
  CHECK(h.row(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(h.row(1).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("quadratic loss on a linear layer matches the closed form") {
  ParamBundle p;
  Rng rng(4);
  Mlp lin({3, {}, 1}, "q/");
  lin.init(p, rng);
  Mat x(2, 3);
  x << 1, -2, 0.5, 3, 1, -1;
  MlpCache cache;
  const Mat y = lin.forward(p, x, &cache);
  ParamBundle grads = p.zeros_like();
  lin.backward(p, cache, y, grads);  // L = 0.5 * sum y^2
  const Mat expected_w = x.transpose() * y;
  CHECK((grads["q/W0"] - expected_w).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(grads["q/b0"](0, 0) == doctest::Approx(y.sum()));
}

TEST_CASE("Q-network backward matches finite differences") {
  ParamBundle p;
  Rng rng(5);
  Mlp q({64, {256, 256, 256}, 6}, "q/");
  q.init(p, rng);
  std::mt19937 g(5);
  const Mat x = random_mat(8, 64, g);
  const Projection proj{random_mat(8, 6, g)};
  auto loss = [&](const ParamBundle& pp) { return proj(q.forward(pp, x)); };
  auto with_grad = [&](const ParamBundle& pp) {
    MlpCache c;
    const Mat y = q.forward(pp, x, &c);
    ParamBundle gr = pp.zeros_like();
    q.backward(pp, c, proj.grad(y), gr);
    return std::make_pair(proj(y), gr);
  };
  GradCheckOptions opt;
  opt.max_samples = 100;
  opt.tol = 1e-4;
  const auto report = grad_check(with_grad, p, opt, loss);
  CHECK(report.checked == 100);
  CHECK_MESSAGE(report.max_rel_error < 1e-4, report.max_rel_error);
}

TEST_CASE("recurrent encoder backward matches finite differences over 4 steps") {
  ParamBundle p;
  Rng rng(6);
  Lstm cell({7, 12}, "r/");
  cell.init(p, rng);
  std::mt19937 g(6);
  std::vector<Mat> xs;
  std::vector<Vec> masks;
  for (int t = 0; t < 4; ++t) {
    xs.push_back(random_mat(5, 7, g));
    Vec m = Vec::Ones(5);
    if (t < 2) m(0) = 0.0;
    masks.push_back(m);
  }
  const Projection proj{random_mat(5, 12, g)};
  auto loss = [&](const ParamBundle& pp) { return proj(cell.forward(pp, xs, masks)); };
  auto with_grad = [&](const ParamBundle& pp) {
    LstmCache c;
    const Mat h = cell.forward(pp, xs, masks, &c);
    ParamBundle gr = pp.zeros_like();
    cell.backward(pp, c, proj.grad(h), gr);
    return std::make_pair(proj(h), gr);
  };
  GradCheckOptions opt;
  opt.max_samples = 0;
  const auto report = grad_check(with_grad, p, opt, loss);
  CHECK(report.passed());
  CHECK(report.max_rel_error < 1e-3);
}

TEST_CASE("adam") {
  SUBCASE("zero gradient leaves parameters unchanged") {
    ParamBundle p;
    p.add("w", 2, 2).setConstant(0.7);
    const ParamBundle before = p;
    AdamState s = adam_init(p);
    for (int i = 0; i < 3; ++i) adam_step(p, p.zeros_like(), s);
    CHECK(p == before);
  }
  SUBCASE("default learning rate") { CHECK(AdamConfig{}.lr == 3e-4); }
  SUBCASE("scalar trajectory follows the hand recurrence") {
    for (const std::vector<double>& gs : {std::vector<double>(5, 0.5), std::vector<double>{0.5, -1.0, 2.0, 0.1, 0.3}}) {
      ParamBundle p;
      p.add("w", 1, 1)(0, 0) = 1.0;
      AdamState s = adam_init(p);
      const AdamConfig cfg{0.1, 0.9, 0.999, 1e-8};
      double w = 1.0, m = 0.0, v = 0.0;
      for (std::size_t t = 1; t <= gs.size(); ++t) {
        ParamBundle gr = p.zeros_like();
        gr["w"](0, 0) = gs[t - 1];
        adam_step(p, gr, s, cfg);
        m = 0.9 * m + 0.1 * gs[t - 1];
        v = 0.999 * v + 0.001 * gs[t - 1] * gs[t - 1];
        const double mh = m / (1.0 - std::pow(0.9, static_cast<double>(t)));
        const double vh = v / (1.0 - std::pow(0.999, static_cast<double>(t)));
        w -= 0.1 * mh / (std::sqrt(vh) + 1e-8);
        CHECK(p["w"](0, 0) == doctest::Approx(w).epsilon(1e-12));
      }
    }
  }
  SUBCASE("non-finite gradients are rejected") {
    ParamBundle p;
    p.add("w", 1, 1).setZero();
    AdamState s = adam_init(p);
    ParamBundle gr = p.zeros_like();
    gr["w"](0, 0) = std::nan("");
    CHECK_THROWS_AS(adam_step(p, gr, s), NonFiniteError);
  }
}

TEST_CASE("grad_check reporting") {
  SUBCASE("empty bundle passes trivially") {
    const ParamBundle empty;
    const auto r = grad_check([](const ParamBundle& p) { return std::make_pair(0.0, p.zeros_like()); }, empty);
    CHECK(r.passed());
    CHECK(r.checked == 0);
  }
  ParamBundle p;
  Rng rng(8);
  Mlp net({4, {6}, 2}, "n/");
  net.init(p, rng);
  std::mt19937 g(8);
  const Mat x = random_mat(3, 4, g);
  const Projection proj{random_mat(3, 2, g)};
  auto with_grad = [&](const ParamBundle& pp) {
    MlpCache c;
    const Mat y = net.forward(pp, x, &c);
    ParamBundle gr = pp.zeros_like();
    net.backward(pp, c, proj.grad(y), gr);
    return std::make_pair(proj(y), gr);
  };
  SUBCASE("seed changes do not change the verdict") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      GradCheckOptions opt;
      opt.seed = seed;
      opt.max_samples = 20;
      CHECK(grad_check(with_grad, p, opt).passed());
    }
  }
  SUBCASE("a doubled coordinate is detected") {
    auto corrupted = [&](const ParamBundle& pp) {
      auto res = with_grad(pp);
      res.second["n/W0"](1, 2) *= 2.0;
      return res;
    };
    GradCheckOptions opt;
    opt.max_samples = 0;
    const auto r = grad_check(corrupted, p, opt);
    REQUIRE(r.failures.size() == 1);
    CHECK(r.failures[0].tensor == "n/W0");
  }
}

TEST_CASE("checkpoints round-trip and detect corruption") {
  Checkpoint ck;
  Rng rng(9);
  Mlp({3, {4}, 2}, "a/").init(ck.params, rng);
  Lstm({2, 3}, "b/").init(ck.params, rng);
  ck.meta = {{"format", "test"}, {"n", 3}};
  const std::string bytes = serialize_checkpoint(ck);
  const Checkpoint back = deserialize_checkpoint(bytes);
  CHECK(back.params == ck.params);
  CHECK(back.meta == ck.meta);
  CHECK(serialize_checkpoint(back) == bytes);
  std::string bad = bytes;
  bad[bad.size() / 2] ^= 1;
  CHECK_THROWS_AS(deserialize_checkpoint(bad), CheckpointError);
  CHECK_THROWS(deserialize_checkpoint(bytes.substr(0, 20)));
}

TEST_CASE("param bundle bookkeeping") {
  ParamBundle p;
  p.add("x/a", 2, 3).setConstant(1.0);
  p.add("y/b", 1, 2).setConstant(2.0);
  CHECK(p.size() == 8);
  CHECK(p.flat(6) == 2.0);
  CHECK(p.subset("x/").tensor_count() == 1);
  CHECK_THROWS(p.add("x/a", 1, 1));
  ParamBundle q = p.zeros_like();
  q.axpy(0.5, p);
  CHECK(q["y/b"](0, 1) == 1.0);
  p["x/a"](0, 0) = std::numeric_limits<double>::infinity();
  CHECK(!p.all_finite());
}
