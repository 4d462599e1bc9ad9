#include "influence/nn/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace influence::nn {

Mat relu(const Mat& x) { return x.cwiseMax(0.0); }

Mat sigmoid(const Mat& x) {
  return x.unaryExpr([](double v) { return v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v)); });
}

Vec logsumexp_rows(const Mat& x) {
  const Vec m = x.rowwise().maxCoeff();
  Vec out(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) out(r) = m(r) + std::log((x.row(r).array() - m(r)).exp().sum());
  return out;
}

Mat softmax_rows(const Mat& x) {
  const Vec lse = logsumexp_rows(x);
  return (x.colwise() - lse).array().exp().matrix();
}

void Mlp::init(ParamBundle& params, Rng& rng) const {
  int fan_in = spec_.input;
  for (int l = 0; l < layers(); ++l) {
    const int out = l < static_cast<int>(spec_.hidden.size()) ? spec_.hidden[static_cast<std::size_t>(l)] : spec_.output;
    init_uniform_fan_in(params.add(weight(l), fan_in, out), fan_in, rng);
    init_uniform_fan_in(params.add(bias(l), 1, out), fan_in, rng);
    fan_in = out;
  }
}

Mat Mlp::forward(const ParamBundle& params, const Mat& x, MlpCache* cache) const {
  if (x.cols() != spec_.input)
    throw std::invalid_argument("mlp " + prefix_ + ": expected input width " + std::to_string(spec_.input) + ", got " +
                                std::to_string(x.cols()));
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  Mat h = x;
  for (int l = 0; l < layers(); ++l) {
    Mat z = matmul(h, params[weight(l)]);
    z.rowwise() += params[bias(l)].row(0);
    if (cache) {
      cache->inputs.push_back(h);
      cache->pre.push_back(z);
    }
    h = l + 1 < layers() ? relu(z) : z;
  }
  return h;
}

Mat Mlp::backward(const ParamBundle& params, const MlpCache& cache, const Mat& dy, ParamBundle& grads) const {
  if (static_cast<int>(cache.inputs.size()) != layers()) throw std::invalid_argument("mlp backward: cache mismatch");
  Mat d = dy;
  for (int l = layers() - 1; l >= 0; --l) {
    const auto li = static_cast<std::size_t>(l);
    if (l + 1 < layers()) d = d.cwiseProduct((cache.pre[li].array() > 0.0).cast<double>().matrix());
    grads[weight(l)] += matmul_tn(cache.inputs[li], d);
    grads[bias(l)] += d.colwise().sum();
    d = matmul_nt(d, params[weight(l)]);
  }
  return d;
}

void Lstm::init(ParamBundle& params, Rng& rng) const {
  const int h = spec_.hidden;
  init_uniform_fan_in(params.add(wx(), spec_.input, 4 * h), spec_.input, rng);
  init_orthogonal_blocks(params.add(wh(), h, 4 * h), rng);
  Mat& bias = params.add(b(), 1, 4 * h);
  bias.setZero();
  bias.middleCols(h, h).setOnes();
}

Mat Lstm::forward(const ParamBundle& params, const std::vector<Mat>& xs, const std::vector<Vec>& masks,
                  LstmCache* cache) const {
  if (xs.size() != masks.size()) throw std::invalid_argument("lstm: one mask per step required");
  const int hd = spec_.hidden;
  const Eigen::Index batch = xs.empty() ? 0 : xs.front().rows();
  Mat h = Mat::Zero(batch, hd), c = Mat::Zero(batch, hd);
  if (cache) *cache = LstmCache{};
  const Mat& Wx = params[wx()];
  const Mat& Wh = params[wh()];
  const auto bias = params[b()].row(0);
  for (std::size_t t = 0; t < xs.size(); ++t) {
    if (xs[t].cols() != spec_.input || xs[t].rows() != batch || masks[t].size() != batch)
      throw std::invalid_argument("lstm: step shape mismatch");
    Mat z = matmul(xs[t], Wx) + matmul(h, Wh);
    z.rowwise() += bias;
    const Mat i = sigmoid(z.middleCols(0, hd));
    const Mat f = sigmoid(z.middleCols(hd, hd));
    const Mat g = z.middleCols(2 * hd, hd).array().tanh().matrix();
    const Mat o = sigmoid(z.middleCols(3 * hd, hd));
    const Mat c_new = f.cwiseProduct(c) + i.cwiseProduct(g);
    const Mat tanh_c = c_new.array().tanh().matrix();
    const Mat h_new = o.cwiseProduct(tanh_c);
    if (cache) {
      cache->x.push_back(xs[t]);
      cache->h_prev.push_back(h);
      cache->c_prev.push_back(c);
      cache->i.push_back(i);
      cache->f.push_back(f);
      cache->g.push_back(g);
      cache->o.push_back(o);
      cache->c_new.push_back(c_new);
      cache->tanh_c.push_back(tanh_c);
      cache->mask.push_back(masks[t]);
    }
    const auto m = masks[t].array();
    for (Eigen::Index r = 0; r < batch; ++r) {
      if (m(r) != 0.0) {
        h.row(r) = h_new.row(r);
        c.row(r) = c_new.row(r);
      }
    }
  }
  return h;
}

void Lstm::backward(const ParamBundle& params, const LstmCache& cache, const Mat& dh_final, ParamBundle& grads) const {
  const int hd = spec_.hidden;
  const Mat& Wh = params[wh()];
  Mat dh = dh_final;
  Mat dc = Mat::Zero(dh.rows(), hd);
  Mat& gWx = grads[wx()];
  Mat& gWh = grads[wh()];
  Mat& gb = grads[b()];
  for (std::size_t k = cache.x.size(); k-- > 0;) {
    const Vec& m = cache.mask[k];
    const Mat keep = m.replicate(1, hd);
    const Mat pass = (1.0 - m.array()).matrix().replicate(1, hd);
    const Mat dh_new = dh.cwiseProduct(keep);
    Mat dc_new = dc.cwiseProduct(keep);
    const Mat dh_pass = dh.cwiseProduct(pass);
    const Mat dc_pass = dc.cwiseProduct(pass);

    const Mat& i = cache.i[k];
    const Mat& f = cache.f[k];
    const Mat& g = cache.g[k];
    const Mat& o = cache.o[k];
    const Mat& tc = cache.tanh_c[k];
    const Mat d_o = dh_new.cwiseProduct(tc);
    dc_new += dh_new.cwiseProduct(o).cwiseProduct((1.0 - tc.array().square()).matrix());
    const Mat d_i = dc_new.cwiseProduct(g);
    const Mat d_g = dc_new.cwiseProduct(i);
    const Mat d_f = dc_new.cwiseProduct(cache.c_prev[k]);

    Mat dz(dh.rows(), 4 * hd);
    dz.middleCols(0, hd) = d_i.cwiseProduct(i.cwiseProduct((1.0 - i.array()).matrix()));
    dz.middleCols(hd, hd) = d_f.cwiseProduct(f.cwiseProduct((1.0 - f.array()).matrix()));
    dz.middleCols(2 * hd, hd) = d_g.cwiseProduct((1.0 - g.array().square()).matrix());
    dz.middleCols(3 * hd, hd) = d_o.cwiseProduct(o.cwiseProduct((1.0 - o.array()).matrix()));

    gWx += matmul_tn(cache.x[k], dz);
    gWh += matmul_tn(cache.h_prev[k], dz);
    gb += dz.colwise().sum();
    dh = matmul_nt(dz, Wh) + dh_pass;
    dc = dc_new.cwiseProduct(f) + dc_pass;
  }
}

}  // namespace influence::nn
