#include "chi/tensor.hpp"

#include <cmath>

namespace chi {

bool all_finite(const Vec& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

MlpParams mlp_init(const std::vector<int>& dims, RandomStream& rng) {
  if (dims.size() < 2) throw std::invalid_argument("mlp_init: need at least input and output dims");
  MlpParams p;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    int in = dims[i];
    int out = dims[i + 1];
    if (in < 1 || out < 1) throw std::invalid_argument("mlp_init: dims must be >= 1");
    LinearLayer layer;
    layer.w = Matrix(out, in);
    layer.b.assign(static_cast<std::size_t>(out), 0.0);
    double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (double& x : layer.w.data) x = rng.uniform(-bound, bound);
    for (double& x : layer.b) x = rng.uniform(-bound, bound);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

namespace {

void affine(const LinearLayer& l, const Vec& x, Vec& out) {
  const int rows = l.w.rows;
  const int cols = l.w.cols;
  out.resize(static_cast<std::size_t>(rows));
  const double* wp = l.w.data.data();
  for (int r = 0; r < rows; ++r) {
    double acc = l.b[static_cast<std::size_t>(r)];
    const double* row = wp + static_cast<std::size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) acc += row[c] * x[static_cast<std::size_t>(c)];
    out[static_cast<std::size_t>(r)] = acc;
  }
}

}  // namespace

Vec mlp_forward(const MlpParams& p, const Vec& input) {
  MlpCache cache;
  return mlp_forward(p, input, cache);
}

Vec mlp_forward(const MlpParams& p, const Vec& input, MlpCache& cache) {
  if (static_cast<int>(input.size()) != p.in_dim())
    throw std::invalid_argument("mlp_forward: input size does not match first layer");
  cache.acts.assign(1, input);
  Vec cur = input;
  Vec next;
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    affine(p.layers[i], cur, next);
    if (i + 1 < p.layers.size()) {
      for (double& x : next) x = std::tanh(x);
    }
    cache.acts.push_back(next);
    cur.swap(next);
  }
  return cur;
}

void MlpGrads::zero() {
  for (auto& l : layers) {
    std::fill(l.w.data.begin(), l.w.data.end(), 0.0);
    std::fill(l.b.begin(), l.b.end(), 0.0);
  }
  std::fill(input.begin(), input.end(), 0.0);
}

void MlpGrads::scale(double s) {
  for (auto& l : layers) {
    for (double& x : l.w.data) x *= s;
    for (double& x : l.b) x *= s;
  }
  for (double& x : input) x *= s;
}

MlpGrads mlp_grads_like(const MlpParams& p) {
  MlpGrads g;
  for (const auto& l : p.layers) {
    LinearLayer zl;
    zl.w = Matrix(l.w.rows, l.w.cols);
    zl.b.assign(l.b.size(), 0.0);
    g.layers.push_back(std::move(zl));
  }
  g.input.assign(static_cast<std::size_t>(p.in_dim()), 0.0);
  return g;
}

void mlp_backward(const MlpParams& p, const MlpCache& cache, const Vec& output_grad, MlpGrads& g) {
  const std::size_t n_layers = p.layers.size();
  if (cache.acts.size() != n_layers + 1)
    throw std::invalid_argument("mlp_backward: cache does not match network depth");
  if (output_grad.size() != static_cast<std::size_t>(p.out_dim()))
    throw std::invalid_argument("mlp_backward: output_grad size mismatch");

  Vec delta = output_grad;  // dL/d(pre-activation) of the layer being processed
  Vec prev_delta;
  for (std::size_t li = n_layers; li-- > 0;) {
    const LinearLayer& layer = p.layers[li];
    const Vec& in_act = cache.acts[li];
    const Vec& out_act = cache.acts[li + 1];
    const int rows = layer.w.rows;
    const int cols = layer.w.cols;

    // Hidden layers cached post-tanh: dpre = dout * (1 - h^2).
    if (li + 1 < n_layers) {
      for (int r = 0; r < rows; ++r) {
        double h = out_act[static_cast<std::size_t>(r)];
        delta[static_cast<std::size_t>(r)] *= 1.0 - h * h;
      }
    }

    LinearLayer& gl = g.layers[li];
    for (int r = 0; r < rows; ++r) {
      const double d = delta[static_cast<std::size_t>(r)];
      gl.b[static_cast<std::size_t>(r)] += d;
      double* grow = gl.w.data.data() + static_cast<std::size_t>(r) * cols;
      for (int c = 0; c < cols; ++c) grow[c] += d * in_act[static_cast<std::size_t>(c)];
    }

    prev_delta.assign(static_cast<std::size_t>(cols), 0.0);
    const double* wp = layer.w.data.data();
    for (int r = 0; r < rows; ++r) {
      const double d = delta[static_cast<std::size_t>(r)];
      const double* row = wp + static_cast<std::size_t>(r) * cols;
      for (int c = 0; c < cols; ++c) prev_delta[static_cast<std::size_t>(c)] += d * row[c];
    }
    delta.swap(prev_delta);
  }
  for (std::size_t i = 0; i < delta.size(); ++i) g.input[i] += delta[i];
}

AdamState adam_init(const MlpParams& p) {
  AdamState s;
  for (const auto& l : p.layers) {
    LinearLayer zm;
    zm.w = Matrix(l.w.rows, l.w.cols);
    zm.b.assign(l.b.size(), 0.0);
    s.m.push_back(zm);
    s.v.push_back(std::move(zm));
  }
  s.step = 0;
  return s;
}

bool adam_step(MlpParams& p, const MlpGrads& g, AdamState& s, const AdamConfig& cfg) {
  for (const auto& l : g.layers) {
    if (!all_finite(l.w.data) || !all_finite(l.b)) return false;
  }
  s.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(s.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(s.step));
  for (std::size_t li = 0; li < p.layers.size(); ++li) {
    auto update = [&](Vec& theta, const Vec& grad, Vec& m, Vec& v) {
      for (std::size_t i = 0; i < theta.size(); ++i) {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
        double mhat = m[i] / bc1;
        double vhat = v[i] / bc2;
        theta[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
      }
    };
    update(p.layers[li].w.data, g.layers[li].w.data, s.m[li].w.data, s.v[li].w.data);
    update(p.layers[li].b, g.layers[li].b, s.m[li].b, s.v[li].b);
  }
  return true;
}

}  // namespace chi
