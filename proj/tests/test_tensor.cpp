#include <doctest.h>

#include <cmath>

#include "chi/rng.hpp"
#include "chi/tensor.hpp"

using namespace chi;

namespace {

// Flattened parameter access for finite-difference probing.
double* param_at(MlpParams& p, std::size_t flat) {
  for (auto& l : p.layers) {
    if (flat < l.w.data.size()) return &l.w.data[flat];
    flat -= l.w.data.size();
    if (flat < l.b.size()) return &l.b[flat];
    flat -= l.b.size();
  }
  return nullptr;
}

const double* grad_at(const MlpGrads& g, std::size_t flat) {
  for (const auto& l : g.layers) {
    if (flat < l.w.data.size()) return &l.w.data[flat];
    flat -= l.w.data.size();
    if (flat < l.b.size()) return &l.b[flat];
    flat -= l.b.size();
  }
  return nullptr;
}

std::size_t param_count(const MlpParams& p) {
  std::size_t n = 0;
  for (const auto& l : p.layers) n += l.w.data.size() + l.b.size();
  return n;
}

}  // namespace

TEST_CASE("forward with all-zero weights returns the bias") {
  MlpParams p;
  LinearLayer l;
  l.w = Matrix(3, 2);
  l.b = {0.5, -1.0, 2.0};
  p.layers.push_back(l);
  const Vec out = mlp_forward(p, {7.0, -3.0});
  CHECK(out == Vec{0.5, -1.0, 2.0});
}

TEST_CASE("identity single linear layer reproduces the input") {
  MlpParams p;
  LinearLayer l;
  l.w = Matrix(2, 2);
  l.w(0, 0) = 1.0;
  l.w(1, 1) = 1.0;
  l.b = {0.0, 0.0};
  p.layers.push_back(l);
  const Vec x{0.25, -4.0};
  CHECK(mlp_forward(p, x) == x);
}

TEST_CASE("two-layer forward matches a scalar-by-scalar re-evaluation") {
  RandomStream rng = substream(11, "init");
  MlpParams p = mlp_init({3, 4, 2}, rng);
  const Vec x{0.3, -0.7, 1.2};

  // Independent re-evaluation with explicit loops over the same parameters.
  Vec hidden(4, 0.0);
  for (int r = 0; r < 4; ++r) {
    double acc = p.layers[0].b[r];
    for (int c = 0; c < 3; ++c) acc += p.layers[0].w(r, c) * x[c];
    hidden[r] = std::tanh(acc);
  }
  Vec expected(2, 0.0);
  for (int r = 0; r < 2; ++r) {
    double acc = p.layers[1].b[r];
    for (int c = 0; c < 4; ++c) acc += p.layers[1].w(r, c) * hidden[c];
    expected[r] = acc;
  }

  const Vec out = mlp_forward(p, x);
  REQUIRE(out.size() == 2);
  for (int i = 0; i < 2; ++i) CHECK(out[i] == doctest::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("dimension mismatch is rejected") {
  RandomStream rng = substream(11, "init");
  MlpParams p = mlp_init({3, 2}, rng);
  CHECK_THROWS(mlp_forward(p, {1.0, 2.0}));
}

TEST_CASE("linear-layer gradients are the analytic outer product") {
  MlpParams p;
  LinearLayer l;
  l.w = Matrix(2, 3);
  double v = 0.1;
  for (double& x : l.w.data) x = (v += 0.1);
  l.b = {0.0, 0.0};
  p.layers.push_back(l);

  const Vec x{1.0, -2.0, 0.5};
  const Vec g{0.3, -0.4};
  MlpCache cache;
  mlp_forward(p, x, cache);
  MlpGrads grads = mlp_grads_like(p);
  mlp_backward(p, cache, g, grads);

  for (int r = 0; r < 2; ++r) {
    CHECK(grads.layers[0].b[r] == doctest::Approx(g[r]));
    for (int c = 0; c < 3; ++c)
      CHECK(grads.layers[0].w(r, c) == doctest::Approx(g[r] * x[c]));
  }
}

TEST_CASE("zero output gradient gives all-zero parameter gradients") {
  RandomStream rng = substream(13, "init");
  MlpParams p = mlp_init({2, 5, 2}, rng);
  MlpCache cache;
  mlp_forward(p, {0.4, -0.2}, cache);
  MlpGrads grads = mlp_grads_like(p);
  mlp_backward(p, cache, {0.0, 0.0}, grads);
  for (const auto& l : grads.layers) {
    for (double x : l.w.data) CHECK(x == 0.0);
    for (double x : l.b) CHECK(x == 0.0);
  }
}

TEST_CASE("backward matches central finite differences") {
  RandomStream rng = substream(17, "init");
  MlpParams p = mlp_init({3, 8, 8, 2}, rng);
  const Vec x{0.9, -1.1, 0.2};
  const Vec out_grad{0.7, -0.3};

  MlpCache cache;
  mlp_forward(p, x, cache);
  MlpGrads grads = mlp_grads_like(p);
  mlp_backward(p, cache, out_grad, grads);

  // Loss L = out_grad . f(x); probe random parameters with central
  // differences at step 1e-5 and require 1e-4 relative agreement.
  auto loss = [&](MlpParams& q) {
    const Vec out = mlp_forward(q, x);
    double acc = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) acc += out_grad[i] * out[i];
    return acc;
  };
  RandomStream probe_rng = substream(17, "probe");
  const std::size_t n_params = param_count(p);
  const double step = 1e-5;
  for (int probe = 0; probe < 60; ++probe) {
    const std::size_t flat = static_cast<std::size_t>(probe_rng.uniform_int(static_cast<int>(n_params)));
    double* theta = param_at(p, flat);
    const double saved = *theta;
    *theta = saved + step;
    const double hi = loss(p);
    *theta = saved - step;
    const double lo = loss(p);
    *theta = saved;
    const double fd = (hi - lo) / (2.0 * step);
    const double analytic = *grad_at(grads, flat);
    const double denom = std::max({std::abs(fd), std::abs(analytic), 1e-8});
    CHECK(std::abs(fd - analytic) / denom < 1e-4);
  }

  // Input gradients too.
  auto loss_x = [&](const Vec& xin) {
    const Vec out = mlp_forward(p, xin);
    double acc = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) acc += out_grad[i] * out[i];
    return acc;
  };
  for (std::size_t i = 0; i < x.size(); ++i) {
    Vec xp = x, xm = x;
    xp[i] += step;
    xm[i] -= step;
    const double fd = (loss_x(xp) - loss_x(xm)) / (2.0 * step);
    const double denom = std::max({std::abs(fd), std::abs(grads.input[i]), 1e-8});
    CHECK(std::abs(fd - grads.input[i]) / denom < 1e-4);
  }
}

TEST_CASE("first adam step moves by about -lr*sign(g)") {
  MlpParams p;
  LinearLayer l;
  l.w = Matrix(1, 1);
  l.w(0, 0) = 1.0;
  l.b = {2.0};
  p.layers.push_back(l);
  AdamState s = adam_init(p);
  MlpGrads g = mlp_grads_like(p);
  g.layers[0].w(0, 0) = 3.5;   // |g| >> eps
  g.layers[0].b[0] = -0.75;
  const AdamConfig cfg{0.01, 0.9, 0.999, 1e-8};
  REQUIRE(adam_step(p, g, s, cfg));
  CHECK(s.step == 1);
  CHECK(p.layers[0].w(0, 0) == doctest::Approx(1.0 - 0.01).epsilon(1e-6));
  CHECK(p.layers[0].b[0] == doctest::Approx(2.0 + 0.01).epsilon(1e-6));
}

TEST_CASE("adam with zero gradients is the identity on parameters") {
  RandomStream rng = substream(23, "init");
  MlpParams p = mlp_init({2, 4, 1}, rng);
  const MlpParams before = p;
  AdamState s = adam_init(p);
  MlpGrads g = mlp_grads_like(p);
  const AdamConfig cfg{};
  for (int i = 0; i < 5; ++i) REQUIRE(adam_step(p, g, s, cfg));
  for (std::size_t li = 0; li < p.layers.size(); ++li) {
    CHECK(p.layers[li].w.data == before.layers[li].w.data);
    CHECK(p.layers[li].b == before.layers[li].b);
  }
}

TEST_CASE("adam rejects non-finite gradients") {
  MlpParams p;
  LinearLayer l;
  l.w = Matrix(1, 1);
  l.b = {0.0};
  p.layers.push_back(l);
  AdamState s = adam_init(p);
  MlpGrads g = mlp_grads_like(p);
  g.layers[0].w(0, 0) = std::nan("");
  CHECK_FALSE(adam_step(p, g, s, AdamConfig{}));
  CHECK(s.step == 0);
  CHECK(p.layers[0].w(0, 0) == 0.0);
}

TEST_CASE("two adam steps reduce a quadratic loss") {
  // Loss = 0.5 * ((w - 3)^2 + (b + 1)^2), re-evaluated directly.
  MlpParams p;
  LinearLayer l;
  l.w = Matrix(1, 1);
  l.w(0, 0) = 0.0;
  l.b = {0.0};
  p.layers.push_back(l);
  AdamState s = adam_init(p);
  auto loss = [&]() {
    const double dw = p.layers[0].w(0, 0) - 3.0;
    const double db = p.layers[0].b[0] + 1.0;
    return 0.5 * (dw * dw + db * db);
  };
  const AdamConfig cfg{0.1, 0.9, 0.999, 1e-8};
  const double before = loss();
  for (int i = 0; i < 2; ++i) {
    MlpGrads g = mlp_grads_like(p);
    g.layers[0].w(0, 0) = p.layers[0].w(0, 0) - 3.0;
    g.layers[0].b[0] = p.layers[0].b[0] + 1.0;
    REQUIRE(adam_step(p, g, s, cfg));
  }
  CHECK(loss() < before);
}
