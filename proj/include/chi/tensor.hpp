#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "chi/rng.hpp"

namespace chi {

using Vec = std::vector<double>;

bool all_finite(const Vec& v);

struct Matrix {
  int rows = 0;
  int cols = 0;
  Vec data;  // row-major

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
};

struct LinearLayer {
  Matrix w;  // out x in
  Vec b;     // out
};

// Feed-forward network: tanh on hidden layers, linear head.
struct MlpParams {
  std::vector<LinearLayer> layers;

  int in_dim() const { return layers.empty() ? 0 : layers.front().w.cols; }
  int out_dim() const { return layers.empty() ? 0 : layers.back().w.rows; }
};

// Uniform fan-in initialisation: W, b ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
MlpParams mlp_init(const std::vector<int>& dims, RandomStream& rng);

// Post-activation values per layer; acts[0] is the input.
struct MlpCache {
  std::vector<Vec> acts;
};

Vec mlp_forward(const MlpParams& p, const Vec& input);
Vec mlp_forward(const MlpParams& p, const Vec& input, MlpCache& cache);

struct MlpGrads {
  std::vector<LinearLayer> layers;  // shapes mirror MlpParams
  Vec input;                        // dL/dinput

  void zero();
  void scale(double s);
};

MlpGrads mlp_grads_like(const MlpParams& p);

// Accumulates parameter and input gradients for one (input, output_grad) pair.
// The cache must come from mlp_forward on the same params and input.
void mlp_backward(const MlpParams& p, const MlpCache& cache, const Vec& output_grad, MlpGrads& g);

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<LinearLayer> m;  // first moments
  std::vector<LinearLayer> v;  // second moments
  long step = 0;
};

AdamState adam_init(const MlpParams& p);

// Bias-corrected Adam update. Returns false (and leaves params and state
// untouched) when any gradient entry is non-finite.
bool adam_step(MlpParams& p, const MlpGrads& g, AdamState& s, const AdamConfig& cfg);

}  // namespace chi
