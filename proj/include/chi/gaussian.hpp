#pragma once

#include "chi/tensor.hpp"

namespace chi {

// Clamp bounds for log standard deviations, shared by every Gaussian head.
inline constexpr double kLogStdMin = -9.210340371976182;  // log(1e-4)
inline constexpr double kLogStdMax = 0.6931471805599453;  // log(2)

double clamp_log_std(double log_std);

// Diagonal Gaussian with clamped log stds.
struct DiagGaussian {
  Vec mean;
  Vec log_std;

  int dim() const { return static_cast<int>(mean.size()); }
  Vec std() const;
};

DiagGaussian make_diag_gaussian(Vec mean, Vec log_std);

// Reparameterised draw: mean + std * noise, with noise ~ N(0, I) supplied by
// the caller.
Vec gaussian_sample(const DiagGaussian& d, const Vec& noise);

double gaussian_log_prob(const DiagGaussian& d, const Vec& x);

double gaussian_entropy(const DiagGaussian& d);

}  // namespace chi
