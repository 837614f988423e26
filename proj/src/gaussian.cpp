#include "chi/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace chi {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;  // log(2*pi)
}

double clamp_log_std(double log_std) { return std::clamp(log_std, kLogStdMin, kLogStdMax); }

Vec DiagGaussian::std() const {
  Vec s(log_std.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::exp(log_std[i]);
  return s;
}

DiagGaussian make_diag_gaussian(Vec mean, Vec log_std) {
  if (mean.size() != log_std.size())
    throw std::invalid_argument("make_diag_gaussian: mean and log_std sizes differ");
  for (double& x : log_std) x = clamp_log_std(x);
  return DiagGaussian{std::move(mean), std::move(log_std)};
}

Vec gaussian_sample(const DiagGaussian& d, const Vec& noise) {
  if (noise.size() != d.mean.size())
    throw std::invalid_argument("gaussian_sample: noise size mismatch");
  Vec out(d.mean.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = d.mean[i] + std::exp(d.log_std[i]) * noise[i];
  return out;
}

double gaussian_log_prob(const DiagGaussian& d, const Vec& x) {
  if (x.size() != d.mean.size())
    throw std::invalid_argument("gaussian_log_prob: dimension mismatch");
  double lp = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double z = (x[i] - d.mean[i]) * std::exp(-d.log_std[i]);
    lp += -0.5 * z * z - d.log_std[i] - 0.5 * kLog2Pi;
  }
  return lp;
}

double gaussian_entropy(const DiagGaussian& d) {
  double h = 0.0;
  for (double ls : d.log_std) h += 0.5 * (1.0 + kLog2Pi) + ls;
  return h;
}

}  // namespace chi
