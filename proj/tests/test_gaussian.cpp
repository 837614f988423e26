#include <doctest.h>

#include <cmath>

#include "chi/gaussian.hpp"
#include "chi/rng.hpp"

using namespace chi;

TEST_CASE("sample with zero noise returns the mean") {
  const DiagGaussian d = make_diag_gaussian({1.0, -2.0}, {0.0, -1.0});
  CHECK(gaussian_sample(d, {0.0, 0.0}) == Vec{1.0, -2.0});
}

TEST_CASE("std floor keeps samples within sigma_min of the mean") {
  const DiagGaussian d = make_diag_gaussian({0.5}, {-100.0});  // clamps to log(1e-4)
  const Vec noise{3.0};
  const Vec x = gaussian_sample(d, noise);
  CHECK(std::abs(x[0] - 0.5) <= 1e-4 * std::abs(noise[0]) + 1e-15);
  CHECK(std::abs(x[0] - 0.5) > 0.0);
}

TEST_CASE("empirical mean over 1e5 samples stays within 3 sigma/sqrt(n)") {
  const DiagGaussian d = make_diag_gaussian({0.7}, {std::log(0.5)});
  RandomStream rng = substream(3, "mc");
  const int n = 100000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += gaussian_sample(d, {rng.normal()})[0];
  const double mean = acc / n;
  CHECK(std::abs(mean - 0.7) < 3.0 * 0.5 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("standard normal log density at the mean") {
  const DiagGaussian d = make_diag_gaussian({0.0}, {0.0});
  CHECK(gaussian_log_prob(d, {0.0}) == doctest::Approx(-0.9189385332046727).epsilon(1e-12));
}

TEST_CASE("log density is translation invariant") {
  const DiagGaussian a = make_diag_gaussian({0.3, -1.0}, {0.1, -0.4});
  const DiagGaussian b = make_diag_gaussian({0.3 + 5.0, -1.0 + 5.0}, {0.1, -0.4});
  const Vec x{1.0, 2.0};
  const Vec x_shift{6.0, 7.0};
  CHECK(gaussian_log_prob(a, x) == doctest::Approx(gaussian_log_prob(b, x_shift)).epsilon(1e-14));
}

TEST_CASE("density integrates to one on a 1-d grid") {
  const DiagGaussian d = make_diag_gaussian({0.2}, {std::log(0.7)});
  // Trapezoidal quadrature over +-8 sigma.
  const double lo = 0.2 - 8.0 * 0.7, hi = 0.2 + 8.0 * 0.7;
  const int n = 20000;
  const double h = (hi - lo) / n;
  double integral = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = lo + h * i;
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    integral += w * std::exp(gaussian_log_prob(d, {x}));
  }
  integral *= h;
  CHECK(std::abs(integral - 1.0) <= 1e-3);
}

TEST_CASE("entropy of unit gaussians is 1.4189 per dim") {
  const DiagGaussian d = make_diag_gaussian({0.0, 0.0, 0.0}, {0.0, 0.0, 0.0});
  CHECK(gaussian_entropy(d) == doctest::Approx(3.0 * 1.4189385332046727).epsilon(1e-12));
}

TEST_CASE("doubling every sigma adds d*log(2) to the entropy") {
  const DiagGaussian a = make_diag_gaussian({1.0, 2.0}, {std::log(0.3), std::log(0.9)});
  const DiagGaussian b = make_diag_gaussian({1.0, 2.0}, {std::log(0.6), std::log(1.8)});
  CHECK(gaussian_entropy(b) - gaussian_entropy(a) ==
        doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("entropy matches the Monte-Carlo estimate of -E[log q]") {
  const DiagGaussian d = make_diag_gaussian({0.5, -0.3}, {std::log(0.8), std::log(1.2)});
  RandomStream rng = substream(5, "mc");
  const int n = 100000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec x = gaussian_sample(d, {rng.normal(), rng.normal()});
    acc -= gaussian_log_prob(d, x);
  }
  const double mc = acc / n;
  const double exact = gaussian_entropy(d);
  CHECK(std::abs(mc - exact) / std::abs(exact) < 0.01);
}
