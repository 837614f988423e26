#include "chi/env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "chi/rng.hpp"

namespace chi {

PointMassEnv::PointMassEnv(const Config& cfg) : cfg_(cfg) {
  if (cfg_.episode_len < 1) throw std::invalid_argument("PointMassEnv: episode_len must be >= 1");
  spec_ = EnvSpec{2, 2, cfg_.episode_len, cfg_.max_step};
  position_ = {0.0, 0.0};
}

Vec PointMassEnv::reset(std::uint64_t /*seed*/) {
  position_ = {0.0, 0.0};
  steps_taken_ = 0;
  done_ = false;
  return position_;
}

namespace {

// Open interval of segment parameters t where lo < p + t*d < hi.
struct Interval {
  double lo, hi;
  bool empty() const { return !(lo < hi); }
};

Interval slab_interval(double p, double d, double lo, double hi) {
  if (d == 0.0) {
    if (p > lo && p < hi) return {0.0, 1.0};
    return {1.0, 0.0};
  }
  double t0 = (lo - p) / d;
  double t1 = (hi - p) / d;
  if (t0 > t1) std::swap(t0, t1);
  return {std::max(t0, 0.0), std::min(t1, 1.0)};
}

}  // namespace

StepResult PointMassEnv::step(const Vec& action) {
  if (done_) throw std::logic_error("PointMassEnv::step called after episode end");
  if (static_cast<int>(action.size()) != spec_.action_dim)
    throw std::invalid_argument("PointMassEnv::step: action dimension mismatch");
  if (!all_finite(action)) throw std::invalid_argument("PointMassEnv::step: non-finite action");

  Vec d = action;
  double norm = std::hypot(d[0], d[1]);
  if (norm > cfg_.max_step && norm > 0.0) {
    double scale = cfg_.max_step / norm;
    d[0] *= scale;
    d[1] *= scale;
  }

  const WallGeometry& w = cfg_.wall;
  // Earliest t at which the motion segment enters the (open) wall interior.
  double t_clip = 1.0;
  int blocking_axis = -1;  // 0: clipped at a vertical face, 1: at a horizontal face
  double face_value = 0.0;
  auto consider = [&](double ylo, double yhi) {
    Interval ix = slab_interval(position_[0], d[0], w.left_face(), w.right_face());
    Interval iy = slab_interval(position_[1], d[1], ylo, yhi);
    double t_in = std::max(ix.lo, iy.lo);
    double t_out = std::min(ix.hi, iy.hi);
    if (t_in < t_out && t_in < t_clip) {
      t_clip = t_in;
      if (ix.lo >= iy.lo) {
        blocking_axis = 0;
        face_value = d[0] > 0.0 ? w.left_face() : w.right_face();
      } else {
        blocking_axis = 1;
        face_value = d[1] > 0.0 ? ylo : yhi;
      }
    }
  };
  // Wall below and above the opening; open y-boundaries at the gap edges so a
  // point exactly at gap_lo/gap_hi is passable.
  consider(-1.0, w.gap_lo);
  consider(w.gap_hi, 2.0);

  position_[0] += t_clip * d[0];
  position_[1] += t_clip * d[1];
  // Snap the blocked coordinate exactly onto the face to keep the invariant
  // under floating-point drift.
  if (blocking_axis == 0) position_[0] = face_value;
  if (blocking_axis == 1) position_[1] = face_value;
  position_[0] = std::clamp(position_[0], 0.0, 1.0);
  position_[1] = std::clamp(position_[1], 0.0, 1.0);

  steps_taken_ += 1;
  done_ = steps_taken_ >= cfg_.episode_len;
  return StepResult{position_, reward(position_, action), done_};
}

double PointMassEnv::reward(const Vec& s, const Vec& /*a*/) const {
  double dx = s[0] - 1.0;
  double dy = s[1] - 1.0;
  return 1.0 - (dx * dx + dy * dy);
}

PendulumEnv::PendulumEnv(const Config& cfg) : cfg_(cfg) {
  if (cfg_.episode_len < 1) throw std::invalid_argument("PendulumEnv: episode_len must be >= 1");
  spec_ = EnvSpec{3, 1, cfg_.episode_len, cfg_.max_torque};
  state_ = {std::cos(std::numbers::pi), std::sin(std::numbers::pi), 0.0};
}

Vec PendulumEnv::reset(std::uint64_t seed) {
  RandomStream rng = substream(seed, "pendulum-reset");
  theta_ = std::numbers::pi + 0.01 * rng.normal();
  theta_dot_ = 0.01 * rng.normal();
  state_ = {std::cos(theta_), std::sin(theta_), theta_dot_};
  steps_taken_ = 0;
  done_ = false;
  return state_;
}

StepResult PendulumEnv::step(const Vec& action) {
  if (done_) throw std::logic_error("PendulumEnv::step called after episode end");
  if (static_cast<int>(action.size()) != 1)
    throw std::invalid_argument("PendulumEnv::step: action dimension mismatch");
  if (!all_finite(action)) throw std::invalid_argument("PendulumEnv::step: non-finite action");

  double u = std::clamp(action[0], -cfg_.max_torque, cfg_.max_torque);
  double g = cfg_.gravity, m = cfg_.mass, l = cfg_.length;
  double acc = 3.0 * g / (2.0 * l) * std::sin(theta_) + 3.0 / (m * l * l) * u;
  theta_dot_ = std::clamp(theta_dot_ + acc * cfg_.dt, -cfg_.max_speed, cfg_.max_speed);
  theta_ += theta_dot_ * cfg_.dt;
  state_ = {std::cos(theta_), std::sin(theta_), theta_dot_};

  steps_taken_ += 1;
  done_ = steps_taken_ >= cfg_.episode_len;
  return StepResult{state_, reward(state_, action), done_};
}

double PendulumEnv::reward(const Vec& s, const Vec& a) const {
  // Angle from upright (theta = 0), wrapped to (-pi, pi]; robust to
  // model-predicted (cos, sin) drifting off the unit circle.
  double delta = std::atan2(s[1], s[0]);
  double u = a.empty() ? 0.0 : std::clamp(a[0], -cfg_.max_torque, cfg_.max_torque);
  return -(delta * delta + 0.1 * s[2] * s[2] + 0.001 * u * u);
}

std::unique_ptr<Env> make_env(const std::string& name, const EnvOverrides& overrides) {
  if (name == "pointmass") {
    PointMassEnv::Config cfg;
    if (overrides.episode_len) cfg.episode_len = *overrides.episode_len;
    if (overrides.wall) cfg.wall = *overrides.wall;
    return std::make_unique<PointMassEnv>(cfg);
  }
  if (name == "pendulum") {
    PendulumEnv::Config cfg;
    if (overrides.episode_len) cfg.episode_len = *overrides.episode_len;
    return std::make_unique<PendulumEnv>(cfg);
  }
  throw std::invalid_argument("unknown environment: " + name);
}

}  // namespace chi
