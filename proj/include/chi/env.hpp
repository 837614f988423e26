#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "chi/tensor.hpp"

namespace chi {

struct EnvSpec {
  int state_dim = 0;
  int action_dim = 0;
  int episode_len = 0;
  double action_bound = 1.0;  // per-component magnitude agents clip to
};

struct StepResult {
  Vec next_state;
  double reward = 0.0;
  bool done = false;
};

// Analytic reward usable on imagined (model-predicted) states.
using RewardFn = std::function<double(const Vec& s, const Vec& a)>;

class Env {
 public:
  virtual ~Env() = default;
  virtual const EnvSpec& spec() const = 0;
  virtual Vec reset(std::uint64_t seed) = 0;
  virtual StepResult step(const Vec& action) = 0;
  virtual double reward(const Vec& s, const Vec& a) const = 0;
  virtual const Vec& state() const = 0;

  RewardFn reward_fn() const {
    return [this](const Vec& s, const Vec& a) { return reward(s, a); };
  }
};

// Vertical wall with an opening; the interior is open in x so positions may
// rest exactly on a face.
struct WallGeometry {
  double center_x = 0.5;
  double half_thickness = 0.01;
  double gap_lo = 0.4;
  double gap_hi = 0.6;

  double left_face() const { return center_x - half_thickness; }
  double right_face() const { return center_x + half_thickness; }
  bool inside(double x, double y) const {
    return x > left_face() && x < right_face() && (y < gap_lo || y > gap_hi);
  }
};

// Planar point mass on [0,1]^2: start (0,0), goal (1,1), displacement actions
// rescaled to norm <= max_step, motion segments clipped at wall faces.
// Reward: 1 - |s - g|^2 evaluated on the post-move position.
class PointMassEnv : public Env {
 public:
  struct Config {
    int episode_len = 50;
    double max_step = 0.05;
    WallGeometry wall;
  };

  explicit PointMassEnv(const Config& cfg = Config{});

  const EnvSpec& spec() const override { return spec_; }
  Vec reset(std::uint64_t seed) override;
  StepResult step(const Vec& action) override;
  double reward(const Vec& s, const Vec& a) const override;
  const Vec& state() const override { return position_; }

  const WallGeometry& wall() const { return cfg_.wall; }

 private:
  Config cfg_;
  EnvSpec spec_;
  Vec position_;
  int steps_taken_ = 0;
  bool done_ = true;
};

// Torque-limited pendulum swing-up with state (cos th, sin th, th_dot).
// Reward: -(angle^2 + 0.1*th_dot^2 + 0.001*u^2), angle measured from upright.
class PendulumEnv : public Env {
 public:
  struct Config {
    int episode_len = 100;
    double max_torque = 2.0;
    double max_speed = 8.0;
    double dt = 0.05;
    double gravity = 10.0;
    double mass = 1.0;
    double length = 1.0;
  };

  explicit PendulumEnv(const Config& cfg = Config{});

  const EnvSpec& spec() const override { return spec_; }
  Vec reset(std::uint64_t seed) override;
  StepResult step(const Vec& action) override;
  double reward(const Vec& s, const Vec& a) const override;
  const Vec& state() const override { return state_; }

 private:
  Config cfg_;
  EnvSpec spec_;
  Vec state_;
  double theta_ = 0.0;
  double theta_dot_ = 0.0;
  int steps_taken_ = 0;
  bool done_ = true;
};

struct EnvOverrides {
  std::optional<int> episode_len;
  std::optional<WallGeometry> wall;
};

std::unique_ptr<Env> make_env(const std::string& name, const EnvOverrides& overrides = {});

}  // namespace chi
