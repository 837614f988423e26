#pragma once

#include <string>
#include <vector>

#include "chi/dynamics.hpp"
#include "chi/gaussian.hpp"
#include "chi/planner.hpp"
#include "chi/replay.hpp"
#include "chi/rng.hpp"
#include "chi/tensor.hpp"

namespace chi {

// State-conditioned Gaussian policy with tanh squashing onto the action
// bound. The pre-squash mean clipped to the bound is the deterministic
// action, so the policy and the planner share one action parameterisation.
class GaussianPolicy {
 public:
  GaussianPolicy(int state_dim, int action_dim, double action_bound, int hidden,
                 RandomStream& rng);

  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }
  double action_bound() const { return bound_; }

  // Pre-squash distribution; log stds clamped.
  DiagGaussian distribution(const Vec& s) const;

  // Deterministic action: pre-squash mean clipped to the bound.
  Vec mean_action(const Vec& s) const;

  struct Sample {
    Vec pre_squash;   // u = mu + sigma * eps
    Vec action;       // bound * tanh(u)
    double log_prob;  // includes the tanh change-of-variables correction
  };
  Sample sample(const Vec& s, RandomStream& rng) const;

  // Log density of the squashed action corresponding to pre-squash value u.
  double log_prob_pre_squash(const DiagGaussian& dist, const Vec& u) const;

  MlpParams& net() { return net_; }
  const MlpParams& net() const { return net_; }

 private:
  int state_dim_;
  int action_dim_;
  double bound_;
  MlpParams net_;
};

struct PolicyRollout {
  ActionSequenceDist dist;
  std::vector<Vec> states;  // imagined states the per-step parameters were read at
  bool truncated = false;
};

// Amortised initialisation of the planner posterior: starting at s, read the
// policy head, advance the model with the clipped policy mean, and collect
// per-step means and stds. Stds come straight from the policy (clamped into
// the sequence-distribution range); the model never touches them. A
// non-finite model state freezes the remaining means at the last valid value
// with stds at sigma_max. When sample_rng is given the state advances with a
// squashed sample instead of the mean.
PolicyRollout rollout_policy_through_model(const GaussianPolicy& policy,
                                           const TransitionModel& model, const Vec& s, int horizon,
                                           double sigma_min, double sigma_max,
                                           RandomStream* sample_rng = nullptr);

struct SacConfig {
  double alpha = 0.2;   // fixed entropy coefficient
  double gamma = 0.99;
  double tau = 0.005;   // polyak rate
  double lr = 3e-4;
  int batch_size = 128;
  int hidden = 256;
  int update_start = 1000;     // buffer size before updates begin
  double synthetic_cap = 0.8;  // max synthetic fraction per batch
};

struct SacLosses {
  double critic_loss = 0.0;
  double policy_loss = 0.0;
  bool applied = false;
};

// Twin soft-Q critics with polyak-averaged target copies and the policy
// update of soft actor-critic with a constant entropy coefficient.
class SacLearner {
 public:
  SacLearner(int state_dim, int action_dim, double action_bound, const SacConfig& cfg,
             RandomStream& rng);

  GaussianPolicy& policy() { return policy_; }
  const GaussianPolicy& policy() const { return policy_; }
  const SacConfig& config() const { return cfg_; }

  double q_value(int which, const Vec& s, const Vec& a) const;         // online critics
  double target_q_value(int which, const Vec& s, const Vec& a) const;  // target copies
  double min_q(const Vec& s, const Vec& a) const;

  // One gradient step on critics then policy, followed by a polyak update of
  // the targets. Skips (applied = false) when a loss goes non-finite.
  SacLosses update(const std::vector<Transition>& batch, RandomStream& rng);

  MlpParams& critic_net(int which) { return which == 0 ? q1_ : q2_; }
  MlpParams& target_net(int which) { return which == 0 ? q1_target_ : q2_target_; }

  void save(const std::string& policy_path, const std::string& critic_path) const;
  void load(const std::string& policy_path, const std::string& critic_path);

 private:
  void polyak();

  int state_dim_;
  int action_dim_;
  SacConfig cfg_;
  GaussianPolicy policy_;
  MlpParams q1_, q2_, q1_target_, q2_target_;
  AdamState policy_adam_, q1_adam_, q2_adam_;
};

}  // namespace chi
