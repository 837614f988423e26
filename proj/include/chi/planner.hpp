#pragma once

#include <vector>

#include "chi/dynamics.hpp"
#include "chi/gaussian.hpp"
#include "chi/rng.hpp"
#include "chi/tensor.hpp"

namespace chi {

// Time-dependent diagonal Gaussian over an H-step action sequence; the shared
// posterior of the amortised and iterative inference processes.
struct ActionSequenceDist {
  std::vector<Vec> means;  // H x action_dim
  std::vector<Vec> stds;   // H x action_dim, clamped to [sigma_min, sigma_max]

  int horizon() const { return static_cast<int>(means.size()); }
  int action_dim() const { return means.empty() ? 0 : static_cast<int>(means.front().size()); }
};

ActionSequenceDist broad_init(int horizon, int action_dim, double sigma_max);

// Log density of a full (unclipped) action sequence under the distribution.
double sequence_log_prob(const ActionSequenceDist& dist, const std::vector<Vec>& actions);

// KL(a || b), summed over dims and steps; closed form for diagonal Gaussians.
double sequence_kl(const ActionSequenceDist& a, const ActionSequenceDist& b);

struct PlanConfig {
  int horizon = 7;
  int iterations = 3;
  int samples = 500;
  double kappa = 1.0;          // score temperature: log W = kappa * sum(rewards)
  double elite_fraction = 0.1;  // CEM refit only
  double sigma_min = 1e-3;
  double sigma_max = 1.0;
  double action_bound = 1.0;
  Propagation propagation = Propagation::Mean;
  int state_samples = 1;  // member-mode rollouts averaged per candidate

  void validate() const;
};

enum class RefitRule { Mppi, Cem };

struct Candidate {
  std::vector<Vec> actions;  // unclipped samples; densities evaluate here
  std::vector<Vec> clipped;  // clipped to the action bound; rollouts use these
  RolloutResult rollout;
  double log_score = 0.0;  // -inf marks a truncated/invalid rollout
  double weight = 0.0;
};

struct CandidateSet {
  std::vector<Candidate> items;

  int size() const { return static_cast<int>(items.size()); }
};

// Draws K action sequences from the distribution. Consumes K*H*dim normals in
// candidate-major order.
CandidateSet sample_candidates(const ActionSequenceDist& dist, int count, double action_bound,
                               RandomStream& rng);

// Rolls out every candidate and fills log_score = kappa * cumulative reward.
// Truncated rollouts score -inf (weight exactly zero downstream). In Member
// propagation mode one member per candidate is drawn from rng.
void score_sequences(const TransitionModel& model, const Vec& state, const RewardFn& reward,
                     const PlanConfig& cfg, CandidateSet& candidates, RandomStream& rng);

// Mirror-descent weights: w_k proportional to W_k * q(a_k), normalised to sum
// one, computed in log space with max subtraction. A fully degenerate set
// (all scores zero) gets uniform weights.
void update_weights(CandidateSet& candidates, const ActionSequenceDist& q);

// Weighted per-timestep, per-dimension moment refit; stds clamped.
ActionSequenceDist refit(const CandidateSet& candidates, const PlanConfig& cfg);

// Unweighted moments of the top ceil(elite_fraction*K) candidates by score;
// ties broken by candidate index.
ActionSequenceDist cem_refit(const CandidateSet& candidates, const PlanConfig& cfg);

struct PlanResult {
  ActionSequenceDist dist;
  CandidateSet candidates;  // final iteration's scored candidates
};

// Iterative inference: I rounds of sample -> score -> reweight -> refit
// (Mppi), or sample -> score -> elite refit (Cem). iterations = 0 returns the
// init unchanged without consuming rng.
PlanResult plan(const TransitionModel& model, const Vec& state, const RewardFn& reward,
                const ActionSequenceDist& init, const PlanConfig& cfg, RefitRule rule,
                RandomStream& rng);

}  // namespace chi
