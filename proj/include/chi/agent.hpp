#pragma once

#include <optional>
#include <vector>

#include "chi/dynamics.hpp"
#include "chi/env.hpp"
#include "chi/planner.hpp"
#include "chi/policy.hpp"
#include "chi/replay.hpp"

namespace chi {

enum class AgentKind { Chi, SacOnly, CemMpc };
enum class InitMode { Amortised, Broad };

AgentKind parse_agent_kind(const std::string& name);
std::string agent_kind_name(AgentKind kind);

struct AgentConfig {
  AgentKind kind = AgentKind::Chi;
  PlanConfig plan;
  SacConfig sac;
  EnsembleConfig ensemble;
  InitMode init_mode = InitMode::Amortised;
  double noise_std = 0.3;  // training-time exploration noise, all agents
  int m_top = 5;           // counterfactual sequences kept per planning step
  int m_rand = 5;
  bool sample_advance = false;  // advance the amortised rollout with samples
};

struct StepDiagnostics {
  ActionSequenceDist init;
  ActionSequenceDist refined;
  double mean_step_kl = 0.0;    // KL(refined || init) / horizon
  double mean_init_sigma = 0.0;
  std::optional<double> amortised_sigma;  // mean policy sigma at the real state
  std::optional<double> policy_entropy;   // entropy of the policy at the real state
  Vec action;
};

// One agent: the hybrid scheme (amortised init + iterative refinement), or
// either constituent on its own.
class Agent {
 public:
  Agent(const EnvSpec& env_spec, const AgentConfig& cfg, RewardFn reward,
        RandomStream& policy_init_rng, RandomStream& ensemble_init_rng);

  const AgentConfig& config() const { return cfg_; }
  bool has_policy() const { return sac_.has_value(); }
  bool has_model() const { return ensemble_.has_value(); }

  // Action selection per kind. Training mode adds exploration noise
  // N(0, noise_std^2) and clips to the action bound. Planner draws come from
  // planner_rng; policy samples and exploration noise from policy_rng.
  StepDiagnostics select_action(const Vec& s, bool training, RandomStream& planner_rng,
                                RandomStream& policy_rng);

  // Appends the top-scoring and uniformly random candidate rollouts from the
  // last planning step as synthetic transitions. Returns the count added.
  int harvest_counterfactuals(ReplayBuffer& buffer, RandomStream& rng);

  SacLearner& sac() { return *sac_; }
  const SacLearner& sac() const { return *sac_; }
  EnsembleDynamics& ensemble() { return *ensemble_; }
  const EnsembleDynamics& ensemble() const { return *ensemble_; }
  const CandidateSet& last_candidates() const { return last_candidates_; }
  const EnvSpec& env_spec() const { return env_spec_; }

 private:
  EnvSpec env_spec_;
  AgentConfig cfg_;
  RewardFn reward_;
  std::optional<SacLearner> sac_;
  std::optional<EnsembleDynamics> ensemble_;
  CandidateSet last_candidates_;
};

struct EpisodeResult {
  double total_reward = 0.0;
  Vec rewards;
  Vec policy_entropies;  // entropy of the policy at each visited state
  double mean_step_kl = 0.0;
  std::optional<double> mean_amortised_sigma;
  int synthetic_added = 0;
  int sac_updates = 0;
};

// Runs one fixed-length episode. In training mode real transitions are
// appended to the buffer, counterfactuals are harvested for the hybrid agent
// and one SAC update runs per step once the buffer holds enough data.
EpisodeResult run_episode(Agent& agent, Env& env, ReplayBuffer* buffer, bool training,
                          std::uint64_t reset_seed, RandomStream& planner_rng,
                          RandomStream& policy_rng, RandomStream& buffer_rng);

}  // namespace chi
