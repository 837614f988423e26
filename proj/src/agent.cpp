#include "chi/agent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace chi {

AgentKind parse_agent_kind(const std::string& name) {
  if (name == "chi") return AgentKind::Chi;
  if (name == "sac") return AgentKind::SacOnly;
  if (name == "cem") return AgentKind::CemMpc;
  throw std::invalid_argument("unknown agent kind: " + name);
}

std::string agent_kind_name(AgentKind kind) {
  switch (kind) {
    case AgentKind::Chi: return "chi";
    case AgentKind::SacOnly: return "sac";
    case AgentKind::CemMpc: return "cem";
  }
  return "?";
}

Agent::Agent(const EnvSpec& env_spec, const AgentConfig& cfg, RewardFn reward,
             RandomStream& policy_init_rng, RandomStream& ensemble_init_rng)
    : env_spec_(env_spec), cfg_(cfg), reward_(std::move(reward)) {
  cfg_.plan.action_bound = env_spec.action_bound;
  const bool needs_policy = cfg_.kind != AgentKind::CemMpc;
  const bool needs_model = cfg_.kind != AgentKind::SacOnly;
  if (needs_policy)
    sac_.emplace(env_spec.state_dim, env_spec.action_dim, env_spec.action_bound, cfg_.sac,
                 policy_init_rng);
  if (needs_model)
    ensemble_.emplace(env_spec.state_dim, env_spec.action_dim, cfg_.ensemble, ensemble_init_rng);
}

namespace {

double mean_of(const std::vector<Vec>& rows) {
  double acc = 0.0;
  std::size_t n = 0;
  for (const Vec& r : rows) {
    for (double x : r) acc += x;
    n += r.size();
  }
  return n == 0 ? 0.0 : acc / static_cast<double>(n);
}

double mean_sigma(const DiagGaussian& d) {
  double acc = 0.0;
  for (double ls : d.log_std) acc += std::exp(ls);
  return d.log_std.empty() ? 0.0 : acc / static_cast<double>(d.log_std.size());
}

ActionSequenceDist single_step_dist(const GaussianPolicy& policy, const Vec& s, double sigma_min,
                                    double sigma_max) {
  const DiagGaussian d = policy.distribution(s);
  ActionSequenceDist out;
  Vec mean = d.mean;
  for (double& x : mean) x = std::clamp(x, -policy.action_bound(), policy.action_bound());
  Vec std_clamped = d.std();
  for (double& x : std_clamped) x = std::clamp(x, sigma_min, sigma_max);
  out.means.push_back(std::move(mean));
  out.stds.push_back(std::move(std_clamped));
  return out;
}

}  // namespace

StepDiagnostics Agent::select_action(const Vec& s, bool training, RandomStream& planner_rng,
                                     RandomStream& policy_rng) {
  StepDiagnostics diag;
  last_candidates_.items.clear();

  switch (cfg_.kind) {
    case AgentKind::Chi: {
      if (cfg_.init_mode == InitMode::Broad) {
        diag.init = broad_init(cfg_.plan.horizon, env_spec_.action_dim, cfg_.plan.sigma_max);
      } else {
        RandomStream* advance_rng = cfg_.sample_advance ? &policy_rng : nullptr;
        diag.init = rollout_policy_through_model(sac_->policy(), *ensemble_, s, cfg_.plan.horizon,
                                                 cfg_.plan.sigma_min, cfg_.plan.sigma_max,
                                                 advance_rng)
                        .dist;
      }
      PlanResult pr = plan(*ensemble_, s, reward_, diag.init, cfg_.plan, RefitRule::Mppi,
                           planner_rng);
      diag.refined = std::move(pr.dist);
      last_candidates_ = std::move(pr.candidates);
      diag.action = diag.refined.means.front();
      break;
    }
    case AgentKind::SacOnly: {
      diag.init = single_step_dist(sac_->policy(), s, cfg_.plan.sigma_min, cfg_.plan.sigma_max);
      diag.refined = diag.init;
      if (training) {
        diag.action = sac_->policy().sample(s, policy_rng).action;
      } else {
        diag.action = sac_->policy().mean_action(s);
      }
      break;
    }
    case AgentKind::CemMpc: {
      diag.init = broad_init(cfg_.plan.horizon, env_spec_.action_dim, cfg_.plan.sigma_max);
      PlanResult pr = plan(*ensemble_, s, reward_, diag.init, cfg_.plan, RefitRule::Cem,
                           planner_rng);
      diag.refined = std::move(pr.dist);
      last_candidates_ = std::move(pr.candidates);
      diag.action = diag.refined.means.front();
      break;
    }
  }

  if (training && cfg_.noise_std > 0.0) {
    for (double& x : diag.action) x += cfg_.noise_std * policy_rng.normal();
  }
  for (double& x : diag.action)
    x = std::clamp(x, -env_spec_.action_bound, env_spec_.action_bound);

  diag.mean_step_kl = sequence_kl(diag.refined, diag.init) / diag.init.horizon();
  diag.mean_init_sigma = mean_of(diag.init.stds);
  if (has_policy()) {
    const DiagGaussian d = sac_->policy().distribution(s);
    diag.amortised_sigma = mean_sigma(d);
    diag.policy_entropy = gaussian_entropy(d);
  }
  return diag;
}

int Agent::harvest_counterfactuals(ReplayBuffer& buffer, RandomStream& rng) {
  const int k = last_candidates_.size();
  if (k == 0 || (cfg_.m_top <= 0 && cfg_.m_rand <= 0)) return 0;

  std::vector<int> chosen;
  if (cfg_.m_top > 0) {
    std::vector<int> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return last_candidates_.items[static_cast<std::size_t>(a)].log_score >
             last_candidates_.items[static_cast<std::size_t>(b)].log_score;
    });
    for (int i = 0; i < std::min(cfg_.m_top, k); ++i) chosen.push_back(order[static_cast<std::size_t>(i)]);
  }
  if (cfg_.m_rand > 0) {
    // Partial Fisher-Yates for distinct uniform indices.
    std::vector<int> pool(static_cast<std::size_t>(k));
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < std::min(cfg_.m_rand, k); ++i) {
      const int j = i + rng.uniform_int(k - i);
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
      chosen.push_back(pool[static_cast<std::size_t>(i)]);
    }
  }

  int added = 0;
  for (int idx : chosen) {
    const Candidate& c = last_candidates_.items[static_cast<std::size_t>(idx)];
    if (c.rollout.states.size() < 2) continue;
    for (std::size_t t = 0; t + 1 < c.rollout.states.size(); ++t) {
      Transition tr;
      tr.s = c.rollout.states[t];
      tr.a = c.clipped[t];
      tr.r = c.rollout.rewards[t];
      tr.s_next = c.rollout.states[t + 1];
      tr.done = false;  // imagined rollouts never terminate
      tr.synthetic = true;
      if (buffer.append(std::move(tr))) added += 1;
    }
  }
  return added;
}

EpisodeResult run_episode(Agent& agent, Env& env, ReplayBuffer* buffer, bool training,
                          std::uint64_t reset_seed, RandomStream& planner_rng,
                          RandomStream& policy_rng, RandomStream& buffer_rng) {
  EpisodeResult result;
  Vec s = env.reset(reset_seed);
  const int len = env.spec().episode_len;
  double kl_acc = 0.0;
  double sigma_acc = 0.0;
  int sigma_count = 0;
  for (int step = 0; step < len; ++step) {
    StepDiagnostics diag = agent.select_action(s, training, planner_rng, policy_rng);
    const StepResult sr = env.step(diag.action);
    result.rewards.push_back(sr.reward);
    result.total_reward += sr.reward;
    kl_acc += diag.mean_step_kl;
    if (diag.amortised_sigma) {
      sigma_acc += *diag.amortised_sigma;
      sigma_count += 1;
    }
    if (diag.policy_entropy) result.policy_entropies.push_back(*diag.policy_entropy);

    if (training && buffer != nullptr) {
      Transition tr;
      tr.s = s;
      tr.a = diag.action;
      tr.r = sr.reward;
      tr.s_next = sr.next_state;
      tr.done = sr.done;
      tr.synthetic = false;
      buffer->append(std::move(tr));
      if (agent.config().kind == AgentKind::Chi)
        result.synthetic_added += agent.harvest_counterfactuals(*buffer, planner_rng);
      if (agent.has_policy() &&
          buffer->size() >= static_cast<std::size_t>(agent.config().sac.update_start)) {
        const auto batch = buffer->sample_batch(agent.config().sac.batch_size,
                                                agent.config().sac.synthetic_cap, buffer_rng);
        agent.sac().update(batch, policy_rng);
        result.sac_updates += 1;
      }
    }
    s = sr.next_state;
  }
  result.mean_step_kl = kl_acc / len;
  if (sigma_count > 0) result.mean_amortised_sigma = sigma_acc / sigma_count;
  return result;
}

}  // namespace chi
