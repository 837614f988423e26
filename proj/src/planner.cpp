#include "chi/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace chi {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}  // namespace

ActionSequenceDist broad_init(int horizon, int action_dim, double sigma_max) {
  ActionSequenceDist d;
  d.means.assign(static_cast<std::size_t>(horizon), Vec(static_cast<std::size_t>(action_dim), 0.0));
  d.stds.assign(static_cast<std::size_t>(horizon), Vec(static_cast<std::size_t>(action_dim), sigma_max));
  return d;
}

double sequence_log_prob(const ActionSequenceDist& dist, const std::vector<Vec>& actions) {
  if (actions.size() != dist.means.size())
    throw std::invalid_argument("sequence_log_prob: horizon mismatch");
  double lp = 0.0;
  for (std::size_t t = 0; t < actions.size(); ++t) {
    for (std::size_t d = 0; d < actions[t].size(); ++d) {
      const double sigma = dist.stds[t][d];
      const double z = (actions[t][d] - dist.means[t][d]) / sigma;
      lp += -0.5 * z * z - std::log(sigma) - 0.5 * kLog2Pi;
    }
  }
  return lp;
}

double sequence_kl(const ActionSequenceDist& a, const ActionSequenceDist& b) {
  if (a.means.size() != b.means.size())
    throw std::invalid_argument("sequence_kl: horizon mismatch");
  double kl = 0.0;
  for (std::size_t t = 0; t < a.means.size(); ++t) {
    for (std::size_t d = 0; d < a.means[t].size(); ++d) {
      const double sa = a.stds[t][d];
      const double sb = b.stds[t][d];
      const double dm = a.means[t][d] - b.means[t][d];
      kl += std::log(sb / sa) + (sa * sa + dm * dm) / (2.0 * sb * sb) - 0.5;
    }
  }
  return kl;
}

void PlanConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("PlanConfig: horizon must be >= 1");
  if (iterations < 0) throw std::invalid_argument("PlanConfig: iterations must be >= 0");
  if (samples < 2) throw std::invalid_argument("PlanConfig: samples must be >= 2");
  if (!(kappa > 0.0)) throw std::invalid_argument("PlanConfig: kappa must be > 0");
  if (!(elite_fraction > 0.0) || elite_fraction > 1.0)
    throw std::invalid_argument("PlanConfig: elite_fraction must be in (0, 1]");
  if (!(sigma_min > 0.0) || sigma_min > sigma_max)
    throw std::invalid_argument("PlanConfig: need 0 < sigma_min <= sigma_max");
  if (state_samples < 1) throw std::invalid_argument("PlanConfig: state_samples must be >= 1");
}

CandidateSet sample_candidates(const ActionSequenceDist& dist, int count, double action_bound,
                               RandomStream& rng) {
  CandidateSet set;
  set.items.resize(static_cast<std::size_t>(count));
  const std::size_t horizon = dist.means.size();
  for (Candidate& c : set.items) {
    c.actions.resize(horizon);
    c.clipped.resize(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
      const std::size_t dim = dist.means[t].size();
      c.actions[t].resize(dim);
      c.clipped[t].resize(dim);
      for (std::size_t d = 0; d < dim; ++d) {
        const double a = dist.means[t][d] + dist.stds[t][d] * rng.normal();
        c.actions[t][d] = a;
        c.clipped[t][d] = std::clamp(a, -action_bound, action_bound);
      }
    }
  }
  return set;
}

void score_sequences(const TransitionModel& model, const Vec& state, const RewardFn& reward,
                     const PlanConfig& cfg, CandidateSet& candidates, RandomStream& rng) {
  const int extra = cfg.propagation == Propagation::Member ? cfg.state_samples - 1 : 0;
  for (Candidate& c : candidates.items) {
    int member = -1;
    if (cfg.propagation == Propagation::Member) member = rng.uniform_int(model.members());
    c.rollout = rollout_model(model, state, c.clipped, reward, cfg.propagation, member);
    if (c.rollout.truncated) {
      c.log_score = kNegInf;
      continue;
    }
    double total = std::accumulate(c.rollout.rewards.begin(), c.rollout.rewards.end(), 0.0);
    // Optional extra member rollouts approximate the expectation over the
    // model posterior with more than one state-trajectory sample.
    int kept = 1;
    for (int extra_i = 0; extra_i < extra; ++extra_i) {
      const int m = rng.uniform_int(model.members());
      const RolloutResult rr = rollout_model(model, state, c.clipped, reward,
                                             Propagation::Member, m);
      if (rr.truncated) continue;
      total += std::accumulate(rr.rewards.begin(), rr.rewards.end(), 0.0);
      kept += 1;
    }
    c.log_score = cfg.kappa * total / static_cast<double>(kept);
    if (!std::isfinite(c.log_score)) c.log_score = kNegInf;
  }
}

void update_weights(CandidateSet& candidates, const ActionSequenceDist& q) {
  double max_term = kNegInf;
  std::vector<double> log_terms(candidates.items.size(), kNegInf);
  for (std::size_t k = 0; k < candidates.items.size(); ++k) {
    const Candidate& c = candidates.items[k];
    if (c.log_score == kNegInf) continue;
    log_terms[k] = c.log_score + sequence_log_prob(q, c.actions);
    max_term = std::max(max_term, log_terms[k]);
  }
  if (max_term == kNegInf) {
    // Degenerate: every score is zero; fall back to uniform weights.
    const double w = 1.0 / static_cast<double>(candidates.items.size());
    for (Candidate& c : candidates.items) c.weight = w;
    return;
  }
  double total = 0.0;
  for (std::size_t k = 0; k < candidates.items.size(); ++k) {
    const double w = log_terms[k] == kNegInf ? 0.0 : std::exp(log_terms[k] - max_term);
    candidates.items[k].weight = w;
    total += w;
  }
  for (Candidate& c : candidates.items) c.weight /= total;
}

namespace {

ActionSequenceDist moments(const std::vector<const Candidate*>& picks,
                           const std::vector<double>& weights, const PlanConfig& cfg) {
  const std::size_t horizon = picks.front()->actions.size();
  const std::size_t dim = picks.front()->actions.front().size();
  ActionSequenceDist out;
  out.means.assign(horizon, Vec(dim, 0.0));
  out.stds.assign(horizon, Vec(dim, 0.0));
  for (std::size_t t = 0; t < horizon; ++t) {
    for (std::size_t d = 0; d < dim; ++d) {
      double mu = 0.0;
      for (std::size_t k = 0; k < picks.size(); ++k) mu += weights[k] * picks[k]->actions[t][d];
      double var = 0.0;
      for (std::size_t k = 0; k < picks.size(); ++k) {
        const double diff = picks[k]->actions[t][d] - mu;
        var += weights[k] * diff * diff;
      }
      out.means[t][d] = mu;
      out.stds[t][d] = std::clamp(std::sqrt(var), cfg.sigma_min, cfg.sigma_max);
    }
  }
  return out;
}

}  // namespace

ActionSequenceDist refit(const CandidateSet& candidates, const PlanConfig& cfg) {
  if (candidates.items.empty()) throw std::invalid_argument("refit: empty candidate set");
  std::vector<const Candidate*> picks;
  std::vector<double> weights;
  picks.reserve(candidates.items.size());
  weights.reserve(candidates.items.size());
  for (const Candidate& c : candidates.items) {
    picks.push_back(&c);
    weights.push_back(c.weight);
  }
  return moments(picks, weights, cfg);
}

ActionSequenceDist cem_refit(const CandidateSet& candidates, const PlanConfig& cfg) {
  if (candidates.items.empty()) throw std::invalid_argument("cem_refit: empty candidate set");
  const int k = candidates.size();
  const int elites = std::min(k, std::max(1, static_cast<int>(std::ceil(cfg.elite_fraction * k))));
  std::vector<int> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return candidates.items[static_cast<std::size_t>(a)].log_score >
           candidates.items[static_cast<std::size_t>(b)].log_score;
  });
  std::vector<const Candidate*> picks;
  std::vector<double> weights;
  for (int i = 0; i < elites; ++i) {
    picks.push_back(&candidates.items[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]);
    weights.push_back(1.0 / static_cast<double>(elites));
  }
  return moments(picks, weights, cfg);
}

PlanResult plan(const TransitionModel& model, const Vec& state, const RewardFn& reward,
                const ActionSequenceDist& init, const PlanConfig& cfg, RefitRule rule,
                RandomStream& rng) {
  cfg.validate();
  if (init.horizon() != cfg.horizon)
    throw std::invalid_argument("plan: init horizon does not match config");
  PlanResult result;
  result.dist = init;
  for (int i = 0; i < cfg.iterations; ++i) {
    CandidateSet candidates = sample_candidates(result.dist, cfg.samples, cfg.action_bound, rng);
    score_sequences(model, state, reward, cfg, candidates, rng);
    if (rule == RefitRule::Mppi) {
      update_weights(candidates, result.dist);
      result.dist = refit(candidates, cfg);
    } else {
      result.dist = cem_refit(candidates, cfg);
    }
    result.candidates = std::move(candidates);
  }
  return result;
}

}  // namespace chi
