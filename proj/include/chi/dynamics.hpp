#pragma once

#include <vector>

#include "chi/env.hpp"
#include "chi/gaussian.hpp"
#include "chi/replay.hpp"
#include "chi/tensor.hpp"

namespace chi {

// Anything the planner and the policy-through-model rollout can propagate
// states with. Implementations must be pure so rollouts can run concurrently
// against a frozen snapshot.
class TransitionModel {
 public:
  virtual ~TransitionModel() = default;
  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual int members() const { return 1; }
  // Expected next state under the full model.
  virtual Vec mean_next(const Vec& s, const Vec& a) const = 0;
  // Expected next state under one member; defaults to the full model.
  virtual Vec member_next(int /*member*/, const Vec& s, const Vec& a) const {
    return mean_next(s, a);
  }
};

enum class Propagation { Mean, Member };

struct RolloutResult {
  std::vector<Vec> states;  // up to H+1; shorter when truncated
  Vec rewards;              // always length H; floor-filled past a truncation
  bool truncated = false;
};

inline constexpr double kFloorReward = -1e3;

// Propagates an action sequence through the model, scoring each step with the
// analytic reward on the predicted post-move state. A non-finite prediction
// truncates the rollout and floor-fills the remaining rewards.
RolloutResult rollout_model(const TransitionModel& model, const Vec& s0,
                            const std::vector<Vec>& actions, const RewardFn& reward,
                            Propagation mode = Propagation::Mean, int member = -1);

struct EnsembleConfig {
  int members = 5;
  int hidden = 350;
  int depth = 3;  // number of hidden layers
  double lr = 1e-3;
  int train_epochs = 10;
  int train_batch = 50;
};

struct TrainReport {
  int epochs = 0;
  // member_epoch_nll[member][epoch]: mean NLL per sample over that epoch.
  std::vector<std::vector<double>> member_epoch_nll;
};

// Probabilistic ensemble over the state change: each member maps (s + a) to a
// Gaussian over delta-s. Inputs are normalised by dataset statistics; members
// train on independent bootstrap resamples.
class EnsembleDynamics : public TransitionModel {
 public:
  EnsembleDynamics(int state_dim, int action_dim, const EnsembleConfig& cfg, RandomStream& rng);

  int state_dim() const override { return state_dim_; }
  int action_dim() const override { return action_dim_; }
  int members() const override { return static_cast<int>(members_.size()); }

  // Gaussian over the next state: mean = s + predicted delta mean.
  DiagGaussian predict(int member, const Vec& s, const Vec& a) const;

  Vec mean_next(const Vec& s, const Vec& a) const override;
  Vec member_next(int member, const Vec& s, const Vec& a) const override;

  TrainReport train(const std::vector<Transition>& data, RandomStream& rng);
  TrainReport train(const std::vector<Transition>& data, int epochs, int batch,
                    RandomStream& rng);

  double nll(int member, const Vec& s, const Vec& a, const Vec& s_next) const;
  double mean_nll(const std::vector<Transition>& data) const;

  // Spread of member mean predictions, averaged over state dims; grows off
  // the training distribution.
  double disagreement(const Vec& s, const Vec& a) const;

  const EnsembleConfig& config() const { return cfg_; }
  MlpParams& member_params(int i) { return members_[static_cast<std::size_t>(i)]; }
  const MlpParams& member_params(int i) const { return members_[static_cast<std::size_t>(i)]; }

  void save(const std::string& path) const;
  void load(const std::string& path);

 private:
  Vec normalise_input(const Vec& s, const Vec& a) const;
  DiagGaussian delta_dist(int member, const Vec& input) const;

  int state_dim_;
  int action_dim_;
  EnsembleConfig cfg_;
  std::vector<MlpParams> members_;
  std::vector<AdamState> adam_;
  Vec input_mean_;
  Vec input_std_;
};

}  // namespace chi
