#include "chi/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include "chi/checkpoint.hpp"

namespace chi {

RolloutResult rollout_model(const TransitionModel& model, const Vec& s0,
                            const std::vector<Vec>& actions, const RewardFn& reward,
                            Propagation mode, int member) {
  RolloutResult out;
  out.states.reserve(actions.size() + 1);
  out.states.push_back(s0);
  out.rewards.assign(actions.size(), kFloorReward);
  Vec s = s0;
  for (std::size_t t = 0; t < actions.size(); ++t) {
    Vec next = (mode == Propagation::Member) ? model.member_next(member, s, actions[t])
                                             : model.mean_next(s, actions[t]);
    if (!all_finite(next)) {
      out.truncated = true;
      return out;
    }
    out.rewards[t] = reward(next, actions[t]);
    out.states.push_back(next);
    s = std::move(next);
  }
  return out;
}

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

std::vector<int> mlp_dims(int in, int out, const EnsembleConfig& cfg) {
  std::vector<int> dims{in};
  for (int i = 0; i < cfg.depth; ++i) dims.push_back(cfg.hidden);
  dims.push_back(out);
  return dims;
}

}  // namespace

EnsembleDynamics::EnsembleDynamics(int state_dim, int action_dim, const EnsembleConfig& cfg,
                                   RandomStream& rng)
    : state_dim_(state_dim), action_dim_(action_dim), cfg_(cfg) {
  if (cfg_.members < 1) throw std::invalid_argument("EnsembleDynamics: members must be >= 1");
  const auto dims = mlp_dims(state_dim_ + action_dim_, 2 * state_dim_, cfg_);
  for (int e = 0; e < cfg_.members; ++e) {
    members_.push_back(mlp_init(dims, rng));
    adam_.push_back(adam_init(members_.back()));
  }
  input_mean_.assign(static_cast<std::size_t>(state_dim_ + action_dim_), 0.0);
  input_std_.assign(static_cast<std::size_t>(state_dim_ + action_dim_), 1.0);
}

Vec EnsembleDynamics::normalise_input(const Vec& s, const Vec& a) const {
  Vec x(static_cast<std::size_t>(state_dim_ + action_dim_));
  for (int i = 0; i < state_dim_; ++i)
    x[i] = (s[static_cast<std::size_t>(i)] - input_mean_[i]) / input_std_[i];
  for (int i = 0; i < action_dim_; ++i)
    x[state_dim_ + i] = (a[static_cast<std::size_t>(i)] - input_mean_[state_dim_ + i]) /
                        input_std_[state_dim_ + i];
  return x;
}

DiagGaussian EnsembleDynamics::delta_dist(int member, const Vec& input) const {
  const Vec out = mlp_forward(members_[static_cast<std::size_t>(member)], input);
  Vec mean(out.begin(), out.begin() + state_dim_);
  Vec log_std(out.begin() + state_dim_, out.end());
  return make_diag_gaussian(std::move(mean), std::move(log_std));
}

DiagGaussian EnsembleDynamics::predict(int member, const Vec& s, const Vec& a) const {
  if (member < 0 || member >= members())
    throw std::out_of_range("EnsembleDynamics::predict: member index out of range");
  DiagGaussian d = delta_dist(member, normalise_input(s, a));
  for (int i = 0; i < state_dim_; ++i) d.mean[static_cast<std::size_t>(i)] += s[static_cast<std::size_t>(i)];
  return d;
}

Vec EnsembleDynamics::member_next(int member, const Vec& s, const Vec& a) const {
  return predict(member, s, a).mean;
}

Vec EnsembleDynamics::mean_next(const Vec& s, const Vec& a) const {
  Vec acc(static_cast<std::size_t>(state_dim_), 0.0);
  const Vec input = normalise_input(s, a);
  for (int e = 0; e < members(); ++e) {
    DiagGaussian d = delta_dist(e, input);
    for (int i = 0; i < state_dim_; ++i) acc[static_cast<std::size_t>(i)] += d.mean[static_cast<std::size_t>(i)];
  }
  const double inv = 1.0 / static_cast<double>(members());
  for (int i = 0; i < state_dim_; ++i)
    acc[static_cast<std::size_t>(i)] = s[static_cast<std::size_t>(i)] + acc[static_cast<std::size_t>(i)] * inv;
  return acc;
}

double EnsembleDynamics::nll(int member, const Vec& s, const Vec& a, const Vec& s_next) const {
  DiagGaussian d = delta_dist(member, normalise_input(s, a));
  double nll = 0.0;
  for (int i = 0; i < state_dim_; ++i) {
    double target = s_next[static_cast<std::size_t>(i)] - s[static_cast<std::size_t>(i)];
    double ls = d.log_std[static_cast<std::size_t>(i)];
    double z = (target - d.mean[static_cast<std::size_t>(i)]) * std::exp(-ls);
    nll += 0.5 * z * z + ls + 0.5 * kLog2Pi;
  }
  return nll;
}

double EnsembleDynamics::mean_nll(const std::vector<Transition>& data) const {
  if (data.empty()) return 0.0;
  double acc = 0.0;
  for (const Transition& t : data)
    for (int e = 0; e < members(); ++e) acc += nll(e, t.s, t.a, t.s_next);
  return acc / (static_cast<double>(data.size()) * members());
}

double EnsembleDynamics::disagreement(const Vec& s, const Vec& a) const {
  const Vec input = normalise_input(s, a);
  std::vector<Vec> means;
  means.reserve(static_cast<std::size_t>(members()));
  for (int e = 0; e < members(); ++e) means.push_back(delta_dist(e, input).mean);
  double total = 0.0;
  for (int i = 0; i < state_dim_; ++i) {
    double mu = 0.0;
    for (const Vec& m : means) mu += m[static_cast<std::size_t>(i)];
    mu /= members();
    double var = 0.0;
    for (const Vec& m : means) {
      double d = m[static_cast<std::size_t>(i)] - mu;
      var += d * d;
    }
    total += var / members();
  }
  return total / state_dim_;
}

TrainReport EnsembleDynamics::train(const std::vector<Transition>& data, RandomStream& rng) {
  return train(data, cfg_.train_epochs, cfg_.train_batch, rng);
}

TrainReport EnsembleDynamics::train(const std::vector<Transition>& data, int epochs, int batch,
                                    RandomStream& rng) {
  TrainReport report;
  if (data.empty()) {
    std::cerr << "EnsembleDynamics::train: empty dataset, skipping\n";
    return report;
  }
  if (batch < 1) throw std::invalid_argument("EnsembleDynamics::train: batch must be >= 1");

  const std::size_t n = data.size();
  const std::size_t in_dim = static_cast<std::size_t>(state_dim_ + action_dim_);

  // Input normalisation statistics over the full dataset.
  input_mean_.assign(in_dim, 0.0);
  input_std_.assign(in_dim, 0.0);
  for (const Transition& t : data) {
    for (int i = 0; i < state_dim_; ++i) input_mean_[i] += t.s[static_cast<std::size_t>(i)];
    for (int i = 0; i < action_dim_; ++i) input_mean_[state_dim_ + i] += t.a[static_cast<std::size_t>(i)];
  }
  for (double& x : input_mean_) x /= static_cast<double>(n);
  for (const Transition& t : data) {
    for (int i = 0; i < state_dim_; ++i) {
      double d = t.s[static_cast<std::size_t>(i)] - input_mean_[i];
      input_std_[i] += d * d;
    }
    for (int i = 0; i < action_dim_; ++i) {
      double d = t.a[static_cast<std::size_t>(i)] - input_mean_[state_dim_ + i];
      input_std_[state_dim_ + i] += d * d;
    }
  }
  for (double& x : input_std_) x = std::max(std::sqrt(x / static_cast<double>(n)), 1e-8);

  report.epochs = epochs;
  report.member_epoch_nll.assign(static_cast<std::size_t>(members()), {});

  const AdamConfig adam_cfg{cfg_.lr, 0.9, 0.999, 1e-8};
  MlpGrads grads = mlp_grads_like(members_[0]);
  MlpCache cache;

  for (int e = 0; e < members(); ++e) {
    // Independent bootstrap resample for this member.
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<std::size_t>(rng.uniform_int(static_cast<int>(n)));

    for (int epoch = 0; epoch < epochs; ++epoch) {
      // Fresh shuffle of the bootstrap sample each epoch.
      for (std::size_t i = n; i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.uniform_int(static_cast<int>(i)));
        std::swap(idx[i - 1], idx[j]);
      }
      double epoch_nll = 0.0;
      std::size_t processed = 0;
      for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(batch)) {
        const std::size_t stop = std::min(n, start + static_cast<std::size_t>(batch));
        const double inv_b = 1.0 / static_cast<double>(stop - start);
        grads.zero();
        for (std::size_t k = start; k < stop; ++k) {
          const Transition& t = data[idx[k]];
          const Vec input = normalise_input(t.s, t.a);
          const Vec out = mlp_forward(members_[static_cast<std::size_t>(e)], input, cache);
          Vec out_grad(out.size(), 0.0);
          for (int i = 0; i < state_dim_; ++i) {
            const double target = t.s_next[static_cast<std::size_t>(i)] - t.s[static_cast<std::size_t>(i)];
            const double raw_ls = out[static_cast<std::size_t>(state_dim_ + i)];
            const double ls = clamp_log_std(raw_ls);
            const double z = (target - out[static_cast<std::size_t>(i)]) * std::exp(-ls);
            epoch_nll += 0.5 * z * z + ls + 0.5 * kLog2Pi;
            out_grad[static_cast<std::size_t>(i)] = -z * std::exp(-ls) * inv_b;
            // Clamped log-stds pass no gradient.
            const double dls = (raw_ls > kLogStdMin && raw_ls < kLogStdMax) ? (1.0 - z * z) : 0.0;
            out_grad[static_cast<std::size_t>(state_dim_ + i)] = dls * inv_b;
          }
          mlp_backward(members_[static_cast<std::size_t>(e)], cache, out_grad, grads);
        }
        adam_step(members_[static_cast<std::size_t>(e)], grads, adam_[static_cast<std::size_t>(e)], adam_cfg);
        processed += stop - start;
      }
      report.member_epoch_nll[static_cast<std::size_t>(e)].push_back(
          epoch_nll / static_cast<double>(processed));
    }
  }
  return report;
}

void EnsembleDynamics::save(const std::string& path) const {
  std::vector<Tensor> tensors;
  Tensor header;
  header.dims = {4};
  header.data = {static_cast<double>(state_dim_), static_cast<double>(action_dim_),
                 static_cast<double>(members()), static_cast<double>(cfg_.depth + 1)};
  tensors.push_back(std::move(header));
  Tensor mean;
  mean.dims = {static_cast<std::uint32_t>(input_mean_.size())};
  mean.data = input_mean_;
  tensors.push_back(std::move(mean));
  Tensor std_t;
  std_t.dims = {static_cast<std::uint32_t>(input_std_.size())};
  std_t.data = input_std_;
  tensors.push_back(std::move(std_t));
  for (const MlpParams& m : members_) {
    auto layer_tensors = mlp_to_tensors(m);
    for (auto& t : layer_tensors) tensors.push_back(std::move(t));
  }
  save_checkpoint(path, tensors);
}

void EnsembleDynamics::load(const std::string& path) {
  const auto tensors = load_checkpoint(path);
  if (tensors.size() < 3 || tensors[0].data.size() != 4)
    throw std::runtime_error("EnsembleDynamics::load: malformed checkpoint");
  const int state_dim = static_cast<int>(tensors[0].data[0]);
  const int action_dim = static_cast<int>(tensors[0].data[1]);
  const int n_members = static_cast<int>(tensors[0].data[2]);
  const int n_layers = static_cast<int>(tensors[0].data[3]);
  if (state_dim != state_dim_ || action_dim != action_dim_ || n_members != members())
    throw std::runtime_error("EnsembleDynamics::load: checkpoint does not match configuration");
  input_mean_ = tensors[1].data;
  input_std_ = tensors[2].data;
  std::size_t cursor = 3;
  for (int e = 0; e < n_members; ++e)
    members_[static_cast<std::size_t>(e)] = mlp_from_tensors(tensors, cursor, n_layers);
}

}  // namespace chi
