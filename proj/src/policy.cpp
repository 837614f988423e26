#include "chi/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "chi/checkpoint.hpp"

namespace chi {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;
constexpr double kLog2 = 0.6931471805599453;

// log(1 - tanh(u)^2), stable for large |u|.
double log_one_minus_tanh_sq(double u) {
  const double au = std::abs(u);
  return 2.0 * (kLog2 - au - std::log1p(std::exp(-2.0 * au)));
}

}  // namespace

GaussianPolicy::GaussianPolicy(int state_dim, int action_dim, double action_bound, int hidden,
                               RandomStream& rng)
    : state_dim_(state_dim), action_dim_(action_dim), bound_(action_bound) {
  net_ = mlp_init({state_dim, hidden, hidden, 2 * action_dim}, rng);
}

DiagGaussian GaussianPolicy::distribution(const Vec& s) const {
  const Vec out = mlp_forward(net_, s);
  Vec mean(out.begin(), out.begin() + action_dim_);
  Vec log_std(out.begin() + action_dim_, out.end());
  return make_diag_gaussian(std::move(mean), std::move(log_std));
}

Vec GaussianPolicy::mean_action(const Vec& s) const {
  DiagGaussian d = distribution(s);
  Vec a = std::move(d.mean);
  for (double& x : a) x = std::clamp(x, -bound_, bound_);
  return a;
}

GaussianPolicy::Sample GaussianPolicy::sample(const Vec& s, RandomStream& rng) const {
  const DiagGaussian d = distribution(s);
  Sample out;
  out.pre_squash.resize(static_cast<std::size_t>(action_dim_));
  out.action.resize(static_cast<std::size_t>(action_dim_));
  double lp = 0.0;
  for (int i = 0; i < action_dim_; ++i) {
    const double eps = rng.normal();
    const double sigma = std::exp(d.log_std[static_cast<std::size_t>(i)]);
    const double u = d.mean[static_cast<std::size_t>(i)] + sigma * eps;
    out.pre_squash[static_cast<std::size_t>(i)] = u;
    out.action[static_cast<std::size_t>(i)] = bound_ * std::tanh(u);
    lp += -d.log_std[static_cast<std::size_t>(i)] - 0.5 * eps * eps - 0.5 * kLog2Pi;
    lp += -std::log(bound_) - log_one_minus_tanh_sq(u);
  }
  out.log_prob = lp;
  return out;
}

double GaussianPolicy::log_prob_pre_squash(const DiagGaussian& dist, const Vec& u) const {
  double lp = gaussian_log_prob(dist, u);
  for (double ui : u) lp += -std::log(bound_) - log_one_minus_tanh_sq(ui);
  return lp;
}

PolicyRollout rollout_policy_through_model(const GaussianPolicy& policy,
                                           const TransitionModel& model, const Vec& s, int horizon,
                                           double sigma_min, double sigma_max,
                                           RandomStream* sample_rng) {
  if (horizon < 1) throw std::invalid_argument("rollout_policy_through_model: horizon must be >= 1");
  PolicyRollout out;
  out.states.reserve(static_cast<std::size_t>(horizon));
  out.dist.means.reserve(static_cast<std::size_t>(horizon));
  out.dist.stds.reserve(static_cast<std::size_t>(horizon));
  const double bound = policy.action_bound();
  Vec cur = s;
  for (int t = 0; t < horizon; ++t) {
    out.states.push_back(cur);
    const DiagGaussian d = policy.distribution(cur);
    Vec mean = d.mean;
    for (double& x : mean) x = std::clamp(x, -bound, bound);
    Vec std_clamped = d.std();
    for (double& x : std_clamped) x = std::clamp(x, sigma_min, sigma_max);
    out.dist.means.push_back(mean);
    out.dist.stds.push_back(std::move(std_clamped));
    if (t + 1 == horizon) break;
    Vec advance = mean;
    if (sample_rng != nullptr) {
      advance.resize(mean.size());
      for (std::size_t i = 0; i < mean.size(); ++i)
        advance[i] = bound * std::tanh(d.mean[i] + std::exp(d.log_std[i]) * sample_rng->normal());
    }
    Vec next = model.mean_next(cur, advance);
    if (!all_finite(next)) {
      // Freeze the remaining means at the last valid value, stds broad.
      out.truncated = true;
      for (int rest = t + 1; rest < horizon; ++rest) {
        out.dist.means.push_back(mean);
        out.dist.stds.push_back(Vec(mean.size(), sigma_max));
      }
      break;
    }
    cur = std::move(next);
  }
  return out;
}

SacLearner::SacLearner(int state_dim, int action_dim, double action_bound, const SacConfig& cfg,
                       RandomStream& rng)
    : state_dim_(state_dim),
      action_dim_(action_dim),
      cfg_(cfg),
      policy_(state_dim, action_dim, action_bound, cfg.hidden, rng) {
  const std::vector<int> critic_dims{state_dim + action_dim, cfg.hidden, cfg.hidden, 1};
  q1_ = mlp_init(critic_dims, rng);
  q2_ = mlp_init(critic_dims, rng);
  q1_target_ = q1_;
  q2_target_ = q2_;
  policy_adam_ = adam_init(policy_.net());
  q1_adam_ = adam_init(q1_);
  q2_adam_ = adam_init(q2_);
}

namespace {

Vec concat(const Vec& s, const Vec& a) {
  Vec x;
  x.reserve(s.size() + a.size());
  x.insert(x.end(), s.begin(), s.end());
  x.insert(x.end(), a.begin(), a.end());
  return x;
}

}  // namespace

double SacLearner::q_value(int which, const Vec& s, const Vec& a) const {
  const MlpParams& net = which == 0 ? q1_ : q2_;
  return mlp_forward(net, concat(s, a))[0];
}

double SacLearner::target_q_value(int which, const Vec& s, const Vec& a) const {
  const MlpParams& net = which == 0 ? q1_target_ : q2_target_;
  return mlp_forward(net, concat(s, a))[0];
}

double SacLearner::min_q(const Vec& s, const Vec& a) const {
  return std::min(q_value(0, s, a), q_value(1, s, a));
}

void SacLearner::polyak() {
  auto blend = [&](MlpParams& target, const MlpParams& online) {
    for (std::size_t li = 0; li < target.layers.size(); ++li) {
      auto& tw = target.layers[li].w.data;
      const auto& ow = online.layers[li].w.data;
      for (std::size_t i = 0; i < tw.size(); ++i)
        tw[i] = (1.0 - cfg_.tau) * tw[i] + cfg_.tau * ow[i];
      auto& tb = target.layers[li].b;
      const auto& ob = online.layers[li].b;
      for (std::size_t i = 0; i < tb.size(); ++i)
        tb[i] = (1.0 - cfg_.tau) * tb[i] + cfg_.tau * ob[i];
    }
  };
  blend(q1_target_, q1_);
  blend(q2_target_, q2_);
}

SacLosses SacLearner::update(const std::vector<Transition>& batch, RandomStream& rng) {
  SacLosses losses;
  if (batch.empty()) throw std::invalid_argument("SacLearner::update: empty batch");
  const std::size_t n = batch.size();
  const double inv_n = 1.0 / static_cast<double>(n);

  // Soft Bellman targets from the target critics and a fresh policy sample.
  Vec targets(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Transition& t = batch[i];
    const auto next_sample = policy_.sample(t.s_next, rng);
    const double tq = std::min(target_q_value(0, t.s_next, next_sample.action),
                               target_q_value(1, t.s_next, next_sample.action));
    targets[i] = t.r + cfg_.gamma * (t.done ? 0.0 : 1.0) *
                           (tq - cfg_.alpha * next_sample.log_prob);
  }
  if (!all_finite(targets)) return losses;

  // Critic regression.
  const AdamConfig adam_cfg{cfg_.lr, 0.9, 0.999, 1e-8};
  bool ok = true;
  double critic_loss = 0.0;
  for (int which = 0; which < 2; ++which) {
    MlpParams& net = which == 0 ? q1_ : q2_;
    AdamState& adam = which == 0 ? q1_adam_ : q2_adam_;
    MlpGrads grads = mlp_grads_like(net);
    MlpCache cache;
    for (std::size_t i = 0; i < n; ++i) {
      const Transition& t = batch[i];
      const double q = mlp_forward(net, concat(t.s, t.a), cache)[0];
      const double err = q - targets[i];
      critic_loss += 0.5 * err * err * inv_n;
      mlp_backward(net, cache, Vec{2.0 * err * inv_n}, grads);
    }
    ok = adam_step(net, grads, adam, adam_cfg) && ok;
  }
  losses.critic_loss = critic_loss;

  // Policy step against the updated critics.
  MlpGrads policy_grads = mlp_grads_like(policy_.net());
  MlpCache policy_cache;
  MlpCache critic_cache;
  double policy_loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Transition& t = batch[i];
    const Vec head = mlp_forward(policy_.net(), t.s, policy_cache);
    Vec action(static_cast<std::size_t>(action_dim_));
    Vec tanh_u(static_cast<std::size_t>(action_dim_));
    Vec sigma(static_cast<std::size_t>(action_dim_));
    Vec eps(static_cast<std::size_t>(action_dim_));
    double log_prob = 0.0;
    for (int d = 0; d < action_dim_; ++d) {
      const double raw_ls = head[static_cast<std::size_t>(action_dim_ + d)];
      const double ls = clamp_log_std(raw_ls);
      eps[static_cast<std::size_t>(d)] = rng.normal();
      sigma[static_cast<std::size_t>(d)] = std::exp(ls);
      const double u = head[static_cast<std::size_t>(d)] +
                       sigma[static_cast<std::size_t>(d)] * eps[static_cast<std::size_t>(d)];
      tanh_u[static_cast<std::size_t>(d)] = std::tanh(u);
      action[static_cast<std::size_t>(d)] = policy_.action_bound() * tanh_u[static_cast<std::size_t>(d)];
      log_prob += -ls - 0.5 * eps[static_cast<std::size_t>(d)] * eps[static_cast<std::size_t>(d)] -
                  0.5 * kLog2Pi - std::log(policy_.action_bound()) - log_one_minus_tanh_sq(u);
    }

    const double q1v = mlp_forward(q1_, concat(t.s, action), critic_cache)[0];
    MlpGrads q_input_grads = mlp_grads_like(q1_);
    const double q2v = q_value(1, t.s, action);
    double qmin;
    if (q1v <= q2v) {
      qmin = q1v;
      mlp_backward(q1_, critic_cache, Vec{1.0}, q_input_grads);
    } else {
      qmin = q2v;
      q_input_grads = mlp_grads_like(q2_);
      mlp_forward(q2_, concat(t.s, action), critic_cache);
      mlp_backward(q2_, critic_cache, Vec{1.0}, q_input_grads);
    }
    policy_loss += (cfg_.alpha * log_prob - qmin) * inv_n;

    Vec head_grad(head.size(), 0.0);
    for (int d = 0; d < action_dim_; ++d) {
      const std::size_t sd = static_cast<std::size_t>(d);
      const double dq_da = q_input_grads.input[static_cast<std::size_t>(state_dim_ + d)];
      const double dL_da = -dq_da * inv_n;
      const double da_du = policy_.action_bound() * (1.0 - tanh_u[sd] * tanh_u[sd]);
      // d log_prob / du = 2 tanh(u); du/dmu = 1; du/dls = sigma * eps.
      const double dlp_du = 2.0 * tanh_u[sd];
      head_grad[sd] = cfg_.alpha * dlp_du * inv_n + dL_da * da_du;
      const double raw_ls = head[static_cast<std::size_t>(action_dim_ + d)];
      if (raw_ls > kLogStdMin && raw_ls < kLogStdMax) {
        const double du_dls = sigma[sd] * eps[sd];
        head_grad[static_cast<std::size_t>(action_dim_ + d)] =
            cfg_.alpha * (-1.0 + dlp_du * du_dls) * inv_n + dL_da * da_du * du_dls;
      }
    }
    mlp_backward(policy_.net(), policy_cache, head_grad, policy_grads);
  }
  losses.policy_loss = policy_loss;
  if (!std::isfinite(critic_loss) || !std::isfinite(policy_loss)) return losses;
  ok = adam_step(policy_.net(), policy_grads, policy_adam_, adam_cfg) && ok;

  polyak();
  losses.applied = ok;
  return losses;
}

void SacLearner::save(const std::string& policy_path, const std::string& critic_path) const {
  save_checkpoint(policy_path, mlp_to_tensors(policy_.net()));
  std::vector<Tensor> critic_tensors;
  Tensor header;
  header.dims = {1};
  header.data = {static_cast<double>(q1_.layers.size())};
  critic_tensors.push_back(std::move(header));
  for (const MlpParams* net : {&q1_, &q2_, &q1_target_, &q2_target_}) {
    auto ts = mlp_to_tensors(*net);
    for (auto& t : ts) critic_tensors.push_back(std::move(t));
  }
  save_checkpoint(critic_path, critic_tensors);
}

void SacLearner::load(const std::string& policy_path, const std::string& critic_path) {
  const auto policy_tensors = load_checkpoint(policy_path);
  std::size_t cursor = 0;
  policy_.net() = mlp_from_tensors(policy_tensors, cursor,
                                   static_cast<int>(policy_.net().layers.size()));
  const auto critic_tensors = load_checkpoint(critic_path);
  if (critic_tensors.empty() || critic_tensors[0].data.size() != 1)
    throw std::runtime_error("SacLearner::load: malformed critic checkpoint");
  const int n_layers = static_cast<int>(critic_tensors[0].data[0]);
  cursor = 1;
  for (MlpParams* net : {&q1_, &q2_, &q1_target_, &q2_target_})
    *net = mlp_from_tensors(critic_tensors, cursor, n_layers);
}

}  // namespace chi
