#pragma once

#include <functional>

#include "chi/dynamics.hpp"

namespace chi::testing {

// Deterministic analytic model for planner and rollout tests.
class LambdaModel : public chi::TransitionModel {
 public:
  using Fn = std::function<Vec(const Vec&, const Vec&)>;
  LambdaModel(int state_dim, int action_dim, Fn fn)
      : state_dim_(state_dim), action_dim_(action_dim), fn_(std::move(fn)) {}

  int state_dim() const override { return state_dim_; }
  int action_dim() const override { return action_dim_; }
  Vec mean_next(const Vec& s, const Vec& a) const override { return fn_(s, a); }

 private:
  int state_dim_;
  int action_dim_;
  Fn fn_;
};

// s' = s + a, any dimension.
inline LambdaModel shift_model(int dim) {
  return LambdaModel(dim, dim, [](const Vec& s, const Vec& a) {
    Vec next = s;
    for (std::size_t i = 0; i < next.size(); ++i) next[i] += a[i];
    return next;
  });
}

}  // namespace chi::testing
