#include <doctest.h>

#include <cmath>

#include "chi/dynamics.hpp"
#include "chi/rng.hpp"
#include "test_models.hpp"

using namespace chi;

namespace {

// Synthetic 1-d linear system s' = s + a with states/actions in [-1, 1].
std::vector<Transition> linear_system_data(int n, RandomStream& rng) {
  std::vector<Transition> data;
  data.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Transition t;
    t.s = {rng.uniform(-1.0, 1.0)};
    t.a = {rng.uniform(-1.0, 1.0)};
    t.s_next = {t.s[0] + t.a[0]};
    t.r = 0.0;
    data.push_back(std::move(t));
  }
  return data;
}

EnsembleConfig small_ensemble(int members) {
  EnsembleConfig cfg;
  cfg.members = members;
  cfg.hidden = 32;
  cfg.depth = 2;
  cfg.lr = 1e-3;
  return cfg;
}

}  // namespace

TEST_CASE("zeroed output head predicts no state change") {
  RandomStream rng = substream(41, "ens");
  EnsembleDynamics ens(2, 1, small_ensemble(2), rng);
  auto& head = ens.member_params(0).layers.back();
  std::fill(head.w.data.begin(), head.w.data.end(), 0.0);
  std::fill(head.b.begin(), head.b.end(), 0.0);
  const Vec s{0.3, -0.8};
  const DiagGaussian d = ens.predict(0, s, {0.5});
  CHECK(d.mean[0] == doctest::Approx(0.3));
  CHECK(d.mean[1] == doctest::Approx(-0.8));
}

TEST_CASE("predict rejects out-of-range members") {
  RandomStream rng = substream(41, "ens");
  EnsembleDynamics ens(1, 1, small_ensemble(2), rng);
  CHECK_THROWS_AS(ens.predict(5, {0.0}, {0.0}), std::out_of_range);
}

TEST_CASE("identical members make the ensemble mean equal a single member") {
  RandomStream rng = substream(43, "ens");
  EnsembleDynamics ens(1, 1, small_ensemble(3), rng);
  ens.member_params(1) = ens.member_params(0);
  ens.member_params(2) = ens.member_params(0);
  const Vec s{0.4};
  const Vec a{-0.2};
  CHECK(ens.mean_next(s, a)[0] == doctest::Approx(ens.member_next(0, s, a)[0]).epsilon(1e-12));
}

TEST_CASE("a member trained to convergence learns s' = s + a") {
  RandomStream data_rng = substream(47, "data");
  const auto data = linear_system_data(500, data_rng);
  RandomStream rng = substream(47, "ens");
  EnsembleConfig cfg = small_ensemble(1);
  EnsembleDynamics ens(1, 1, cfg, rng);
  ens.train(data, /*epochs=*/300, /*batch=*/50, rng);

  RandomStream probe = substream(47, "probe");
  double max_err = 0.0;
  double max_sigma = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Vec s{probe.uniform(-1.0, 1.0)};
    const Vec a{probe.uniform(-1.0, 1.0)};
    const DiagGaussian d = ens.predict(0, s, a);
    max_err = std::max(max_err, std::abs(d.mean[0] - (s[0] + a[0])));
    max_sigma = std::max(max_sigma, std::exp(d.log_std[0]));
  }
  CHECK(max_err <= 1e-2);
  CHECK(max_sigma <= 5e-2);  // near the clamp floor on deterministic data
}

TEST_CASE("training NLL decreases from the first to the last epoch") {
  RandomStream data_rng = substream(53, "data");
  const auto data = linear_system_data(200, data_rng);
  RandomStream rng = substream(53, "ens");
  EnsembleDynamics ens(1, 1, small_ensemble(2), rng);
  const TrainReport report = ens.train(data, /*epochs=*/10, /*batch=*/50, rng);
  REQUIRE(report.epochs == 10);
  for (const auto& per_epoch : report.member_epoch_nll) {
    REQUIRE(per_epoch.size() == 10);
    CHECK(per_epoch.back() < per_epoch.front());
  }
}

TEST_CASE("training twice with identical seeds gives identical parameters") {
  RandomStream data_rng = substream(59, "data");
  const auto data = linear_system_data(120, data_rng);

  auto train_once = [&]() {
    RandomStream rng = substream(59, "ens");
    EnsembleDynamics ens(1, 1, small_ensemble(2), rng);
    RandomStream train_rng = substream(59, "train");
    ens.train(data, 5, 30, train_rng);
    return ens;
  };
  const EnsembleDynamics a = train_once();
  const EnsembleDynamics b = train_once();
  for (int e = 0; e < 2; ++e) {
    for (std::size_t li = 0; li < a.member_params(e).layers.size(); ++li) {
      CHECK(a.member_params(e).layers[li].w.data == b.member_params(e).layers[li].w.data);
      CHECK(a.member_params(e).layers[li].b == b.member_params(e).layers[li].b);
    }
  }
}

TEST_CASE("empty datasets are a no-op") {
  RandomStream rng = substream(61, "ens");
  EnsembleDynamics ens(1, 1, small_ensemble(1), rng);
  const TrainReport report = ens.train({}, rng);
  CHECK(report.epochs == 0);
}

TEST_CASE("held-out NLL improves over the untrained model") {
  RandomStream data_rng = substream(67, "data");
  auto data = linear_system_data(500, data_rng);
  const std::vector<Transition> held_out(data.begin() + 400, data.end());
  data.resize(400);

  RandomStream rng = substream(67, "ens");
  EnsembleDynamics ens(1, 1, small_ensemble(5), rng);
  const double before = ens.mean_nll(held_out);
  ens.train(data, 10, 50, rng);
  const double after = ens.mean_nll(held_out);
  CHECK(after < before);
}

TEST_CASE("ensemble disagreement grows off the training distribution") {
  RandomStream data_rng = substream(71, "data");
  const auto data = linear_system_data(300, data_rng);
  RandomStream rng = substream(71, "ens");
  EnsembleDynamics ens(1, 1, small_ensemble(5), rng);
  ens.train(data, 15, 50, rng);

  double in_dist = 0.0, out_dist = 0.0;
  RandomStream probe = substream(71, "probe");
  for (int i = 0; i < 20; ++i) {
    in_dist += ens.disagreement({probe.uniform(-1.0, 1.0)}, {probe.uniform(-1.0, 1.0)});
    out_dist += ens.disagreement({probe.uniform(8.0, 12.0)}, {probe.uniform(-1.0, 1.0)});
  }
  CHECK(out_dist > in_dist);
}

TEST_CASE("rollout with zero horizon returns only the start state") {
  const auto model = testing::shift_model(1);
  const auto rr = rollout_model(model, {0.5}, {}, [](const Vec&, const Vec&) { return 0.0; });
  REQUIRE(rr.states.size() == 1);
  CHECK(rr.states[0] == Vec{0.5});
  CHECK(rr.rewards.empty());
  CHECK_FALSE(rr.truncated);
}

TEST_CASE("perfect shift model propagates exactly") {
  const auto model = testing::shift_model(1);
  const auto rr = rollout_model(model, {0.0}, {{1.0}, {1.0}},
                                [](const Vec& s, const Vec&) { return s[0]; });
  REQUIRE(rr.states.size() == 3);
  CHECK(rr.states[0] == Vec{0.0});
  CHECK(rr.states[1] == Vec{1.0});
  CHECK(rr.states[2] == Vec{2.0});
  // Rewards evaluated on post-move states.
  CHECK(rr.rewards == Vec{1.0, 2.0});
}

TEST_CASE("mean-mode rollouts are deterministic") {
  RandomStream rng = substream(73, "ens");
  EnsembleDynamics ens(2, 2, small_ensemble(3), rng);
  const std::vector<Vec> actions{{0.1, 0.0}, {0.0, 0.1}, {-0.1, 0.1}};
  auto reward = [](const Vec& s, const Vec&) { return s[0] + s[1]; };
  const auto a = rollout_model(ens, {0.2, 0.3}, actions, reward);
  const auto b = rollout_model(ens, {0.2, 0.3}, actions, reward);
  REQUIRE(a.states.size() == b.states.size());
  for (std::size_t i = 0; i < a.states.size(); ++i) CHECK(a.states[i] == b.states[i]);
  CHECK(a.rewards == b.rewards);
}

TEST_CASE("non-finite predictions truncate the rollout with floor rewards") {
  testing::LambdaModel model(1, 1, [](const Vec& s, const Vec& a) {
    if (s[0] > 0.5) return Vec{std::nan("")};
    return Vec{s[0] + a[0]};
  });
  const auto rr = rollout_model(model, {0.0}, {{0.4}, {0.4}, {0.4}},
                                [](const Vec& s, const Vec&) { return s[0]; });
  CHECK(rr.truncated);
  REQUIRE(rr.states.size() == 3);  // s0 and two finite steps
  CHECK(rr.rewards[2] == doctest::Approx(kFloorReward));
}

TEST_CASE("a perfectly trained point-mass-like model scores the stay-put sequence exactly") {
  // rollout reward of the all-zero action sequence from the origin equals
  // H * reward(origin) under a perfect model.
  const auto model = testing::shift_model(2);
  auto reward = [](const Vec& s, const Vec&) {
    const double dx = s[0] - 1.0, dy = s[1] - 1.0;
    return 1.0 - (dx * dx + dy * dy);
  };
  const int horizon = 7;
  const std::vector<Vec> actions(horizon, Vec{0.0, 0.0});
  const auto rr = rollout_model(model, {0.0, 0.0}, actions, reward);
  double total = 0.0;
  for (double r : rr.rewards) total += r;
  CHECK(total == doctest::Approx(horizon * -1.0));
}
