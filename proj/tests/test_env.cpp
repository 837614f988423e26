#include <doctest.h>

#include <cmath>

#include "chi/env.hpp"
#include "chi/rng.hpp"

using namespace chi;

TEST_CASE("point mass resets to the origin regardless of seed") {
  PointMassEnv env;
  CHECK(env.reset(1) == Vec{0.0, 0.0});
  CHECK(env.reset(1) == Vec{0.0, 0.0});
  CHECK(env.reset(99) == Vec{0.0, 0.0});
}

TEST_CASE("oversized actions are rescaled to the step norm") {
  PointMassEnv env;
  env.reset(0);
  const StepResult r = env.step({0.1, 0.0});
  CHECK(r.next_state[0] == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(r.next_state[1] == 0.0);
}

TEST_CASE("zero action leaves the position and pays the local reward") {
  PointMassEnv env;
  env.reset(0);
  const StepResult r = env.step({0.0, 0.0});
  CHECK(r.next_state == Vec{0.0, 0.0});
  CHECK(r.reward == doctest::Approx(env.reward({0.0, 0.0}, {0.0, 0.0})));
  CHECK(r.reward == doctest::Approx(-1.0));
}

TEST_CASE("motion into the wall is blocked at the face") {
  // Wall slab spans x in [0.49, 0.51]; y = 0.1 is below the opening.
  PointMassEnv env;
  Vec pos = env.reset(0);
  // Walk to (0.49, 0.1): 9 steps of +x then partial, then 2 of +y.
  for (int i = 0; i < 9; ++i) pos = env.step({0.05, 0.0}).next_state;
  pos = env.step({0.04, 0.0}).next_state;
  CHECK(pos[0] == doctest::Approx(0.49).epsilon(1e-12));
  for (int i = 0; i < 2; ++i) pos = env.step({0.0, 0.05}).next_state;
  CHECK(pos[1] == doctest::Approx(0.1).epsilon(1e-12));

  const StepResult r = env.step({0.05, 0.0});
  CHECK(r.next_state[0] == doctest::Approx(0.49));  // clipped at the wall face
  CHECK(r.next_state[1] == doctest::Approx(0.1));
}

TEST_CASE("the opening lets motion through") {
  PointMassEnv::Config cfg;
  PointMassEnv env(cfg);
  env.reset(0);
  // Place the mass in front of the opening by stepping legally.
  Vec pos = env.state();
  // Straight up to y = 0.5 first (10 steps), then right through the gap.
  for (int i = 0; i < 10; ++i) pos = env.step({0.0, 0.05}).next_state;
  CHECK(pos[1] == doctest::Approx(0.5));
  for (int i = 0; i < 12; ++i) pos = env.step({0.05, 0.0}).next_state;
  CHECK(pos[0] > 0.51);  // crossed the wall slab inside the gap
}

TEST_CASE("reward formula matches hand values") {
  PointMassEnv env;
  CHECK(env.reward({1.0, 1.0}, {}) == doctest::Approx(1.0));
  CHECK(env.reward({0.0, 0.0}, {}) == doctest::Approx(-1.0));
  CHECK(env.reward({0.5, 1.0}, {}) == doctest::Approx(0.75));
}

TEST_CASE("reward never exceeds one on the unit square") {
  PointMassEnv env;
  RandomStream rng = substream(71, "env");
  for (int i = 0; i < 1000; ++i) {
    const Vec s{rng.uniform(), rng.uniform()};
    CHECK(env.reward(s, {}) <= 1.0);
  }
}

TEST_CASE("random walks never enter the wall or leave the square") {
  RandomStream rng = substream(77, "env");
  const WallGeometry wall;
  for (int episode = 0; episode < 50; ++episode) {
    PointMassEnv env;
    env.reset(0);
    for (int step = 0; step < 50; ++step) {
      const Vec a{rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)};
      const Vec s = env.step(a).next_state;
      REQUIRE(s[0] >= 0.0);
      REQUIRE(s[0] <= 1.0);
      REQUIRE(s[1] >= 0.0);
      REQUIRE(s[1] <= 1.0);
      REQUIRE_FALSE(wall.inside(s[0], s[1]));
    }
  }
}

TEST_CASE("point mass steps are deterministic functions of state and action") {
  PointMassEnv a, b;
  a.reset(0);
  b.reset(12345);
  RandomStream rng = substream(79, "env");
  for (int i = 0; i < 50; ++i) {
    const Vec act{rng.uniform(-0.06, 0.06), rng.uniform(-0.06, 0.06)};
    const StepResult ra = a.step(act);
    const StepResult rb = b.step(act);
    CHECK(ra.next_state == rb.next_state);
    CHECK(ra.reward == rb.reward);
  }
}

TEST_CASE("stepping after the episode ends is an error") {
  PointMassEnv::Config cfg;
  cfg.episode_len = 2;
  PointMassEnv env(cfg);
  env.reset(0);
  env.step({0.0, 0.0});
  const StepResult last = env.step({0.0, 0.0});
  CHECK(last.done);
  CHECK_THROWS_AS(env.step({0.0, 0.0}), std::logic_error);
}

TEST_CASE("done fires exactly at the episode length") {
  PointMassEnv env;  // default 50 steps
  env.reset(0);
  for (int i = 0; i < 49; ++i) CHECK_FALSE(env.step({0.01, 0.0}).done);
  CHECK(env.step({0.01, 0.0}).done);
}

TEST_CASE("pendulum resets hang down with a seeded perturbation") {
  PendulumEnv env;
  const Vec a = env.reset(7);
  const Vec b = env.reset(7);
  const Vec c = env.reset(8);
  CHECK(a == b);
  CHECK(a != c);
  CHECK(a[0] < -0.9);  // cos(theta) near -1: hanging down
  CHECK(std::abs(a[2]) < 0.1);
}

TEST_CASE("pendulum reward is maximal upright and respects the torque term") {
  PendulumEnv env;
  const Vec upright{1.0, 0.0, 0.0};
  const Vec down{-1.0, 0.0, 0.0};
  CHECK(env.reward(upright, {0.0}) == doctest::Approx(0.0));
  CHECK(env.reward(down, {0.0}) < -9.0);
  CHECK(env.reward(upright, {2.0}) == doctest::Approx(-0.001 * 4.0));
}

TEST_CASE("make_env dispatches by name and applies overrides") {
  EnvOverrides o;
  o.episode_len = 7;
  auto env = make_env("pointmass", o);
  CHECK(env->spec().episode_len == 7);
  CHECK(env->spec().action_bound == doctest::Approx(0.05));
  auto pend = make_env("pendulum");
  CHECK(pend->spec().state_dim == 3);
  CHECK_THROWS(make_env("halfcheetah"));
}
