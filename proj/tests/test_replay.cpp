#include <doctest.h>

#include <cmath>

#include "chi/replay.hpp"

using namespace chi;

namespace {

Transition make_transition(double tag, bool synthetic = false) {
  Transition t;
  t.s = {tag, 0.0};
  t.a = {0.0};
  t.r = tag;
  t.s_next = {tag + 1.0, 0.0};
  t.synthetic = synthetic;
  return t;
}

}  // namespace

TEST_CASE("ring evicts the oldest entries") {
  ReplayBuffer buf(3);
  for (int i = 0; i < 5; ++i) buf.append(make_transition(i));
  REQUIRE(buf.size() == 3);
  CHECK(buf[0].r == doctest::Approx(2.0));
  CHECK(buf[1].r == doctest::Approx(3.0));
  CHECK(buf[2].r == doctest::Approx(4.0));
}

TEST_CASE("non-finite transitions are refused") {
  ReplayBuffer buf(4);
  Transition bad = make_transition(1.0);
  bad.s_next[0] = std::nan("");
  CHECK_FALSE(buf.append(bad));
  CHECK(buf.size() == 0);
  CHECK(buf.rejected_count() == 1);
}

TEST_CASE("real/synthetic counts survive eviction") {
  ReplayBuffer buf(4);
  buf.append(make_transition(0, false));
  buf.append(make_transition(1, true));
  buf.append(make_transition(2, true));
  buf.append(make_transition(3, false));
  CHECK(buf.real_count() == 2);
  buf.append(make_transition(4, true));  // evicts the real tag-0 entry
  CHECK(buf.real_count() == 1);
  CHECK(buf.synthetic_count() == 3);
  const auto real = buf.real_transitions();
  REQUIRE(real.size() == 1);
  CHECK(real[0].r == doctest::Approx(3.0));
}

TEST_CASE("batch sampling honours the synthetic cap") {
  ReplayBuffer buf(1000);
  for (int i = 0; i < 20; ++i) buf.append(make_transition(i, false));
  for (int i = 0; i < 500; ++i) buf.append(make_transition(100 + i, true));
  RandomStream rng = substream(5, "buffer");
  for (int trial = 0; trial < 10; ++trial) {
    const auto batch = buf.sample_batch(40, 0.5, rng);
    int synthetic = 0;
    for (const Transition& t : batch) synthetic += t.synthetic ? 1 : 0;
    CHECK(synthetic <= 20);
  }
}
