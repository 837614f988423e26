#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace chi {

// All randomness in the library flows through RandomStream instances that are
// derived from a single run seed via named substreams. The generator is
// splitmix64 and the normal transform is a fixed Box-Muller (no cached spare),
// so draw sequences are reproducible across builds and call sites.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be positive.
  int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

  // Standard normal via Box-Muller; always consumes exactly two uniforms.
  double normal();

  void fill_normal(std::span<double> out) {
    for (double& x : out) x = normal();
  }

  std::vector<double> normal_vec(int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    fill_normal(v);
    return v;
  }

 private:
  std::uint64_t state_;
};

// Derives a deterministic substream from (seed, name). Distinct names give
// statistically independent streams.
RandomStream substream(std::uint64_t seed, std::string_view name);

}  // namespace chi
