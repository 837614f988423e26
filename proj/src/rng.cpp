#include "chi/rng.hpp"

#include <cmath>
#include <numbers>

namespace chi {

double RandomStream::normal() {
  // u1 in (0, 1] so the log is finite.
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

RandomStream substream(std::uint64_t seed, std::string_view name) {
  // FNV-1a over the name, mixed with the seed through one splitmix round.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  RandomStream mix(seed ^ h);
  return RandomStream(mix.next_u64());
}

}  // namespace chi
