#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "chi/checkpoint.hpp"
#include "chi/rng.hpp"

using namespace chi;

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("checkpoints round-trip bit-exactly") {
  RandomStream rng = substream(31, "init");
  MlpParams p = mlp_init({4, 6, 3}, rng);
  // Values with awkward bit patterns.
  p.layers[0].w(0, 0) = 0.1 + 0.2;
  p.layers[0].b[1] = -1e-300;
  p.layers[1].w(2, 5) = 1e300;

  const std::string path = temp_path("chi_ckpt_test.bin");
  save_checkpoint(path, mlp_to_tensors(p));
  const auto tensors = load_checkpoint(path);
  std::size_t cursor = 0;
  const MlpParams q = mlp_from_tensors(tensors, cursor, 2);
  REQUIRE(q.layers.size() == p.layers.size());
  for (std::size_t li = 0; li < p.layers.size(); ++li) {
    CHECK(q.layers[li].w.data == p.layers[li].w.data);
    CHECK(q.layers[li].b == p.layers[li].b);
  }
  std::remove(path.c_str());
}

TEST_CASE("malformed files are rejected") {
  const std::string path = temp_path("chi_ckpt_bad.bin");
  {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    std::fputs("NOPE", f);
    std::fclose(f);
  }
  CHECK_THROWS(load_checkpoint(path));
  std::remove(path.c_str());
}
