#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chi/tensor.hpp"

namespace chi {

// Flat tensor record used for all parameter checkpoints. The byte layout is
// documented in docs/formats.md and round-trips bit-exactly.
struct Tensor {
  std::vector<std::uint32_t> dims;
  Vec data;

  std::size_t count() const;
};

void save_checkpoint(const std::string& path, const std::vector<Tensor>& tensors);
std::vector<Tensor> load_checkpoint(const std::string& path);

// An MLP serialises as (W_0, b_0, W_1, b_1, ...).
std::vector<Tensor> mlp_to_tensors(const MlpParams& p);
MlpParams mlp_from_tensors(const std::vector<Tensor>& tensors, std::size_t& cursor, int n_layers);

}  // namespace chi
