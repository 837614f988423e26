#pragma once

#include <cstddef>
#include <vector>

#include "chi/rng.hpp"
#include "chi/tensor.hpp"

namespace chi {

struct Transition {
  Vec s;
  Vec a;
  double r = 0.0;
  Vec s_next;
  bool done = false;
  bool synthetic = false;  // true for model-generated counterfactual data
};

bool transition_finite(const Transition& t);

// Fixed-capacity ring with FIFO eviction. Non-finite transitions are refused
// so the buffer never holds them.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  bool append(Transition t);

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t real_count() const { return real_count_; }
  std::size_t synthetic_count() const { return items_.size() - real_count_; }
  std::size_t rejected_count() const { return rejected_; }

  const Transition& operator[](std::size_t i) const { return items_[(head_ + i) % items_.size()]; }

  std::vector<Transition> real_transitions() const;

  // Uniform batch over the whole buffer, with the synthetic share capped at
  // synthetic_cap (excess synthetic draws are redrawn as real ones).
  std::vector<Transition> sample_batch(int n, double synthetic_cap, RandomStream& rng) const;

 private:
  std::size_t capacity_;
  std::vector<Transition> items_;
  std::size_t head_ = 0;  // index of the oldest element once full
  std::size_t real_count_ = 0;
  std::size_t rejected_ = 0;
};

}  // namespace chi
