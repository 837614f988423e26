#include "chi/replay.hpp"

#include <cmath>
#include <stdexcept>

namespace chi {

bool transition_finite(const Transition& t) {
  return all_finite(t.s) && all_finite(t.a) && std::isfinite(t.r) && all_finite(t.s_next);
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
  items_.reserve(std::min<std::size_t>(capacity_, 1 << 16));
}

bool ReplayBuffer::append(Transition t) {
  if (!transition_finite(t)) {
    rejected_ += 1;
    return false;
  }
  if (items_.size() < capacity_) {
    if (!t.synthetic) real_count_ += 1;
    items_.push_back(std::move(t));
    return true;
  }
  // Evict oldest.
  Transition& slot = items_[head_];
  if (!slot.synthetic) real_count_ -= 1;
  if (!t.synthetic) real_count_ += 1;
  slot = std::move(t);
  head_ = (head_ + 1) % capacity_;
  return true;
}

std::vector<Transition> ReplayBuffer::real_transitions() const {
  std::vector<Transition> out;
  out.reserve(real_count_);
  for (std::size_t i = 0; i < items_.size(); ++i) {
    const Transition& t = (*this)[i];
    if (!t.synthetic) out.push_back(t);
  }
  return out;
}

std::vector<Transition> ReplayBuffer::sample_batch(int n, double synthetic_cap,
                                                   RandomStream& rng) const {
  if (items_.empty()) throw std::logic_error("ReplayBuffer::sample_batch on empty buffer");
  std::vector<Transition> batch;
  batch.reserve(static_cast<std::size_t>(n));
  const int max_synthetic = static_cast<int>(std::floor(synthetic_cap * n));
  int synthetic_drawn = 0;
  const bool have_real = real_count_ > 0;
  for (int i = 0; i < n; ++i) {
    const Transition* pick = nullptr;
    for (int attempt = 0; attempt < 64; ++attempt) {
      const Transition& t = (*this)[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(items_.size())))];
      if (t.synthetic && synthetic_drawn >= max_synthetic && have_real) continue;
      pick = &t;
      break;
    }
    if (pick == nullptr) {
      // Cap unreachable by rejection; fall back to any real transition.
      for (std::size_t j = 0; j < items_.size(); ++j) {
        if (!(*this)[j].synthetic) {
          pick = &(*this)[j];
          break;
        }
      }
      if (pick == nullptr) pick = &(*this)[0];
    }
    if (pick->synthetic) synthetic_drawn += 1;
    batch.push_back(*pick);
  }
  return batch;
}

}  // namespace chi
