#pragma once

#include "envs/environment.hpp"

#include <cstddef>
#include <vector>

namespace pgvlab::dynamics {

inline constexpr std::size_t kDefaultBufferCapacity = 25000;

/// Fixed-capacity FIFO of transitions; the oldest entry is evicted first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = kDefaultBufferCapacity);

  void push(envs::Transition t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return data_.size(); }
  bool empty() const { return size_ == 0; }
  /// i = 0 is the oldest stored transition.
  const envs::Transition& at(std::size_t i) const;
  void clear();

 private:
  std::vector<envs::Transition> data_;
  std::size_t head_ = 0;  // next write position
  std::size_t size_ = 0;
};

}  // namespace pgvlab::dynamics
