#include "dynamics/replay_buffer.hpp"

#include "common/error.hpp"

namespace pgvlab::dynamics {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : data_(capacity) {
  require(capacity > 0, "ReplayBuffer: capacity must be positive");
}

void ReplayBuffer::push(envs::Transition t) {
  data_[head_] = std::move(t);
  head_ = (head_ + 1) % data_.size();
  if (size_ < data_.size()) ++size_;
}

const envs::Transition& ReplayBuffer::at(std::size_t i) const {
  require(i < size_, "ReplayBuffer::at: index out of range");
  const std::size_t oldest = (head_ + data_.size() - size_) % data_.size();
  return data_[(oldest + i) % data_.size()];
}

void ReplayBuffer::clear() {
  head_ = 0;
  size_ = 0;
}

}  // namespace pgvlab::dynamics
