#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace hwadv::rl {

struct Transition {
  Eigen::VectorXd s;
  int a = 0;
  double r = 0.0;
  Eigen::VectorXd s_next;
  bool terminal = false;
};

/// FIFO ring with seeded uniform sampling (with replacement).
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

  void push(Transition t) {
    if (storage_.size() < capacity_) {
      storage_.push_back(std::move(t));
    } else {
      storage_[write_pos_] = std::move(t);
    }
    write_pos_ = (write_pos_ + 1) % capacity_;
  }

  std::size_t size() const { return storage_.size(); }
  bool empty() const { return storage_.empty(); }
  std::size_t capacity() const { return capacity_; }

  const Transition& sample(std::mt19937_64& rng) const {
    std::uniform_int_distribution<std::size_t> pick(0, storage_.size() - 1);
    return storage_[pick(rng)];
  }

 private:
  std::size_t capacity_;
  std::size_t write_pos_ = 0;
  std::vector<Transition> storage_;
};

/// Normal experience and at-fault crash episodes live in separate buffers;
/// batches mix a fixed fraction of crash transitions when any exist.
struct DualReplay {
  ReplayBuffer normal;
  ReplayBuffer at_fault_crash;
  double mix_fraction;

  DualReplay(std::size_t normal_capacity, std::size_t crash_capacity, double mix)
      : normal(normal_capacity), at_fault_crash(crash_capacity), mix_fraction(mix) {}

  /// Episode-level routing: the whole episode lands in exactly one buffer.
  void route_episode(std::vector<Transition> episode, bool at_fault) {
    ReplayBuffer& target = at_fault ? at_fault_crash : normal;
    for (auto& t : episode) target.push(std::move(t));
  }
};

} // namespace hwadv::rl
