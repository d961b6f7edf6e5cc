#pragma once

#include <cstddef>
#include <deque>
#include <vector>

#include "qdistill/cartpole.hpp"
#include "qdistill/rng.hpp"

namespace qdistill {

struct Transition {
  Observation state{};
  int action = 0;
  double reward = 0.0;
  Observation next_state{};
  bool terminal = false;  // true termination only; truncation bootstraps
};

using EpisodeSequence = std::vector<Transition>;

// Fixed-capacity ring with uniform sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

  void push(const Transition& t) {
    if (items_.size() < capacity_) {
      items_.push_back(t);
    } else {
      items_[next_] = t;
    }
    next_ = (next_ + 1) % capacity_;
  }

  std::size_t size() const { return items_.size(); }
  const Transition& sample(Rng& rng) const {
    return items_[rng.uniform_int(items_.size())];
  }
  const Transition& at(std::size_t i) const { return items_[i]; }

 private:
  std::size_t capacity_;
  std::vector<Transition> items_;
  std::size_t next_ = 0;
};

// Whole-episode storage for recurrent replay; capacity counts transitions.
class EpisodeReplay {
 public:
  explicit EpisodeReplay(std::size_t transition_capacity)
      : capacity_(transition_capacity) {}

  void push_episode(EpisodeSequence episode) {
    if (episode.empty()) {
      return;
    }
    total_ += episode.size();
    episodes_.push_back(std::move(episode));
    while (total_ > capacity_ && episodes_.size() > 1) {
      total_ -= episodes_.front().size();
      episodes_.pop_front();
    }
  }

  std::size_t transition_count() const { return total_; }
  std::size_t episode_count() const { return episodes_.size(); }

  struct Window {
    const EpisodeSequence* episode = nullptr;
    std::size_t start = 0;  // window runs [start, start+length) clipped to episode
  };

  // Episode chosen uniformly; start chosen so full windows are preferred and
  // shorter episodes yield padded windows from the front.
  Window sample_window(std::size_t length, Rng& rng) const {
    const EpisodeSequence& ep = episodes_[rng.uniform_int(episodes_.size())];
    std::size_t start = 0;
    if (ep.size() > length) {
      start = rng.uniform_int(ep.size() - length + 1);
    }
    return {&ep, start};
  }

 private:
  std::size_t capacity_;
  std::deque<EpisodeSequence> episodes_;
  std::size_t total_ = 0;
};

}  // namespace qdistill
