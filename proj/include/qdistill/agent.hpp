#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qdistill/cartpole.hpp"
#include "qdistill/losses.hpp"
#include "qdistill/net.hpp"
#include "qdistill/replay.hpp"

namespace qdistill {

enum class Algorithm { Dqn, Ddqn, Drqn, Dueling };

std::string algorithm_name(Algorithm algo);
Algorithm algorithm_from_name(const std::string& name);
NetKind kind_for(Algorithm algo);

struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.01;
  double decay = 0.985;  // multiplicative, per episode

  double at(int episode) const;
};

struct AgentConfig {
  Algorithm algorithm = Algorithm::Dqn;
  int hidden1 = 128;
  int hidden2 = 128;
  double gamma = 0.99;
  EpsilonSchedule epsilon;
  int batch_size = 64;
  int buffer_capacity = 50000;
  int target_sync_interval = 250;
  int sequence_length = 8;  // DRQN only
  double learning_rate = 7e-4;
  TdLossKind td_loss = TdLossKind::Huber;

  void validate() const;  // throws std::invalid_argument naming the bad field
  Architecture architecture() const;
};

// Epsilon-greedy with ties broken toward the lower action index.
int select_action(const Vec& q_values, double epsilon, Rng& rng);

double td_target_dqn(const Transition& t, const Network& target_net, double gamma);
double td_target_ddqn(const Transition& t, const Network& online_net,
                      const Network& target_net, double gamma);

struct DistillationSpec {
  const Network* teacher = nullptr;
  double temperature = 5.0;
  double alpha = 0.5;  // weight on the agent's own TD loss
};

// Zero-padded window batch for BPTT; [t][b] indexing, column b = sequence b.
struct SequenceBatch {
  std::vector<Mat> states;
  std::vector<Mat> next_states;
  std::vector<std::vector<int>> actions;
  std::vector<Vec> rewards;
  std::vector<std::vector<std::uint8_t>> terminals;
  std::vector<std::vector<std::uint8_t>> valid;

  int steps() const { return static_cast<int>(states.size()); }
  Eigen::Index batch() const { return states.empty() ? 0 : states[0].cols(); }
};

// Scalar batch-mean loss with optional soft-target mixture; fills parameter
// gradients when grads is non-null. These are the exact functions the
// training loops differentiate, which keeps finite-difference checks honest.
double feedforward_loss(const Network& online, const TdBatch& td, TdLossKind kind,
                        const KdBatch* kd, double alpha, Network* grads);

std::vector<Vec> sequence_td_targets(const Network& target_net,
                                     const SequenceBatch& batch, double gamma);

// Masked TD (+ optional distillation) loss over a window, zero initial hidden
// state; invalid steps contribute nothing.
double sequence_loss(const Network& online, const SequenceBatch& batch,
                     const std::vector<Vec>& targets, TdLossKind kind,
                     const Network* teacher, double temperature, double alpha,
                     Network* grads);

Vec obs_to_vec(const Observation& obs);

class Agent {
 public:
  Agent(AgentConfig config, std::uint64_t seed);

  struct EpisodeOutcome {
    double score = 0.0;
    double epsilon = 0.0;
    double mean_loss = 0.0;
  };

  // One episode of epsilon-greedy acting with a gradient step per environment
  // step once the buffer is warm. Throws TrainingDivergence on non-finite
  // loss. When distill is set, the per-step loss is the alpha-mixture of the
  // TD loss and the soft-target loss on the same replayed states.
  EpisodeOutcome train_episode(CartPole& env, const DistillationSpec* distill = nullptr);

  // One gradient step on a sampled window batch; exposed for tests.
  double drqn_train_step(const SequenceBatch& batch, const DistillationSpec* distill);

  double run_greedy_episode(CartPole& env, std::uint64_t episode_seed);

  const AgentConfig& config() const { return config_; }
  const Network& online() const { return online_; }
  const Network& target() const { return target_; }
  Network& online_mutable() { return online_; }
  int episodes_trained() const { return episode_; }
  std::uint64_t seed() const { return seed_; }
  std::int64_t global_step() const { return global_step_; }

 private:
  double feedforward_train_step(const DistillationSpec* distill);
  SequenceBatch sample_sequence_batch();
  void sync_target_if_due();

  AgentConfig config_;
  std::uint64_t seed_;
  Rng rng_;
  Network online_;
  Network target_;
  AdamState opt_;
  ReplayBuffer buffer_;
  EpisodeReplay episode_buffer_;
  std::int64_t global_step_ = 0;
  int episode_ = 0;
};

struct TrainingDivergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qdistill
