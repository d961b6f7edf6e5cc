#include "qdistill/agent.hpp"

#include <cmath>
#include <stdexcept>

namespace qdistill {

std::string algorithm_name(Algorithm algo) {
  switch (algo) {
    case Algorithm::Dqn: return "dqn";
    case Algorithm::Ddqn: return "ddqn";
    case Algorithm::Drqn: return "drqn";
    case Algorithm::Dueling: return "dueling";
  }
  throw std::logic_error("unknown algorithm");
}

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "dqn") return Algorithm::Dqn;
  if (name == "ddqn") return Algorithm::Ddqn;
  if (name == "drqn") return Algorithm::Drqn;
  if (name == "dueling") return Algorithm::Dueling;
  throw std::invalid_argument("unknown algorithm: " + name);
}

NetKind kind_for(Algorithm algo) {
  switch (algo) {
    case Algorithm::Dqn:
    case Algorithm::Ddqn:
      return NetKind::Mlp;
    case Algorithm::Drqn:
      return NetKind::Recurrent;
    case Algorithm::Dueling:
      return NetKind::Dueling;
  }
  throw std::logic_error("unknown algorithm");
}

double EpsilonSchedule::at(int episode) const {
  return std::max(end, start * std::pow(decay, static_cast<double>(episode)));
}

void AgentConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must be in (0,1)");
  if (hidden1 <= 0) throw std::invalid_argument("hidden1 must be positive");
  if (hidden2 <= 0) throw std::invalid_argument("hidden2 must be positive");
  if (epsilon.end > epsilon.start) {
    throw std::invalid_argument("epsilon_end must not exceed epsilon_start");
  }
  if (!(epsilon.decay > 0.0 && epsilon.decay <= 1.0)) {
    throw std::invalid_argument("epsilon_decay must be in (0,1]");
  }
  if (batch_size <= 0) throw std::invalid_argument("batch_size must be positive");
  if (buffer_capacity <= 0) throw std::invalid_argument("buffer_capacity must be positive");
  if (target_sync_interval <= 0) {
    throw std::invalid_argument("target_sync_interval must be positive");
  }
  if (sequence_length <= 0) throw std::invalid_argument("sequence_length must be positive");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
}

Architecture AgentConfig::architecture() const {
  return {kind_for(algorithm), 4, hidden1, hidden2, 2};
}

int select_action(const Vec& q_values, double epsilon, Rng& rng) {
  if (rng.uniform() < epsilon) {
    return static_cast<int>(rng.uniform_int(q_values.size()));
  }
  int best = 0;
  for (Eigen::Index i = 1; i < q_values.size(); ++i) {
    if (q_values(i) > q_values(best)) {
      best = static_cast<int>(i);
    }
  }
  return best;
}

double td_target_dqn(const Transition& t, const Network& target_net, double gamma) {
  if (t.terminal) {
    return t.reward;
  }
  const Vec q = forward(target_net, obs_to_vec(t.next_state));
  return t.reward + gamma * q.maxCoeff();
}

double td_target_ddqn(const Transition& t, const Network& online_net,
                      const Network& target_net, double gamma) {
  if (t.terminal) {
    return t.reward;
  }
  const Vec next = obs_to_vec(t.next_state);
  const Vec q_online = forward(online_net, next);
  Eigen::Index selected = 0;
  q_online.maxCoeff(&selected);
  const Vec q_target = forward(target_net, next);
  return t.reward + gamma * q_target(selected);
}

Vec obs_to_vec(const Observation& obs) {
  Vec v(4);
  v << obs[0], obs[1], obs[2], obs[3];
  return v;
}

double feedforward_loss(const Network& online, const TdBatch& td, TdLossKind kind,
                        const KdBatch* kd, double alpha, Network* grads) {
  FfCache cache;
  const Mat logits = forward_batch(online, td.states, grads != nullptr ? &cache : nullptr);
  Mat dlogits;
  double loss = alpha * td_loss_and_grad(logits, td, kind, dlogits);
  Mat total_dlogits = alpha * dlogits;
  if (kd != nullptr) {
    Mat kd_dlogits;
    loss += (1.0 - alpha) * kd_loss_and_grad(logits, *kd, kd_dlogits);
    total_dlogits += (1.0 - alpha) * kd_dlogits;
  }
  if (grads != nullptr) {
    *grads = backward_batch(online, cache, total_dlogits);
  }
  return loss;
}

std::vector<Vec> sequence_td_targets(const Network& target_net,
                                     const SequenceBatch& batch, double gamma) {
  const std::vector<Mat> q_next = forward_seq(target_net, batch.next_states);
  std::vector<Vec> targets(batch.steps());
  for (int t = 0; t < batch.steps(); ++t) {
    targets[t] = Vec::Zero(batch.batch());
    for (Eigen::Index b = 0; b < batch.batch(); ++b) {
      if (!batch.valid[t][b]) {
        continue;
      }
      double y = batch.rewards[t](b);
      if (!batch.terminals[t][b]) {
        y += gamma * q_next[t].col(b).maxCoeff();
      }
      targets[t](b) = y;
    }
  }
  return targets;
}

double sequence_loss(const Network& online, const SequenceBatch& batch,
                     const std::vector<Vec>& targets, TdLossKind kind,
                     const Network* teacher, double temperature, double alpha,
                     Network* grads) {
  RecCache cache;
  const std::vector<Mat> logits =
      forward_seq(online, batch.states, grads != nullptr ? &cache : nullptr);
  std::vector<Mat> teacher_logits;
  if (teacher != nullptr) {
    teacher_logits = forward_seq(*teacher, batch.states);
  }

  double n_valid = 0.0;
  for (int t = 0; t < batch.steps(); ++t) {
    for (Eigen::Index b = 0; b < batch.batch(); ++b) {
      n_valid += batch.valid[t][b] ? 1.0 : 0.0;
    }
  }
  if (n_valid == 0.0) {
    if (grads != nullptr) {
      *grads = zeros_like(online);
    }
    return 0.0;
  }

  double td_sum = 0.0;
  double kd_sum = 0.0;
  std::vector<Mat> dlogits(batch.steps());
  for (int t = 0; t < batch.steps(); ++t) {
    dlogits[t] = Mat::Zero(logits[t].rows(), logits[t].cols());
    for (Eigen::Index b = 0; b < batch.batch(); ++b) {
      if (!batch.valid[t][b]) {
        continue;
      }
      const int a = batch.actions[t][b];
      const double residual = logits[t](a, b) - targets[t](b);
      if (kind == TdLossKind::Huber) {
        td_sum += huber(residual);
        dlogits[t](a, b) = alpha * std::clamp(residual, -1.0, 1.0) / n_valid;
      } else {
        td_sum += residual * residual;
        dlogits[t](a, b) = alpha * 2.0 * residual / n_valid;
      }
      if (teacher != nullptr) {
        const Vec p_teacher =
            softmax_with_temperature(Vec(teacher_logits[t].col(b)), temperature);
        const Vec p_student = softmax_with_temperature(Vec(logits[t].col(b)), temperature);
        kd_sum += temperature * temperature * kl_divergence(p_teacher, p_student);
        dlogits[t].col(b) +=
            (1.0 - alpha) * temperature * (p_student - p_teacher) / n_valid;
      }
    }
  }
  const double loss =
      alpha * td_sum / n_valid + (teacher != nullptr ? (1.0 - alpha) * kd_sum / n_valid : 0.0);
  if (grads != nullptr) {
    *grads = backward_seq(online, cache, dlogits);
  }
  return loss;
}

Agent::Agent(AgentConfig config, std::uint64_t seed)
    : config_(config),
      seed_(seed),
      rng_(seed),
      online_(make_network(config.architecture(), seed)),
      target_(online_),
      opt_(make_adam_state(online_)),
      buffer_(static_cast<std::size_t>(config.buffer_capacity)),
      episode_buffer_(static_cast<std::size_t>(config.buffer_capacity)) {
  config_.validate();
}

double Agent::feedforward_train_step(const DistillationSpec* distill) {
  const int n = config_.batch_size;
  TdBatch td;
  td.states = Mat(4, n);
  td.actions.resize(n);
  td.targets = Vec(n);
  Mat next_states(4, n);
  std::vector<const Transition*> picks(n);
  for (int b = 0; b < n; ++b) {
    picks[b] = &buffer_.sample(rng_);
    td.states.col(b) = obs_to_vec(picks[b]->state);
    td.actions[b] = picks[b]->action;
    next_states.col(b) = obs_to_vec(picks[b]->next_state);
  }

  const Mat q_target = forward_batch(target_, next_states);
  Mat q_online_next;
  if (config_.algorithm == Algorithm::Ddqn) {
    q_online_next = forward_batch(online_, next_states);
  }
  for (int b = 0; b < n; ++b) {
    double y = picks[b]->reward;
    if (!picks[b]->terminal) {
      if (config_.algorithm == Algorithm::Ddqn) {
        Eigen::Index selected = 0;
        q_online_next.col(b).maxCoeff(&selected);
        y += config_.gamma * q_target(selected, b);
      } else {
        y += config_.gamma * q_target.col(b).maxCoeff();
      }
    }
    td.targets(b) = y;
  }

  KdBatch kd;
  const KdBatch* kd_ptr = nullptr;
  double alpha = 1.0;
  if (distill != nullptr) {
    kd.teacher_logits = forward_batch(*distill->teacher, td.states);
    kd.temperature = distill->temperature;
    kd_ptr = &kd;
    alpha = distill->alpha;
  }

  Network grads = zeros_like(online_);
  const double loss = feedforward_loss(online_, td, config_.td_loss, kd_ptr, alpha, &grads);
  if (!std::isfinite(loss)) {
    throw TrainingDivergence("non-finite loss in feedforward train step");
  }
  adam_step(online_, grads, opt_, config_.learning_rate);
  return loss;
}

SequenceBatch Agent::sample_sequence_batch() {
  const int length = config_.sequence_length;
  const int n_seq = std::max(1, config_.batch_size / length);
  SequenceBatch batch;
  batch.states.assign(length, Mat::Zero(4, n_seq));
  batch.next_states.assign(length, Mat::Zero(4, n_seq));
  batch.actions.assign(length, std::vector<int>(n_seq, 0));
  batch.rewards.assign(length, Vec::Zero(n_seq));
  batch.terminals.assign(length, std::vector<std::uint8_t>(n_seq, 0));
  batch.valid.assign(length, std::vector<std::uint8_t>(n_seq, 0));
  for (int b = 0; b < n_seq; ++b) {
    const auto window = episode_buffer_.sample_window(length, rng_);
    for (int t = 0; t < length; ++t) {
      const std::size_t idx = window.start + static_cast<std::size_t>(t);
      if (idx >= window.episode->size()) {
        break;
      }
      const Transition& tr = (*window.episode)[idx];
      batch.states[t].col(b) = obs_to_vec(tr.state);
      batch.next_states[t].col(b) = obs_to_vec(tr.next_state);
      batch.actions[t][b] = tr.action;
      batch.rewards[t](b) = tr.reward;
      batch.terminals[t][b] = tr.terminal ? 1 : 0;
      batch.valid[t][b] = 1;
    }
  }
  return batch;
}

double Agent::drqn_train_step(const SequenceBatch& batch, const DistillationSpec* distill) {
  const std::vector<Vec> targets = sequence_td_targets(target_, batch, config_.gamma);
  Network grads = zeros_like(online_);
  const double loss = sequence_loss(
      online_, batch, targets, config_.td_loss,
      distill != nullptr ? distill->teacher : nullptr,
      distill != nullptr ? distill->temperature : 1.0,
      distill != nullptr ? distill->alpha : 1.0, &grads);
  if (!std::isfinite(loss)) {
    throw TrainingDivergence("non-finite loss in recurrent train step");
  }
  adam_step(online_, grads, opt_, config_.learning_rate);
  return loss;
}

void Agent::sync_target_if_due() {
  if (global_step_ % config_.target_sync_interval == 0) {
    target_ = online_;
  }
}

Agent::EpisodeOutcome Agent::train_episode(CartPole& env, const DistillationSpec* distill) {
  const bool recurrent = config_.algorithm == Algorithm::Drqn;
  const double epsilon = config_.epsilon.at(episode_);
  Observation obs = env.reset(rng_.next_u64());
  LstmState lstm = recurrent ? zero_state(online_) : LstmState{};

  EpisodeSequence current_episode;
  double score = 0.0;
  double loss_sum = 0.0;
  int loss_steps = 0;
  while (!env.done()) {
    const Vec obs_vec = obs_to_vec(obs);
    const Vec q = recurrent ? forward_step(online_, obs_vec, lstm) : forward(online_, obs_vec);
    const int action = select_action(q, epsilon, rng_);
    const StepResult result = env.step(action);
    score += result.reward;

    Transition tr{obs, action, result.reward, result.observation, result.terminated};
    if (recurrent) {
      current_episode.push_back(tr);
    } else {
      buffer_.push(tr);
    }
    obs = result.observation;
    global_step_ += 1;

    const std::size_t stored =
        recurrent ? episode_buffer_.transition_count() : buffer_.size();
    if (stored >= static_cast<std::size_t>(config_.batch_size)) {
      const double loss = recurrent
                              ? drqn_train_step(sample_sequence_batch(), distill)
                              : feedforward_train_step(distill);
      loss_sum += loss;
      loss_steps += 1;
    }
    sync_target_if_due();
  }
  if (recurrent) {
    episode_buffer_.push_episode(std::move(current_episode));
  }
  episode_ += 1;
  return {score, epsilon, loss_steps > 0 ? loss_sum / loss_steps : 0.0};
}

double Agent::run_greedy_episode(CartPole& env, std::uint64_t episode_seed) {
  Observation obs = env.reset(episode_seed);
  LstmState lstm = zero_state(online_);
  Rng rng(episode_seed);
  double score = 0.0;
  while (!env.done()) {
    const Vec q = config_.algorithm == Algorithm::Drqn
                      ? forward_step(online_, obs_to_vec(obs), lstm)
                      : forward(online_, obs_to_vec(obs));
    const StepResult result = env.step(select_action(q, 0.0, rng));
    score += result.reward;
    obs = result.observation;
  }
  return score;
}

}  // namespace qdistill
