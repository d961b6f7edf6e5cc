#pragma once

#include "qdistill/agent.hpp"
#include "qdistill/rng.hpp"

namespace qdistill::testing {

inline Mat random_mat(int rows, int cols, Rng& rng, double bound = 1.0) {
  Mat m(rows, cols);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) {
      m(r, c) = rng.uniform(-bound, bound);
    }
  }
  return m;
}

inline TdBatch random_td_batch(int n_inputs, int batch, Rng& rng) {
  TdBatch td;
  td.states = random_mat(n_inputs, batch, rng);
  td.actions.resize(batch);
  td.targets = Vec(batch);
  for (int b = 0; b < batch; ++b) {
    td.actions[b] = static_cast<int>(rng.uniform_int(2));
    td.targets(b) = rng.uniform(-2.0, 2.0);
  }
  return td;
}

inline KdBatch random_kd_batch(int n_actions, int batch, double temperature, Rng& rng) {
  return {random_mat(n_actions, batch, rng, 2.0), temperature};
}

// Window batch where the last sequence is shorter than the window and padded.
inline SequenceBatch random_sequence_batch(int n_inputs, int steps, int batch, Rng& rng) {
  SequenceBatch sb;
  sb.states.assign(steps, Mat::Zero(n_inputs, batch));
  sb.next_states.assign(steps, Mat::Zero(n_inputs, batch));
  sb.actions.assign(steps, std::vector<int>(batch, 0));
  sb.rewards.assign(steps, Vec::Zero(batch));
  sb.terminals.assign(steps, std::vector<std::uint8_t>(batch, 0));
  sb.valid.assign(steps, std::vector<std::uint8_t>(batch, 0));
  for (int b = 0; b < batch; ++b) {
    const int len = b == batch - 1 ? std::max(1, steps / 2) : steps;
    for (int t = 0; t < len; ++t) {
      sb.states[t].col(b) = random_mat(n_inputs, 1, rng);
      sb.next_states[t].col(b) = random_mat(n_inputs, 1, rng);
      sb.actions[t][b] = static_cast<int>(rng.uniform_int(2));
      sb.rewards[t](b) = 1.0;
      sb.terminals[t][b] = (t == len - 1 && rng.uniform() < 0.5) ? 1 : 0;
      sb.valid[t][b] = 1;
    }
  }
  return sb;
}

}  // namespace qdistill::testing
