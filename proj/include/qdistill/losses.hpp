#pragma once

#include <vector>

#include "qdistill/net.hpp"

namespace qdistill {

// q_i = exp(z_i/T) / sum_j exp(z_j/T), computed with max-subtraction.
// Throws std::invalid_argument for T <= 0 or non-finite logits.
Vec softmax_with_temperature(const Vec& logits, double temperature);
Mat softmax_with_temperature(const Mat& logits, double temperature);  // per column

// sum_i p_i ln(p_i/q_i), with 0 ln(0/q) = 0. Both arguments must sum to 1
// within 1e-9 and q must be strictly positive.
double kl_divergence(const Vec& p, const Vec& q);

enum class TdLossKind { Huber, Squared };

// Per-sample TD regression on the taken action's Q-value.
struct TdBatch {
  Mat states;                // n_inputs x B
  std::vector<int> actions;  // B
  Vec targets;               // B
};

// Soft targets from a frozen teacher, matched column-for-column with the
// student batch.
struct KdBatch {
  Mat teacher_logits;  // n_actions x B
  double temperature = 5.0;
};

// loss = alpha * mean(td_i) + (1-alpha) * mean(kd_i); either side may be
// disabled by its weight. Fills dlogits (same shape as logits) with the
// gradient of the scalar loss.
struct LossTerms {
  double total = 0.0;
  double td = 0.0;
  double kd = 0.0;
};

double td_loss_and_grad(const Mat& logits, const TdBatch& batch, TdLossKind kind,
                        Mat& dlogits);

// T^2-scaled KL from softened teacher to softened student, averaged over the
// batch. The T^2 factor keeps gradient magnitudes comparable across
// temperatures.
double kd_loss_and_grad(const Mat& student_logits, const KdBatch& batch,
                        Mat& dlogits);

double huber(double residual, double delta = 1.0);

}  // namespace qdistill
