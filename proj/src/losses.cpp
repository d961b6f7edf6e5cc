#include "qdistill/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace qdistill {

Vec softmax_with_temperature(const Vec& logits, double temperature) {
  if (!(temperature > 0.0)) {
    throw std::invalid_argument("softmax temperature must be > 0");
  }
  if (!logits.allFinite()) {
    throw std::invalid_argument("softmax input must be finite");
  }
  Vec scaled = logits / temperature;
  const double max = scaled.maxCoeff();
  Vec exps = (scaled.array() - max).exp();
  return exps / exps.sum();
}

Mat softmax_with_temperature(const Mat& logits, double temperature) {
  if (!(temperature > 0.0)) {
    throw std::invalid_argument("softmax temperature must be > 0");
  }
  if (!logits.allFinite()) {
    throw std::invalid_argument("softmax input must be finite");
  }
  Mat scaled = logits / temperature;
  Mat shifted = scaled.rowwise() - scaled.colwise().maxCoeff();
  Mat exps = shifted.array().exp();
  return Mat(exps.array().rowwise() / exps.colwise().sum().array());
}

double kl_divergence(const Vec& p, const Vec& q) {
  if (p.size() != q.size()) {
    throw std::invalid_argument("kl_divergence: size mismatch");
  }
  if (std::abs(p.sum() - 1.0) > 1e-9 || std::abs(q.sum() - 1.0) > 1e-9) {
    throw std::invalid_argument("kl_divergence: inputs must sum to 1");
  }
  if ((q.array() <= 0.0).any()) {
    throw std::invalid_argument("kl_divergence: q must be strictly positive");
  }
  double kl = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) > 0.0) {
      kl += p(i) * std::log(p(i) / q(i));
    }
  }
  return kl;
}

double huber(double residual, double delta) {
  const double a = std::abs(residual);
  if (a <= delta) {
    return 0.5 * residual * residual;
  }
  return delta * (a - 0.5 * delta);
}

double td_loss_and_grad(const Mat& logits, const TdBatch& batch, TdLossKind kind,
                        Mat& dlogits) {
  const Eigen::Index n = logits.cols();
  if (static_cast<Eigen::Index>(batch.actions.size()) != n || batch.targets.size() != n) {
    throw std::invalid_argument("td batch size mismatch");
  }
  dlogits.setZero(logits.rows(), n);
  double loss = 0.0;
  for (Eigen::Index b = 0; b < n; ++b) {
    const int a = batch.actions[b];
    const double residual = logits(a, b) - batch.targets(b);
    if (kind == TdLossKind::Huber) {
      loss += huber(residual);
      dlogits(a, b) = std::clamp(residual, -1.0, 1.0) / static_cast<double>(n);
    } else {
      loss += residual * residual;
      dlogits(a, b) = 2.0 * residual / static_cast<double>(n);
    }
  }
  return loss / static_cast<double>(n);
}

double kd_loss_and_grad(const Mat& student_logits, const KdBatch& batch,
                        Mat& dlogits) {
  const double t = batch.temperature;
  const Eigen::Index n = student_logits.cols();
  if (batch.teacher_logits.cols() != n ||
      batch.teacher_logits.rows() != student_logits.rows()) {
    throw std::invalid_argument("kd batch shape mismatch");
  }
  Mat p_teacher = softmax_with_temperature(batch.teacher_logits, t);
  Mat p_student = softmax_with_temperature(student_logits, t);
  double loss = 0.0;
  for (Eigen::Index b = 0; b < n; ++b) {
    loss += t * t * kl_divergence(p_teacher.col(b), p_student.col(b));
  }
  // d/dz of T^2 KL(p_t || p_s) = T (p_s - p_t)
  dlogits = t * (p_student - p_teacher) / static_cast<double>(n);
  return loss / static_cast<double>(n);
}

}  // namespace qdistill
