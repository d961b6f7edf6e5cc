#include "qdistill/distill.hpp"

#include <stdexcept>

#include "qdistill/losses.hpp"

namespace qdistill {

TeacherHandle TeacherHandle::load(const std::filesystem::path& checkpoint_path,
                                  Algorithm algorithm) {
  Checkpoint ckpt = load_checkpoint(checkpoint_path);
  if (ckpt.net.arch.kind != kind_for(algorithm)) {
    throw std::runtime_error("teacher checkpoint kind '" + kind_name(ckpt.net.arch.kind) +
                             "' does not match algorithm '" + algorithm_name(algorithm) +
                             "' (expects '" + kind_name(kind_for(algorithm)) + "')");
  }
  if (ckpt.net.arch.n_actions != 2 || ckpt.net.arch.n_inputs != 4) {
    throw std::runtime_error("teacher checkpoint has incompatible input/action sizes");
  }
  return TeacherHandle(std::move(ckpt.net), algorithm);
}

void DistillConfig::validate() const {
  if (!(temperature > 0.0)) {
    throw std::invalid_argument("temperature must be > 0");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha must be in [0,1]");
  }
}

Vec soft_targets(const TeacherHandle& teacher, const Vec& state, double temperature) {
  return softmax_with_temperature(forward(teacher.net(), state), temperature);
}

double distillation_loss(const Vec& student_logits, const Vec& teacher_logits,
                         double temperature) {
  const Vec p_teacher = softmax_with_temperature(teacher_logits, temperature);
  const Vec p_student = softmax_with_temperature(student_logits, temperature);
  return temperature * temperature * kl_divergence(p_teacher, p_student);
}

double mixed_loss(double rl_loss, double kd_loss, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha must be in [0,1]");
  }
  return alpha * rl_loss + (1.0 - alpha) * kd_loss;
}

Agent::EpisodeOutcome distill_train_episode(Agent& student, const TeacherHandle& teacher,
                                            CartPole& env, const DistillConfig& config) {
  config.validate();
  DistillationSpec spec{&teacher.net(), config.temperature, config.alpha};
  return student.train_episode(env, &spec);
}

}  // namespace qdistill
