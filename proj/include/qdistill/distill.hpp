#pragma once

#include <filesystem>
#include <string>

#include "qdistill/agent.hpp"
#include "qdistill/checkpoint.hpp"

namespace qdistill {

// Frozen teacher parameters loaded from a checkpoint.
class TeacherHandle {
 public:
  // Throws std::runtime_error if the checkpoint's architecture kind does not
  // match the algorithm being distilled.
  static TeacherHandle load(const std::filesystem::path& checkpoint_path,
                            Algorithm algorithm);

  const Network& net() const { return net_; }
  Algorithm algorithm() const { return algorithm_; }

 private:
  TeacherHandle(Network net, Algorithm algorithm)
      : net_(std::move(net)), algorithm_(algorithm) {}

  Network net_;
  Algorithm algorithm_;
};

struct DistillConfig {
  double temperature = 5.0;
  double alpha = 0.5;  // weight on the student's own TD loss
  std::string teacher_checkpoint;

  void validate() const;
};

// Teacher's softened action distribution at one state.
Vec soft_targets(const TeacherHandle& teacher, const Vec& state, double temperature);

// T^2-scaled KL from the softened teacher to the softened student.
double distillation_loss(const Vec& student_logits, const Vec& teacher_logits,
                         double temperature);

double mixed_loss(double rl_loss, double kd_loss, double alpha);

// Same loop as Agent::train_episode with the mixture loss; the student acts
// with its own policy, the teacher only supplies targets.
Agent::EpisodeOutcome distill_train_episode(Agent& student, const TeacherHandle& teacher,
                                            CartPole& env, const DistillConfig& config);

}  // namespace qdistill
