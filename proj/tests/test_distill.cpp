#include <doctest.h>

#include <filesystem>

#include "fixtures.hpp"
#include "qdistill/cartpole.hpp"
#include "qdistill/distill.hpp"

using namespace qdistill;
using namespace qdistill::testing;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "qdistill_distill_tests";
  fs::create_directories(dir);
  return dir;
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// A teacher whose logits are constant in the state.
fs::path write_constant_teacher(NetKind kind, double logit0, double logit1,
                                const std::string& name) {
  Network net = zeros_like(make_network({kind, 4, 8, 8, 2}, 0));
  const int out_layer = kind == NetKind::Mlp ? 2 : static_cast<int>(net.layers.size()) - 1;
  net.layers[out_layer].bias = vec2(logit0, logit1);
  const fs::path path = temp_dir() / name;
  save_checkpoint(path, net, 0, 0);
  return path;
}

}  // namespace

TEST_CASE("teacher checkpoints with the wrong architecture kind are rejected") {
  const fs::path mlp_ckpt = write_constant_teacher(NetKind::Mlp, 0, 0, "mlp_teacher.json");
  CHECK_THROWS_AS(TeacherHandle::load(mlp_ckpt, Algorithm::Dueling), std::runtime_error);
  CHECK_THROWS_AS(TeacherHandle::load(mlp_ckpt, Algorithm::Drqn), std::runtime_error);
  CHECK_NOTHROW(TeacherHandle::load(mlp_ckpt, Algorithm::Dqn));
  CHECK_NOTHROW(TeacherHandle::load(mlp_ckpt, Algorithm::Ddqn));
}

TEST_CASE("soft_targets applies Eq-style softening to the teacher's logits") {
  const fs::path ckpt = write_constant_teacher(NetKind::Mlp, 2.0, 0.0, "soft.json");
  const TeacherHandle teacher = TeacherHandle::load(ckpt, Algorithm::Dqn);
  const Vec state = Vec::Zero(4);

  const Vec q5 = soft_targets(teacher, state, 5.0);
  CHECK(std::abs(q5(0) - 0.598687660112452) < 1e-6);
  CHECK(std::abs(q5(1) - 0.401312339887548) < 1e-6);

  // purity: same state, same output
  const Vec again = soft_targets(teacher, state, 5.0);
  CHECK((q5 - again).cwiseAbs().maxCoeff() == 0.0);

  // T=1 equals plain softmax of the teacher logits
  const Vec q1 = soft_targets(teacher, state, 1.0);
  CHECK(std::abs(q1(0) - 0.8807970779778824) < 1e-9);
}

TEST_CASE("distillation_loss closed-form cases") {
  CHECK(distillation_loss(vec2(2, 0), vec2(2, 0), 5.0) == doctest::Approx(0.0));
  // KL([0.880797, 0.119203] || [0.5, 0.5]) computed independently.
  CHECK(distillation_loss(vec2(0, 0), vec2(2, 0), 1.0) ==
        doctest::Approx(0.3278133254727377).epsilon(1e-9));
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const Vec s = vec2(rng.uniform(-5, 5), rng.uniform(-5, 5));
    const Vec t = vec2(rng.uniform(-5, 5), rng.uniform(-5, 5));
    const double temp = rng.uniform(0.5, 10.0);
    CHECK(distillation_loss(s, t, temp) >= 0.0);
    // invariance to shifting either side's logits by a constant
    const double c = rng.uniform(-20, 20);
    CHECK(distillation_loss((s.array() + c).matrix(), t, temp) ==
          doctest::Approx(distillation_loss(s, t, temp)).epsilon(1e-9));
    CHECK(distillation_loss(s, (t.array() + c).matrix(), temp) ==
          doctest::Approx(distillation_loss(s, t, temp)).epsilon(1e-9));
  }
}

TEST_CASE("mixed_loss arithmetic and degenerate ends") {
  CHECK(mixed_loss(2.0, 4.0, 1.0) == 2.0);
  CHECK(mixed_loss(2.0, 4.0, 0.0) == 4.0);
  CHECK(mixed_loss(2.0, 4.0, 0.5) == 3.0);
  CHECK_THROWS_AS(mixed_loss(1.0, 1.0, 1.5), std::invalid_argument);
}

TEST_CASE("kd gradient vanishes exactly when softened distributions agree") {
  Mat dlogits;
  KdBatch kd{vec2(3.0, 1.0), 5.0};
  // Student logits shifted by a constant soften to the same distribution.
  CHECK(kd_loss_and_grad(vec2(4.0, 2.0), kd, dlogits) < 1e-12);
  CHECK(dlogits.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(kd_loss_and_grad(vec2(1.0, 2.0), kd, dlogits) > 0.0);
  CHECK(dlogits.cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("alpha=1 distillation reproduces plain training exactly") {
  const fs::path ckpt = write_constant_teacher(NetKind::Mlp, 1.0, -1.0, "alpha1.json");
  const TeacherHandle teacher = TeacherHandle::load(ckpt, Algorithm::Dqn);
  DistillConfig config;
  config.alpha = 1.0;
  config.teacher_checkpoint = ckpt.string();

  AgentConfig agent_config;
  agent_config.hidden1 = 16;
  agent_config.hidden2 = 16;
  agent_config.batch_size = 8;

  Agent plain(agent_config, 42), distilled(agent_config, 42);
  CartPole env_a, env_b;
  for (int i = 0; i < 8; ++i) {
    const auto oa = plain.train_episode(env_a);
    const auto ob = distill_train_episode(distilled, teacher, env_b, config);
    CHECK(oa.score == ob.score);
    CHECK(oa.mean_loss == ob.mean_loss);
  }
  CHECK((flatten(plain.online()) - flatten(distilled.online())).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("teacher parameters are bitwise unchanged across a distillation run") {
  const fs::path ckpt = write_constant_teacher(NetKind::Mlp, 0.5, -0.5, "frozen.json");
  const TeacherHandle teacher = TeacherHandle::load(ckpt, Algorithm::Dqn);
  const Vec before = flatten(teacher.net());

  DistillConfig config;
  config.teacher_checkpoint = ckpt.string();
  AgentConfig agent_config;
  agent_config.hidden1 = 16;
  agent_config.hidden2 = 16;
  agent_config.batch_size = 8;
  Agent student(agent_config, 11);
  CartPole env;
  for (int i = 0; i < 10; ++i) {
    distill_train_episode(student, teacher, env, config);
  }
  CHECK((flatten(teacher.net()) - before).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("perfect student with alpha=0 stays stationary up to moment decay") {
  // Student whose logits already equal the (constant) teacher's: the KD
  // gradient is exactly zero, so Adam leaves the parameters untouched.
  const fs::path ckpt = write_constant_teacher(NetKind::Mlp, 0.7, -0.2, "perfect.json");
  const TeacherHandle teacher = TeacherHandle::load(ckpt, Algorithm::Dqn);

  Network student = zeros_like(make_network({NetKind::Mlp, 4, 8, 8, 2}, 0));
  student.layers[2].bias = vec2(0.7, -0.2);
  Rng rng(6);
  const TdBatch td = random_td_batch(4, 5, rng);
  KdBatch kd{forward_batch(teacher.net(), td.states), 5.0};
  Network grads = zeros_like(student);
  const double loss = feedforward_loss(student, td, TdLossKind::Huber, &kd, 0.0, &grads);
  CHECK(loss < 1e-12);
  CHECK(flatten(grads).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("distill config validation") {
  DistillConfig config;
  config.temperature = 0.0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = DistillConfig{};
  config.alpha = -0.1;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}

TEST_CASE("drqn distillation runs against a recurrent teacher") {
  const fs::path ckpt =
      write_constant_teacher(NetKind::Recurrent, 0.4, -0.4, "rec_teacher.json");
  const TeacherHandle teacher = TeacherHandle::load(ckpt, Algorithm::Drqn);
  DistillConfig config;
  config.teacher_checkpoint = ckpt.string();

  AgentConfig agent_config;
  agent_config.algorithm = Algorithm::Drqn;
  agent_config.hidden1 = 8;
  agent_config.hidden2 = 8;
  agent_config.batch_size = 16;
  agent_config.sequence_length = 4;
  Agent student(agent_config, 19);
  CartPole env;
  for (int i = 0; i < 8; ++i) {
    const auto outcome = distill_train_episode(student, teacher, env, config);
    CHECK(outcome.score >= 1.0);
    CHECK(outcome.score <= 500.0);
  }
}
