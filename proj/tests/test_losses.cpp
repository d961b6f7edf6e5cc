#include <doctest.h>

#include <cmath>
#include <limits>

#include "qdistill/losses.hpp"
#include "qdistill/rng.hpp"

using namespace qdistill;

namespace {
Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}
}  // namespace

TEST_CASE("softened softmax: equal logits give the uniform distribution") {
  for (double t : {0.5, 1.0, 5.0, 100.0}) {
    const Vec q = softmax_with_temperature(vec2(1.0, 1.0), t);
    CHECK(q(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(q(1) == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("softened softmax reproduces the hand-derived values for z=[2,0]") {
  const Vec q1 = softmax_with_temperature(vec2(2.0, 0.0), 1.0);
  CHECK(std::abs(q1(0) - 0.8807970779778824) < 1e-6);
  CHECK(std::abs(q1(1) - 0.1192029220221176) < 1e-6);

  const Vec q5 = softmax_with_temperature(vec2(2.0, 0.0), 5.0);
  CHECK(std::abs(q5(0) - 0.598687660112452) < 1e-6);
  CHECK(std::abs(q5(1) - 0.401312339887548) < 1e-6);
  // larger T is visibly softer
  CHECK(q5(0) < q1(0));
}

TEST_CASE("softened softmax normalizes, stays positive, and is shift invariant") {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    Vec z(4);
    for (int j = 0; j < 4; ++j) {
      z(j) = rng.uniform(-50.0, 50.0);
    }
    const double t = rng.uniform(0.1, 20.0);
    const Vec q = softmax_with_temperature(z, t);
    CHECK(std::abs(q.sum() - 1.0) < 1e-9);
    CHECK((q.array() > 0.0).all());

    const Vec shifted = softmax_with_temperature(Vec(z.array() + 123.456), t);
    CHECK((q - shifted).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("softened softmax limits: T=1 is plain softmax, huge T is uniform") {
  const Vec z = vec2(3.0, -1.0);
  const Vec plain = softmax_with_temperature(z, 1.0);
  const double e3 = std::exp(3.0), em1 = std::exp(-1.0);
  CHECK(plain(0) == doctest::Approx(e3 / (e3 + em1)).epsilon(1e-12));

  const Vec soft = softmax_with_temperature(z, 1e6);
  CHECK(std::abs(soft(0) - 0.5) < 1e-5);
  CHECK(std::abs(soft(1) - 0.5) < 1e-5);
}

TEST_CASE("softmax temperature must be positive and logits finite") {
  CHECK_THROWS_AS(softmax_with_temperature(vec2(1, 2), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(softmax_with_temperature(vec2(1, 2), -1.0), std::invalid_argument);
  CHECK_THROWS_AS(
      softmax_with_temperature(vec2(std::numeric_limits<double>::infinity(), 0), 1.0),
      std::invalid_argument);
}

TEST_CASE("kl_divergence closed-form cases") {
  CHECK(kl_divergence(vec2(0.5, 0.5), vec2(0.5, 0.5)) == 0.0);
  CHECK(kl_divergence(vec2(1.0, 0.0), vec2(0.5, 0.5)) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("kl_divergence is non-negative and validates its inputs") {
  Rng rng(9);
  for (int i = 0; i < 500; ++i) {
    Vec p = softmax_with_temperature(vec2(rng.uniform(-5, 5), rng.uniform(-5, 5)), 1.0);
    Vec q = softmax_with_temperature(vec2(rng.uniform(-5, 5), rng.uniform(-5, 5)), 1.0);
    CHECK(kl_divergence(p, q) >= 0.0);
  }
  CHECK_THROWS_AS(kl_divergence(vec2(0.7, 0.7), vec2(0.5, 0.5)), std::invalid_argument);
  CHECK_THROWS_AS(kl_divergence(vec2(0.5, 0.5), vec2(1.0, 0.0)), std::invalid_argument);
}

TEST_CASE("huber is quadratic inside the delta and linear outside") {
  CHECK(huber(0.3) == doctest::Approx(0.5 * 0.09));
  CHECK(huber(-2.0) == doctest::Approx(2.0 - 0.5));
}

TEST_CASE("td loss gradient only touches the taken action") {
  Mat logits(2, 2);
  logits << 1.0, 4.0, 2.0, 0.5;
  TdBatch batch;
  batch.states = Mat::Zero(4, 2);
  batch.actions = {0, 1};
  batch.targets = vec2(1.0, 0.5);  // residuals are zero
  Mat dlogits;
  const double loss = td_loss_and_grad(logits, batch, TdLossKind::Squared, dlogits);
  CHECK(loss == 0.0);
  CHECK(dlogits.cwiseAbs().maxCoeff() == 0.0);

  batch.targets = vec2(0.0, 0.0);
  const double loss2 = td_loss_and_grad(logits, batch, TdLossKind::Squared, dlogits);
  CHECK(loss2 == doctest::Approx((1.0 + 0.25) / 2.0));
  CHECK(dlogits(1, 0) == 0.0);  // untaken actions get no gradient
  CHECK(dlogits(0, 1) == 0.0);
}

TEST_CASE("kd loss is zero iff softened distributions match") {
  Mat teacher(2, 1);
  teacher << 2.0, 0.0;
  KdBatch kd{teacher, 5.0};
  Mat dlogits;
  CHECK(kd_loss_and_grad(teacher, kd, dlogits) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(dlogits.cwiseAbs().maxCoeff() < 1e-12);

  Mat student(2, 1);
  student << 0.0, 0.0;
  const double loss = kd_loss_and_grad(student, kd, dlogits);
  CHECK(loss > 0.0);
  CHECK(dlogits.cwiseAbs().maxCoeff() > 0.0);
}
