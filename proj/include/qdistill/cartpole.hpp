#pragma once

#include <array>
#include <cstdint>

#include "qdistill/rng.hpp"

namespace qdistill {

using Observation = std::array<double, 4>;

struct EnvParams {
  double gravity = 9.8;
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double pole_half_length = 0.5;
  double force_magnitude = 10.0;
  double time_step = 0.02;
  double angle_threshold = 12.0 * 2.0 * 3.14159265358979323846 / 360.0;
  double position_threshold = 2.4;
  int max_steps = 500;
};

struct EnvState {
  double x = 0.0;
  double x_dot = 0.0;
  double theta = 0.0;
  double theta_dot = 0.0;
  int step_count = 0;
};

struct StepResult {
  Observation observation{};
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
};

// One semi-explicit Euler step of the cart-pole dynamics (positions advance
// with the pre-update velocities). Pure; does not touch step_count.
EnvState integrate(const EnvParams& params, const EnvState& state, int action);

bool violates_bounds(const EnvParams& params, const EnvState& state);

class CartPole {
 public:
  explicit CartPole(EnvParams params = {});

  // Seeds the init draw; every state component uniform in [-0.05, 0.05].
  Observation reset(std::uint64_t seed);

  // action: 0 pushes left, 1 pushes right. Throws std::logic_error if the
  // episode already finished.
  StepResult step(int action);

  const EnvState& state() const { return state_; }
  const EnvParams& params() const { return params_; }
  bool done() const { return finished_; }

 private:
  EnvParams params_;
  EnvState state_;
  Rng rng_{0};
  bool finished_ = true;  // must reset() before stepping
};

Observation observe(const EnvState& state);

}  // namespace qdistill
