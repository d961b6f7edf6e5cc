#include "qdistill/cartpole.hpp"

#include <cmath>
#include <stdexcept>

namespace qdistill {

EnvState integrate(const EnvParams& params, const EnvState& state, int action) {
  if (action != 0 && action != 1) {
    throw std::invalid_argument("cartpole action must be 0 or 1");
  }
  const double force = action == 1 ? params.force_magnitude : -params.force_magnitude;
  const double total_mass = params.cart_mass + params.pole_mass;
  const double polemass_length = params.pole_mass * params.pole_half_length;
  const double cos_theta = std::cos(state.theta);
  const double sin_theta = std::sin(state.theta);

  const double temp =
      (force + polemass_length * state.theta_dot * state.theta_dot * sin_theta) / total_mass;
  const double theta_acc =
      (params.gravity * sin_theta - cos_theta * temp) /
      (params.pole_half_length *
       (4.0 / 3.0 - params.pole_mass * cos_theta * cos_theta / total_mass));
  const double x_acc = temp - polemass_length * theta_acc * cos_theta / total_mass;

  EnvState next = state;
  next.x = state.x + params.time_step * state.x_dot;
  next.x_dot = state.x_dot + params.time_step * x_acc;
  next.theta = state.theta + params.time_step * state.theta_dot;
  next.theta_dot = state.theta_dot + params.time_step * theta_acc;
  return next;
}

bool violates_bounds(const EnvParams& params, const EnvState& state) {
  return std::abs(state.x) > params.position_threshold ||
         std::abs(state.theta) > params.angle_threshold;
}

Observation observe(const EnvState& state) {
  return {state.x, state.x_dot, state.theta, state.theta_dot};
}

CartPole::CartPole(EnvParams params) : params_(params) {}

Observation CartPole::reset(std::uint64_t seed) {
  rng_ = Rng(seed);
  state_.x = rng_.uniform(-0.05, 0.05);
  state_.x_dot = rng_.uniform(-0.05, 0.05);
  state_.theta = rng_.uniform(-0.05, 0.05);
  state_.theta_dot = rng_.uniform(-0.05, 0.05);
  state_.step_count = 0;
  finished_ = false;
  return observe(state_);
}

StepResult CartPole::step(int action) {
  if (finished_) {
    throw std::logic_error("step() called on a finished cart-pole episode");
  }
  EnvState next = integrate(params_, state_, action);
  next.step_count = state_.step_count + 1;
  state_ = next;

  StepResult result;
  result.observation = observe(state_);
  result.reward = 1.0;
  result.terminated = violates_bounds(params_, state_);
  result.truncated = !result.terminated && state_.step_count >= params_.max_steps;
  finished_ = result.terminated || result.truncated;
  return result;
}

}  // namespace qdistill
