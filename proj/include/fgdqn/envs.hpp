#pragma once

#include "fgdqn/mdp.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace fgdqn {

template <class State>
struct StepResult {
  State next_state{};
  double reward = 0.0;
  bool terminal = false;
};

// ---- forest management ------------------------------------------------------

inline constexpr int kForestWait = 0;
inline constexpr int kForestCut = 1;

struct ForestParams {
  int num_states = 10;   // ages 0 .. num_states-1
  double fire_prob = 0.05;
  double discount = 0.8;

  void validate() const {
    if (num_states < 2) throw std::invalid_argument("ForestParams: need at least two ages");
    if (!(fire_prob >= 0.0) || fire_prob > 1.0)
      throw std::invalid_argument("ForestParams: fire_prob must lie in [0, 1]");
    if (!(discount >= 0.0) || discount >= 1.0)
      throw std::invalid_argument("ForestParams: discount must lie in [0, 1)");
  }
};

/// Wait: age advances (capped at the oldest age) unless a fire resets it to 0;
/// no reward. Cut: reset to age 0 and collect a reward equal to the age.
inline TabularMdp forest_build_mdp(const ForestParams& params) {
  params.validate();
  const int s = params.num_states;
  const double p = params.fire_prob;
  TabularMdp m(s, 2, params.discount);
  for (int x = 0; x < s; ++x) {
    const int grown = std::min(x + 1, s - 1);
    m.p(x, kForestWait, grown) += 1.0 - p;
    m.p(x, kForestWait, 0) += p;
    m.r(x, kForestWait) = 0.0;
    m.p(x, kForestCut, 0) = 1.0;
    m.r(x, kForestCut) = static_cast<double>(x);
  }
  return m;
}

// ---- sampling helpers -------------------------------------------------------

/// Draw a next state from p(.|x,u) by inverse-CDF scan.
template <class Rng>
int sample_next_state(const TabularMdp& m, int x, int u, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double t = unif(rng);
  double cum = 0.0;
  int last_positive = 0;
  for (int y = 0; y < m.num_states; ++y) {
    const double py = m.p(x, u, y);
    if (py > 0.0) last_positive = y;
    cum += py;
    if (t < cum) return y;
  }
  return last_positive;  // guards against cum < 1 from rounding
}

struct SampledTriple {
  int state = 0;
  int action = 0;
  int next_state = 0;
};

/// Cycles through all (x,u) pairs in lexicographic order and samples a next
/// state for each — the fixed off-policy exploration scheme.
class RoundRobinSampler {
 public:
  explicit RoundRobinSampler(const TabularMdp& mdp) : mdp_(&mdp) { mdp.validate(); }

  template <class Rng>
  SampledTriple next(Rng& rng) {
    const int x = static_cast<int>(cursor_) / mdp_->num_actions;
    const int u = static_cast<int>(cursor_) % mdp_->num_actions;
    cursor_ = (cursor_ + 1) % (static_cast<long>(mdp_->num_states) * mdp_->num_actions);
    return {x, u, sample_next_state(*mdp_, x, u, rng)};
  }

  long cycle_length() const { return static_cast<long>(mdp_->num_states) * mdp_->num_actions; }

 private:
  const TabularMdp* mdp_;
  long cursor_ = 0;
};

// ---- cartpole ---------------------------------------------------------------

struct CartPoleState {
  double cart_position = 0.0;
  double cart_velocity = 0.0;
  double pole_angle = 0.0;
  double angular_velocity = 0.0;
};

struct CartPoleParams {
  double gravity = 9.8;
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double pole_half_length = 0.5;
  double force_magnitude = 10.0;
  double time_step = 0.02;
  double angle_limit = 12.0 * M_PI / 180.0;
  double position_limit = 2.4;
  int max_episode_steps = 200;

  // gravity/force may be zeroed for kinematics-only test fixtures
  void validate() const {
    if (!(cart_mass > 0.0) || !(pole_mass > 0.0) || !(pole_half_length > 0.0) ||
        !(time_step > 0.0))
      throw std::invalid_argument("CartPoleParams: masses, length and time step must be positive");
    if (!(gravity >= 0.0) || !(force_magnitude >= 0.0))
      throw std::invalid_argument("CartPoleParams: gravity and force must be non-negative");
    if (!(angle_limit > 0.0) || !(position_limit > 0.0))
      throw std::invalid_argument("CartPoleParams: limits must be positive");
    if (max_episode_steps < 1)
      throw std::invalid_argument("CartPoleParams: max_episode_steps must be positive");
  }
};

inline constexpr int kCartPoleLeft = 0;
inline constexpr int kCartPoleRight = 1;

/// Every component independently uniform in [-0.05, 0.05].
template <class Rng>
CartPoleState cartpole_reset(Rng& rng) {
  std::uniform_real_distribution<double> unif(-0.05, 0.05);
  CartPoleState s;
  s.cart_position = unif(rng);
  s.cart_velocity = unif(rng);
  s.pole_angle = unif(rng);
  s.angular_velocity = unif(rng);
  return s;
}

/// One explicit Euler step of the frictionless cart-pole equations of motion
/// (positions advance with the pre-step velocities, then velocities with the
/// accelerations).
inline CartPoleState cartpole_dynamics(const CartPoleState& s, int action,
                                       const CartPoleParams& params) {
  const double total_mass = params.cart_mass + params.pole_mass;
  const double polemass_length = params.pole_mass * params.pole_half_length;
  const double force = (action == kCartPoleRight) ? params.force_magnitude : -params.force_magnitude;
  const double cos_a = std::cos(s.pole_angle);
  const double sin_a = std::sin(s.pole_angle);

  const double temp =
      (force + polemass_length * s.angular_velocity * s.angular_velocity * sin_a) / total_mass;
  const double angular_acc =
      (params.gravity * sin_a - cos_a * temp) /
      (params.pole_half_length * (4.0 / 3.0 - params.pole_mass * cos_a * cos_a / total_mass));
  const double linear_acc = temp - polemass_length * angular_acc * cos_a / total_mass;

  CartPoleState next;
  next.cart_position = s.cart_position + params.time_step * s.cart_velocity;
  next.cart_velocity = s.cart_velocity + params.time_step * linear_acc;
  next.pole_angle = s.pole_angle + params.time_step * s.angular_velocity;
  next.angular_velocity = s.angular_velocity + params.time_step * angular_acc;
  return next;
}

inline bool cartpole_out_of_bounds(const CartPoleState& s, const CartPoleParams& params) {
  return std::abs(s.cart_position) > params.position_limit ||
         std::abs(s.pole_angle) > params.angle_limit;
}

/// Reward is +1 per step; the episode ends when the pole or cart leaves its
/// bounds or when steps_completed (counting this step) reaches the cap.
inline StepResult<CartPoleState> cartpole_step(const CartPoleState& s, int action,
                                               const CartPoleParams& params, int steps_completed) {
  StepResult<CartPoleState> out;
  out.next_state = cartpole_dynamics(s, action, params);
  out.reward = 1.0;
  out.terminal =
      cartpole_out_of_bounds(out.next_state, params) || steps_completed >= params.max_episode_steps;
  return out;
}

/// Stateful episode wrapper; owns its RNG and step counter.
class CartPoleEnv {
 public:
  using State = CartPoleState;

  explicit CartPoleEnv(CartPoleParams params = {}, std::uint64_t seed = 0)
      : params_(params), rng_(seed) {
    params_.validate();
  }

  int num_actions() const { return 2; }
  const CartPoleParams& params() const { return params_; }

  CartPoleState reset() {
    state_ = cartpole_reset(rng_);
    steps_ = 0;
    done_ = false;
    return state_;
  }

  StepResult<CartPoleState> step(int action) {
    if (done_) throw std::logic_error("CartPoleEnv: step on a finished episode; call reset()");
    if (action != kCartPoleLeft && action != kCartPoleRight)
      throw std::invalid_argument("CartPoleEnv: action must be 0 (left) or 1 (right)");
    ++steps_;
    StepResult<CartPoleState> out = cartpole_step(state_, action, params_, steps_);
    state_ = out.next_state;
    done_ = out.terminal;
    return out;
  }

  int steps_taken() const { return steps_; }
  bool done() const { return done_; }

 private:
  CartPoleParams params_;
  std::mt19937_64 rng_;
  CartPoleState state_{};
  int steps_ = 0;
  bool done_ = true;  // must reset before stepping
};

}  // namespace fgdqn
