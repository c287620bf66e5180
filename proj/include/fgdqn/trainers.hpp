#pragma once

#include "fgdqn/encoders.hpp"
#include "fgdqn/envs.hpp"
#include "fgdqn/mdp.hpp"
#include "fgdqn/metrics.hpp"
#include "fgdqn/qnet.hpp"
#include "fgdqn/replay.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <unordered_map>
#include <utility>
#include <vector>

namespace fgdqn {

enum class Algorithm { tabular_q, dqn, double_dqn, fgdqn };

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::tabular_q: return "tabular_q";
    case Algorithm::dqn: return "dqn";
    case Algorithm::double_dqn: return "double_dqn";
    case Algorithm::fgdqn: return "fgdqn";
  }
  return "fgdqn";
}

inline Algorithm algorithm_from_string(const std::string& s) {
  if (s == "tabular_q") return Algorithm::tabular_q;
  if (s == "dqn") return Algorithm::dqn;
  if (s == "double_dqn") return Algorithm::double_dqn;
  if (s == "fgdqn") return Algorithm::fgdqn;
  throw std::invalid_argument("unknown algorithm: " + s);
}

// ---- step sizes ------------------------------------------------------------

enum class ScheduleKind { constant, polynomial };

/// a(n) = base (constant) or base / (1 + n/offset)^exponent. The polynomial
/// kind with exponent in (0.5, 1] meets the Robbins-Monro conditions
/// sum a(n) = inf, sum a(n)^2 < inf.
struct StepSizeSchedule {
  ScheduleKind kind = ScheduleKind::constant;
  double base = 1e-3;
  double exponent = 1.0;
  double offset = 1.0;

  void validate() const {
    if (!(base > 0.0)) throw std::invalid_argument("StepSizeSchedule: base must be positive");
    if (kind == ScheduleKind::polynomial) {
      if (!(offset > 0.0)) throw std::invalid_argument("StepSizeSchedule: offset must be positive");
      if (!(exponent > 0.5) || exponent > 1.0)
        throw std::invalid_argument("StepSizeSchedule: exponent must lie in (0.5, 1]");
    }
  }
};

inline double step_size(const StepSizeSchedule& s, long n) {
  if (n < 0) throw std::invalid_argument("step_size: n must be non-negative");
  if (s.kind == ScheduleKind::constant) return s.base;
  return s.base / std::pow(1.0 + static_cast<double>(n) / s.offset, s.exponent);
}

// ---- configuration -----------------------------------------------------------

struct TrainerConfig {
  Algorithm algorithm = Algorithm::fgdqn;
  StepSizeSchedule schedule;
  double discount = 0.99;
  int minibatch_size = 25;
  int target_sync_period = 100;  // iterations (off-policy) or episodes (on-policy)
  double epsilon = 0.1;
  double noise_amplitude = 0.0;  // amplitude of the extraneous uniform noise
  bool conditional_replay = false;
  bool sequential_inner_updates = false;
  std::size_t replay_capacity = 100000;
  std::uint64_t seed = 0;

  void validate() const {
    schedule.validate();
    if (!(discount >= 0.0) || discount >= 1.0)
      throw std::invalid_argument("TrainerConfig: discount must lie in [0, 1)");
    if (minibatch_size < 1) throw std::invalid_argument("TrainerConfig: minibatch_size must be >= 1");
    if (target_sync_period < 1)
      throw std::invalid_argument("TrainerConfig: target_sync_period must be >= 1");
    if (!(epsilon >= 0.0) || epsilon > 1.0)
      throw std::invalid_argument("TrainerConfig: epsilon must lie in [0, 1]");
    if (!(noise_amplitude >= 0.0))
      throw std::invalid_argument("TrainerConfig: noise_amplitude must be >= 0");
    if (replay_capacity < 1) throw std::invalid_argument("TrainerConfig: replay_capacity must be >= 1");
  }
};

/// Stable scrambling of a base seed per role (env stream vs trainer stream).
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// ---- per-sample TD quantities ---------------------------------------------------

/// delta together with the two parameter gradients appearing in the updates:
/// grad_current = dQ(X,U)/dtheta and grad_target = gamma * dQ(X',v*)/dtheta
/// (zero on terminal transitions, and unused by the semi-gradient modes).
struct TdTerms {
  double delta = 0.0;
  Eigen::VectorXd grad_current;
  Eigen::VectorXd grad_target;
};

enum class TdMode { dqn, double_dqn, fgdqn };

template <class Encoder>
TdTerms compute_td_terms(const QFunction<Encoder>& qf, const QFunction<Encoder>* target_qf,
                         const Transition<typename Encoder::State>& t, TdMode mode, double gamma) {
  if (mode != TdMode::fgdqn && target_qf == nullptr)
    throw std::invalid_argument("compute_td_terms: this mode requires a target network");
  TdTerms out;
  const double q_current = qf.value(t.state, t.action);
  qf.grad(t.state, t.action, out.grad_current);
  out.grad_target = Eigen::VectorXd::Zero(qf.net().param_count());

  double z = t.reward;
  if (!t.terminal) {
    switch (mode) {
      case TdMode::dqn:
        z += gamma * target_qf->argmax(t.next_state).value;
        break;
      case TdMode::double_dqn: {
        const int sel = qf.argmax(t.next_state).index;
        z += gamma * target_qf->value(t.next_state, sel);
        break;
      }
      case TdMode::fgdqn: {
        const ArgmaxResult am = qf.argmax(t.next_state);
        z += gamma * am.value;
        qf.grad(t.next_state, am.index, out.grad_target);
        out.grad_target *= gamma;
        break;
      }
    }
  }
  out.delta = z - q_current;
  return out;
}

template <class Encoder>
TdTerms compute_td_terms(const QFunction<Encoder>& qf, std::nullptr_t,
                         const Transition<typename Encoder::State>& t, TdMode mode, double gamma) {
  return compute_td_terms(qf, static_cast<const QFunction<Encoder>*>(nullptr), t, mode, gamma);
}

// ---- tabular Q-learning ------------------------------------------------------

/// Single asynchronous update: only the (X,U) component moves.
inline void q_learning_step(QTable& q, const Transition<int>& t, double a_n, double gamma) {
  if (t.state < 0 || t.state >= q.num_states || t.action < 0 || t.action >= q.num_actions ||
      t.next_state < 0 || t.next_state >= q.num_states)
    throw std::invalid_argument("q_learning_step: transition indices out of range");
  double target = t.reward;
  if (!t.terminal) {
    double best = q.at(t.next_state, 0);
    for (int u = 1; u < q.num_actions; ++u) best = std::max(best, q.at(t.next_state, u));
    target += gamma * best;
  }
  q.at(t.state, t.action) += a_n * (target - q.at(t.state, t.action));
}

// ---- deep updates ----------------------------------------------------------------

namespace detail {

// Cached argmax data for discrete next states; theta is fixed within a step,
// so one entry per state suffices.
struct TargetEntry {
  int action = 0;
  double value = 0.0;
};

template <class Encoder, class State>
const TargetEntry& memo_argmax(const QFunction<Encoder>& qf, State x,
                               std::unordered_map<long long, TargetEntry>& memo) {
  auto it = memo.find(static_cast<long long>(x));
  if (it == memo.end()) {
    const ArgmaxResult am = qf.argmax(x);
    it = memo.emplace(static_cast<long long>(x), TargetEntry{am.index, am.value}).first;
  }
  return it->second;
}

template <class Rng>
void add_uniform_noise(Eigen::VectorXd& dir, double amplitude, Rng& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (Eigen::Index i = 0; i < dir.size(); ++i) dir[i] += amplitude * unif(rng);
}

}  // namespace detail

/// Semi-gradient step: theta += a_n * mean_b[ delta_b * grad Q(X_b,U_b) ],
/// with the target values held by a frozen network.
template <class Encoder>
void dqn_step(QFunction<Encoder>& qf, const QFunction<Encoder>& target_qf,
              const std::vector<Transition<typename Encoder::State>>& batch, double a_n,
              double gamma, bool double_dqn_selection = false) {
  if (batch.empty()) throw std::invalid_argument("dqn_step: empty batch");
  using State = typename Encoder::State;
  const int b_count = static_cast<int>(batch.size());
  Eigen::VectorXd grad;

  if constexpr (Encoder::per_action_outputs) {
    const int dim = qf.encoder().input_dim();
    Eigen::MatrixXd cur_inputs(dim, b_count);
    Eigen::MatrixXd next_inputs(dim, b_count);
    std::vector<int> out_idx(b_count);
    for (int b = 0; b < b_count; ++b) {
      out_idx[b] = qf.encode_into_column(batch[b].state, batch[b].action, cur_inputs, b);
      qf.encode_into_column(batch[b].next_state, 0, next_inputs, b);
    }
    auto& ws = qf.batch_workspace();
    qf.net().forward_batch(cur_inputs, ws);
    const Eigen::MatrixXd q_cur = qf.net().batch_outputs(ws);

    QNetwork::BatchWorkspace target_ws;
    target_qf.net().forward_batch(next_inputs, target_ws);
    const Eigen::MatrixXd& q_target = target_qf.net().batch_outputs(target_ws);
    Eigen::MatrixXd q_online_next;
    if (double_dqn_selection) {
      QNetwork::BatchWorkspace online_next_ws;
      qf.net().forward_batch(next_inputs, online_next_ws);
      q_online_next = qf.net().batch_outputs(online_next_ws);
    }

    Eigen::VectorXd coeffs(b_count);
    for (int b = 0; b < b_count; ++b) {
      double z = batch[b].reward;
      if (!batch[b].terminal) {
        const int sel = double_dqn_selection ? argmax_lowest_tie(q_online_next.col(b)).index
                                             : argmax_lowest_tie(q_target.col(b)).index;
        z += gamma * q_target(sel, b);
      }
      coeffs[b] = (z - q_cur(out_idx[b], b)) / static_cast<double>(b_count);
    }
    qf.net().backward_weighted(ws, out_idx, coeffs, grad);
    qf.net().params() += a_n * grad;
  } else {
    static_assert(std::is_integral_v<State>, "pair encoders require discrete states");
    std::unordered_map<long long, detail::TargetEntry> memo;
    Eigen::VectorXd gc;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(qf.net().param_count());
    for (const auto& t : batch) {
      double z = t.reward;
      if (!t.terminal) {
        if (double_dqn_selection) {
          const int sel = qf.argmax(t.next_state).index;
          z += gamma * target_qf.value(t.next_state, sel);
        } else {
          z += gamma * detail::memo_argmax(target_qf, t.next_state, memo).value;
        }
      }
      const double delta = z - qf.value(t.state, t.action);
      qf.grad(t.state, t.action, gc);
      sum += delta * gc;
    }
    qf.net().params() += (a_n / static_cast<double>(b_count)) * sum;
  }
}

template <class Encoder>
void double_dqn_step(QFunction<Encoder>& qf, const QFunction<Encoder>& target_qf,
                     const std::vector<Transition<typename Encoder::State>>& batch, double a_n,
                     double gamma) {
  dqn_step(qf, target_qf, batch, a_n, gamma, /*double_dqn_selection=*/true);
}

/// Full-gradient step: theta -= a_n * (mean_b[ dbar_b * (grad_target_b -
/// grad_current_b) ] + noise_amplitude * xi) with xi componentwise uniform on
/// [-1,1]. With conditional replay, dbar averages the target over every stored
/// transition sharing (X_b, U_b); otherwise it is the per-sample delta.
template <class Encoder, class Rng>
void fgdqn_step(QFunction<Encoder>& qf,
                const std::vector<Transition<typename Encoder::State>>& batch,
                const ReplayBuffer<typename Encoder::State>& buffer, double a_n, double gamma,
                double noise_amplitude, Rng& rng, bool conditional_replay,
                bool sequential_inner_updates = false) {
  if (batch.empty()) throw std::invalid_argument("fgdqn_step: empty batch");
  using State = typename Encoder::State;
  const int b_count = static_cast<int>(batch.size());

  if constexpr (!std::is_integral_v<State>) {
    if (conditional_replay)
      throw std::invalid_argument("fgdqn_step: conditional replay requires discrete states");
  }

  if (sequential_inner_updates) {
    // Algorithm-1 inner-loop reading: one parameter update per batch element,
    // each using the freshest theta.
    Eigen::VectorXd dir;
    for (const auto& t : batch) {
      TdTerms terms = compute_td_terms<Encoder>(qf, nullptr, t, TdMode::fgdqn, gamma);
      double dbar = terms.delta;
      if (conditional_replay) {
        if constexpr (std::is_integral_v<State>) {
          std::unordered_map<long long, detail::TargetEntry> memo;
          const double avg = conditional_target_average(
              buffer, t.state, t.action, [&](const Transition<State>& s) {
                return s.terminal ? s.reward
                                  : s.reward + gamma * detail::memo_argmax(qf, s.next_state, memo).value;
              });
          dbar = avg - qf.value(t.state, t.action);
        }
      }
      dir = dbar * (terms.grad_target - terms.grad_current);
      if (noise_amplitude > 0.0) detail::add_uniform_noise(dir, noise_amplitude, rng);
      qf.net().params() -= a_n * dir;
    }
    return;
  }

  Eigen::VectorXd dir;
  if constexpr (Encoder::per_action_outputs && !std::is_integral_v<State>) {
    // Continuous states: per-sample deltas, one batched pass over the 2B
    // columns (current pairs then next states).
    const int dim = qf.encoder().input_dim();
    Eigen::MatrixXd inputs(dim, 2 * b_count);
    std::vector<int> out_idx(2 * b_count, 0);
    for (int b = 0; b < b_count; ++b) {
      out_idx[b] = qf.encode_into_column(batch[b].state, batch[b].action, inputs, b);
      qf.encode_into_column(batch[b].next_state, 0, inputs, b_count + b);
    }
    auto& ws = qf.batch_workspace();
    qf.net().forward_batch(inputs, ws);
    const Eigen::MatrixXd& q = qf.net().batch_outputs(ws);

    Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(2 * b_count);
    const double inv_b = 1.0 / static_cast<double>(b_count);
    for (int b = 0; b < b_count; ++b) {
      const double q_xu = q(out_idx[b], b);
      double delta;
      if (batch[b].terminal) {
        delta = batch[b].reward - q_xu;
      } else {
        const ArgmaxResult am = argmax_lowest_tie(q.col(b_count + b));
        delta = batch[b].reward + gamma * am.value - q_xu;
        out_idx[b_count + b] = am.index;
        coeffs[b_count + b] = gamma * delta * inv_b;
      }
      coeffs[b] = -delta * inv_b;
    }
    qf.net().backward_weighted(ws, out_idx, coeffs, dir);
  } else {
    std::unordered_map<long long, detail::TargetEntry> memo;
    Eigen::VectorXd gc, gt;
    dir = Eigen::VectorXd::Zero(qf.net().param_count());
    for (const auto& t : batch) {
      const double q_xu = qf.value(t.state, t.action);
      double dbar;
      if (conditional_replay) {
        if constexpr (std::is_integral_v<State>) {
          const double avg = conditional_target_average(
              buffer, t.state, t.action, [&](const Transition<State>& s) {
                return s.terminal ? s.reward
                                  : s.reward + gamma * detail::memo_argmax(qf, s.next_state, memo).value;
              });
          dbar = avg - q_xu;
        } else {
          dbar = 0.0;  // unreachable; guarded above
        }
      } else {
        dbar = t.terminal
                   ? t.reward - q_xu
                   : t.reward + gamma * detail::memo_argmax(qf, t.next_state, memo).value - q_xu;
      }
      qf.grad(t.state, t.action, gc);
      if (t.terminal) {
        dir -= dbar * gc;
      } else {
        qf.grad(t.next_state, detail::memo_argmax(qf, t.next_state, memo).action, gt);
        dir += dbar * (gamma * gt - gc);
      }
    }
    dir /= static_cast<double>(b_count);
  }

  if (noise_amplitude > 0.0) detail::add_uniform_noise(dir, noise_amplitude, rng);
  qf.net().params() -= a_n * dir;
}

/// Copies theta into the target network whenever n is a multiple of K.
template <class Encoder>
void target_sync(const QFunction<Encoder>& qf, QFunction<Encoder>& target_qf, long n, int period) {
  if (period < 1) throw std::invalid_argument("target_sync: period must be >= 1");
  if (n % period == 0) target_qf.net().params() = qf.net().params();
}

/// With probability epsilon a uniformly random action, otherwise the greedy one.
template <class Encoder, class Rng>
int epsilon_greedy(const QFunction<Encoder>& qf, const typename Encoder::State& state, double eps,
                   Rng& rng) {
  if (!(eps >= 0.0) || eps > 1.0) throw std::invalid_argument("epsilon_greedy: epsilon in [0,1]");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (unif(rng) < eps) {
    std::uniform_int_distribution<int> pick(0, qf.num_actions() - 1);
    return pick(rng);
  }
  return qf.argmax(state).index;
}

// ---- training loops -----------------------------------------------------------

struct OffPolicyResult {
  QNetwork net;      // trained network (deep algorithms)
  QTable qtable;     // trained table (tabular_q)
  RunMetrics metrics;
};

/// Off-policy training on an exact tabular model: round-robin sweep over all
/// (x,u) pairs, one sampled next state and one update per iteration. Records
/// the sampled Bellman error (pre-update) plus exact Bellman error and
/// Hamming distance to the optimal policy (post-update) every iteration.
inline OffPolicyResult train_off_policy(const TabularMdp& mdp, const TrainerConfig& cfg,
                                        const MlpTopology& net_topology, long iterations) {
  mdp.validate();
  cfg.validate();
  if (iterations < 0) throw std::invalid_argument("train_off_policy: negative iteration budget");

  OffPolicyResult res;
  RunMetrics& met = res.metrics;
  met.kind = RunKind::off_policy;
  met.seed = cfg.seed;
  met.dqn_bellman_error.reserve(iterations);
  met.true_bellman_error.reserve(iterations);
  met.hamming_distance.reserve(iterations);

  std::mt19937_64 rng(cfg.seed);
  const DeterministicPolicy pi_star = policy_iteration(mdp).policy;
  const std::vector<double> mu = uniform_state_action_weights(mdp);
  RoundRobinSampler sampler(mdp);
  std::vector<Transition<int>> single(1);

  if (cfg.algorithm == Algorithm::tabular_q) {
    res.qtable = QTable(mdp.num_states, mdp.num_actions);
    for (long n = 0; n < iterations; ++n) {
      const SampledTriple tr = sampler.next(rng);
      single[0] = {tr.state, tr.action, mdp.r(tr.state, tr.action), tr.next_state, false};
      met.dqn_bellman_error.push_back(dqn_bellman_error(res.qtable, single, cfg.discount));
      q_learning_step(res.qtable, single[0], step_size(cfg.schedule, n), cfg.discount);
      met.hamming_distance.push_back(hamming_distance(greedy_policy(res.qtable), pi_star));
      met.true_bellman_error.push_back(true_bellman_error(res.qtable, mdp, mu));
    }
    return res;
  }

  OneHotPairEncoder enc{mdp.num_states, mdp.num_actions};
  MlpTopology topo = net_topology;
  if (topo.input_dim == 0) topo.input_dim = enc.input_dim();
  topo.output_dim = enc.output_dim();
  QFunction<OneHotPairEncoder> qf(init_params(topo, rng), enc);
  QFunction<OneHotPairEncoder> target_qf = qf;
  const bool needs_target =
      cfg.algorithm == Algorithm::dqn || cfg.algorithm == Algorithm::double_dqn;
  ReplayBuffer<int> buffer(cfg.replay_capacity);

  for (long n = 0; n < iterations; ++n) {
    if (needs_target) target_sync(qf, target_qf, n, cfg.target_sync_period);
    const SampledTriple tr = sampler.next(rng);
    buffer.push({tr.state, tr.action, mdp.r(tr.state, tr.action), tr.next_state, false});
    const auto batch = buffer.sample_minibatch(cfg.minibatch_size, rng);
    met.dqn_bellman_error.push_back(dqn_bellman_error(qf, batch, cfg.discount));

    const double a_n = step_size(cfg.schedule, n);
    switch (cfg.algorithm) {
      case Algorithm::dqn:
        dqn_step(qf, target_qf, batch, a_n, cfg.discount);
        break;
      case Algorithm::double_dqn:
        double_dqn_step(qf, target_qf, batch, a_n, cfg.discount);
        break;
      case Algorithm::fgdqn:
        fgdqn_step(qf, batch, buffer, a_n, cfg.discount, cfg.noise_amplitude, rng,
                   cfg.conditional_replay, cfg.sequential_inner_updates);
        break;
      case Algorithm::tabular_q:
        break;  // handled above
    }
    if (!qf.net().params().allFinite()) {
      met.diverged = true;
      break;
    }
    met.hamming_distance.push_back(
        hamming_distance(greedy_policy_of_net(qf, mdp.num_states), pi_star));
    met.true_bellman_error.push_back(true_bellman_error(qf, mdp, mu));
  }
  res.net = qf.net();
  return res;
}

struct OnPolicyResult {
  QNetwork net;
  RunMetrics metrics;
};

/// Episodic on-policy training: epsilon-greedy acting, replay push, one
/// minibatch update per environment step. Target networks (semi-gradient
/// baselines) sync on an episode clock.
template <class Env, class Encoder>
OnPolicyResult train_on_policy(Env& env, const Encoder& enc, const TrainerConfig& cfg,
                               const MlpTopology& net_topology, int num_episodes, int max_steps) {
  cfg.validate();
  if (num_episodes < 0) throw std::invalid_argument("train_on_policy: negative episode budget");
  if (max_steps < 1) throw std::invalid_argument("train_on_policy: max_steps must be >= 1");
  if (cfg.algorithm == Algorithm::tabular_q)
    throw std::invalid_argument("train_on_policy: tabular_q is not an episodic deep trainer");
  using State = typename Encoder::State;

  OnPolicyResult res;
  RunMetrics& met = res.metrics;
  met.kind = RunKind::on_policy;
  met.seed = cfg.seed;

  std::mt19937_64 rng(cfg.seed);
  MlpTopology topo = net_topology;
  if (topo.input_dim == 0) topo.input_dim = enc.input_dim();
  topo.output_dim = enc.output_dim();
  QFunction<Encoder> qf(init_params(topo, rng), enc);
  QFunction<Encoder> target_qf = qf;
  const bool needs_target =
      cfg.algorithm == Algorithm::dqn || cfg.algorithm == Algorithm::double_dqn;
  ReplayBuffer<State> buffer(cfg.replay_capacity);
  long iteration = 0;

  for (int ep = 0; ep < num_episodes && !met.diverged; ++ep) {
    if (needs_target) target_sync(qf, target_qf, ep, cfg.target_sync_period);
    State x = env.reset();
    double ep_reward = 0.0;
    double ep_discounted = 0.0;
    double gamma_pow = 1.0;
    double bellman_sum = 0.0;
    int steps = 0;

    for (int t = 0; t < max_steps; ++t) {
      const int u = epsilon_greedy(qf, x, cfg.epsilon, rng);
      const auto sr = env.step(u);
      buffer.push({x, u, sr.reward, sr.next_state, sr.terminal});
      const auto batch = buffer.sample_minibatch(cfg.minibatch_size, rng);
      const double be = dqn_bellman_error(qf, batch, cfg.discount);
      met.dqn_bellman_error.push_back(be);
      bellman_sum += be;

      const double a_n = step_size(cfg.schedule, iteration);
      switch (cfg.algorithm) {
        case Algorithm::dqn:
          dqn_step(qf, target_qf, batch, a_n, cfg.discount);
          break;
        case Algorithm::double_dqn:
          double_dqn_step(qf, target_qf, batch, a_n, cfg.discount);
          break;
        case Algorithm::fgdqn:
          fgdqn_step(qf, batch, buffer, a_n, cfg.discount, cfg.noise_amplitude, rng,
                     cfg.conditional_replay, cfg.sequential_inner_updates);
          break;
        case Algorithm::tabular_q:
          break;
      }
      ++iteration;
      ++steps;
      ep_reward += sr.reward;
      ep_discounted += gamma_pow * sr.reward;
      gamma_pow *= cfg.discount;
      if (!qf.net().params().allFinite()) {
        met.diverged = true;
        break;
      }
      x = sr.next_state;
      if (sr.terminal) break;
    }

    met.episode_reward.push_back(ep_reward);
    met.episode_length.push_back(static_cast<double>(steps));
    met.episode_discounted_reward.push_back(ep_discounted);
    met.episode_mean_bellman_error.push_back(steps > 0 ? bellman_sum / steps : 0.0);
  }
  res.net = qf.net();
  return res;
}

}  // namespace fgdqn
