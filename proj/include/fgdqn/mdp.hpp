#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace fgdqn {

inline constexpr double kRowSumTol = 1e-12;

/// Finite MDP with dense transition kernel p(y|x,u), reward r(x,u) and
/// discount gamma. States and actions are 0-based indices; arrays are
/// stored flat, state-major.
struct TabularMdp {
  int num_states = 0;
  int num_actions = 0;
  double discount = 0.0;
  std::vector<double> transition;  // p[x][u][y]
  std::vector<double> reward;      // r[x][u]

  TabularMdp() = default;
  TabularMdp(int states, int actions, double gamma)
      : num_states(states),
        num_actions(actions),
        discount(gamma),
        transition(static_cast<std::size_t>(states) * actions * states, 0.0),
        reward(static_cast<std::size_t>(states) * actions, 0.0) {}

  double p(int x, int u, int y) const {
    return transition[(static_cast<std::size_t>(x) * num_actions + u) * num_states + y];
  }
  double& p(int x, int u, int y) {
    return transition[(static_cast<std::size_t>(x) * num_actions + u) * num_states + y];
  }
  double r(int x, int u) const { return reward[static_cast<std::size_t>(x) * num_actions + u]; }
  double& r(int x, int u) { return reward[static_cast<std::size_t>(x) * num_actions + u]; }

  /// Throws std::invalid_argument on any structural or stochasticity violation.
  /// gamma = 0 is accepted (degenerate myopic problems are useful fixtures).
  void validate() const {
    if (num_states < 1 || num_actions < 1)
      throw std::invalid_argument("TabularMdp: state/action counts must be positive");
    if (!(discount >= 0.0) || discount >= 1.0)
      throw std::invalid_argument("TabularMdp: discount must lie in [0, 1)");
    const std::size_t n = static_cast<std::size_t>(num_states) * num_actions;
    if (transition.size() != n * num_states || reward.size() != n)
      throw std::invalid_argument("TabularMdp: array sizes inconsistent with dimensions");
    for (int x = 0; x < num_states; ++x) {
      for (int u = 0; u < num_actions; ++u) {
        double row_sum = 0.0;
        for (int y = 0; y < num_states; ++y) {
          const double pr = p(x, u, y);
          if (!(pr >= 0.0) || !std::isfinite(pr))
            throw std::invalid_argument("TabularMdp: negative or non-finite transition entry");
          row_sum += pr;
        }
        if (std::abs(row_sum - 1.0) > kRowSumTol)
          throw std::invalid_argument("TabularMdp: transition row (" + std::to_string(x) + "," +
                                      std::to_string(u) + ") sums to " + std::to_string(row_sum));
        if (!std::isfinite(r(x, u)))
          throw std::invalid_argument("TabularMdp: non-finite reward entry");
      }
    }
  }
};

struct ValueFunction {
  std::vector<double> values;
};

struct QTable {
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> values;  // Q[x][u]

  QTable() = default;
  QTable(int states, int actions)
      : num_states(states),
        num_actions(actions),
        values(static_cast<std::size_t>(states) * actions, 0.0) {}

  double at(int x, int u) const { return values[static_cast<std::size_t>(x) * num_actions + u]; }
  double& at(int x, int u) { return values[static_cast<std::size_t>(x) * num_actions + u]; }
};

struct DeterministicPolicy {
  std::vector<int> action;  // one action index per state
};

struct RandomizedPolicy {
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> probs;  // phi[x][u]

  RandomizedPolicy() = default;
  RandomizedPolicy(int states, int actions)
      : num_states(states),
        num_actions(actions),
        probs(static_cast<std::size_t>(states) * actions, 0.0) {}

  double at(int x, int u) const { return probs[static_cast<std::size_t>(x) * num_actions + u]; }
  double& at(int x, int u) { return probs[static_cast<std::size_t>(x) * num_actions + u]; }

  void validate() const {
    if (num_states < 1 || num_actions < 1 ||
        probs.size() != static_cast<std::size_t>(num_states) * num_actions)
      throw std::invalid_argument("RandomizedPolicy: inconsistent dimensions");
    for (int x = 0; x < num_states; ++x) {
      double row_sum = 0.0;
      for (int u = 0; u < num_actions; ++u) {
        if (!(at(x, u) >= 0.0))
          throw std::invalid_argument("RandomizedPolicy: negative probability");
        row_sum += at(x, u);
      }
      if (std::abs(row_sum - 1.0) > kRowSumTol)
        throw std::invalid_argument("RandomizedPolicy: row does not sum to one");
    }
  }

  static RandomizedPolicy uniform(int states, int actions) {
    RandomizedPolicy phi(states, actions);
    const double w = 1.0 / actions;
    std::fill(phi.probs.begin(), phi.probs.end(), w);
    return phi;
  }

  static RandomizedPolicy from_deterministic(const DeterministicPolicy& pi, int num_actions) {
    RandomizedPolicy phi(static_cast<int>(pi.action.size()), num_actions);
    for (std::size_t x = 0; x < pi.action.size(); ++x) phi.at(static_cast<int>(x), pi.action[x]) = 1.0;
    return phi;
  }
};

// ---- dynamic-programming oracles ------------------------------------------

/// One application of the Bellman optimality operator F(V).
inline ValueFunction bellman_backup(const TabularMdp& m, const ValueFunction& v) {
  ValueFunction out;
  out.values.assign(m.num_states, 0.0);
  for (int x = 0; x < m.num_states; ++x) {
    double best = -std::numeric_limits<double>::infinity();
    for (int u = 0; u < m.num_actions; ++u) {
      double q = m.r(x, u);
      for (int y = 0; y < m.num_states; ++y) q += m.discount * m.p(x, u, y) * v.values[y];
      best = std::max(best, q);
    }
    out.values[x] = best;
  }
  return out;
}

inline double sup_norm_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

struct ValueIterationResult {
  ValueFunction value;
  int iterations_used = 0;
};

/// Fixed-point iteration of F to sup-norm residual <= tol. iterations_used ==
/// max_iters signals the cap was reached.
inline ValueIterationResult value_iteration(const TabularMdp& m, double tol, int max_iters) {
  m.validate();
  if (!(tol > 0.0)) throw std::invalid_argument("value_iteration: tol must be positive");
  if (max_iters < 1) throw std::invalid_argument("value_iteration: max_iters must be positive");
  ValueFunction v;
  v.values.assign(m.num_states, 0.0);
  for (int k = 1; k <= max_iters; ++k) {
    ValueFunction w = bellman_backup(m, v);
    const double res = sup_norm_diff(w.values, v.values);
    v = std::move(w);
    if (res <= tol) return {std::move(v), k};
  }
  return {std::move(v), max_iters};
}

/// Same fixed-point scheme on Q(x,u); the max sits inside the expectation.
inline QTable q_value_iteration(const TabularMdp& m, double tol, int max_iters) {
  m.validate();
  if (!(tol > 0.0)) throw std::invalid_argument("q_value_iteration: tol must be positive");
  if (max_iters < 1) throw std::invalid_argument("q_value_iteration: max_iters must be positive");
  QTable q(m.num_states, m.num_actions);
  std::vector<double> vmax(m.num_states, 0.0);
  for (int k = 1; k <= max_iters; ++k) {
    QTable next(m.num_states, m.num_actions);
    for (int x = 0; x < m.num_states; ++x) {
      double best = q.at(x, 0);
      for (int u = 1; u < m.num_actions; ++u) best = std::max(best, q.at(x, u));
      vmax[x] = best;
    }
    double res = 0.0;
    for (int x = 0; x < m.num_states; ++x) {
      for (int u = 0; u < m.num_actions; ++u) {
        double val = m.r(x, u);
        for (int y = 0; y < m.num_states; ++y) val += m.discount * m.p(x, u, y) * vmax[y];
        next.at(x, u) = val;
        res = std::max(res, std::abs(val - q.at(x, u)));
      }
    }
    q = std::move(next);
    if (res <= tol) break;
  }
  return q;
}

/// Greedy policy w.r.t. a value function; ties resolve to the lowest action index.
inline DeterministicPolicy greedy_policy(const TabularMdp& m, const ValueFunction& v) {
  DeterministicPolicy pi;
  pi.action.assign(m.num_states, 0);
  for (int x = 0; x < m.num_states; ++x) {
    double best = -std::numeric_limits<double>::infinity();
    int best_u = 0;
    for (int u = 0; u < m.num_actions; ++u) {
      double q = m.r(x, u);
      for (int y = 0; y < m.num_states; ++y) q += m.discount * m.p(x, u, y) * v.values[y];
      if (q > best) {
        best = q;
        best_u = u;
      }
    }
    pi.action[x] = best_u;
  }
  return pi;
}

inline DeterministicPolicy greedy_policy(const QTable& q) {
  DeterministicPolicy pi;
  pi.action.assign(q.num_states, 0);
  for (int x = 0; x < q.num_states; ++x) {
    double best = q.at(x, 0);
    int best_u = 0;
    for (int u = 1; u < q.num_actions; ++u) {
      if (q.at(x, u) > best) {
        best = q.at(x, u);
        best_u = u;
      }
    }
    pi.action[x] = best_u;
  }
  return pi;
}

namespace detail {

// Unique fixed point of the policy Bellman operator. Direct dense solve of
// (I - gamma * P_pi) V = r_pi up to kDirectSolveLimit states, fixed-point
// iteration to 1e-10 beyond that.
inline constexpr int kDirectSolveLimit = 1000;

inline ValueFunction policy_evaluation_impl(const TabularMdp& m, const RandomizedPolicy& phi) {
  const int s = m.num_states;
  Eigen::MatrixXd p_pi = Eigen::MatrixXd::Zero(s, s);
  Eigen::VectorXd r_pi = Eigen::VectorXd::Zero(s);
  for (int x = 0; x < s; ++x) {
    for (int u = 0; u < m.num_actions; ++u) {
      const double w = phi.at(x, u);
      if (w == 0.0) continue;
      r_pi[x] += w * m.r(x, u);
      for (int y = 0; y < s; ++y) p_pi(x, y) += w * m.p(x, u, y);
    }
  }
  ValueFunction out;
  out.values.assign(s, 0.0);
  if (s <= kDirectSolveLimit) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(s, s) - m.discount * p_pi;
    Eigen::VectorXd v = a.partialPivLu().solve(r_pi);
    for (int x = 0; x < s; ++x) out.values[x] = v[x];
    return out;
  }
  Eigen::VectorXd v = Eigen::VectorXd::Zero(s);
  for (;;) {
    Eigen::VectorXd next = r_pi + m.discount * (p_pi * v);
    const double res = (next - v).lpNorm<Eigen::Infinity>();
    v = std::move(next);
    if (res <= 1e-10) break;
  }
  for (int x = 0; x < s; ++x) out.values[x] = v[x];
  return out;
}

}  // namespace detail

inline ValueFunction policy_evaluation(const TabularMdp& m, const RandomizedPolicy& phi) {
  m.validate();
  phi.validate();
  if (phi.num_states != m.num_states || phi.num_actions != m.num_actions)
    throw std::invalid_argument("policy_evaluation: policy/MDP dimension mismatch");
  return detail::policy_evaluation_impl(m, phi);
}

inline ValueFunction policy_evaluation(const TabularMdp& m, const DeterministicPolicy& pi) {
  m.validate();
  if (static_cast<int>(pi.action.size()) != m.num_states)
    throw std::invalid_argument("policy_evaluation: policy/MDP dimension mismatch");
  for (int a : pi.action)
    if (a < 0 || a >= m.num_actions)
      throw std::invalid_argument("policy_evaluation: action index out of range");
  return detail::policy_evaluation_impl(m, RandomizedPolicy::from_deterministic(pi, m.num_actions));
}

struct PolicyIterationResult {
  DeterministicPolicy policy;
  ValueFunction value;
};

/// Howard policy iteration with exact evaluation; stops when one improvement
/// sweep leaves the policy unchanged.
inline PolicyIterationResult policy_iteration(const TabularMdp& m) {
  m.validate();
  ValueFunction zero;
  zero.values.assign(m.num_states, 0.0);
  DeterministicPolicy pi = greedy_policy(m, zero);
  const int cap = 100000;
  for (int sweep = 0; sweep < cap; ++sweep) {
    ValueFunction v = policy_evaluation(m, pi);
    DeterministicPolicy next = greedy_policy(m, v);
    if (next.action == pi.action) return {std::move(pi), std::move(v)};
    pi = std::move(next);
  }
  throw std::runtime_error("policy_iteration: failed to stabilize");
}

/// Stationary law mu(x,u) of the chain on state-action pairs induced by a
/// randomized policy. Damped power iteration (the half-step keeps periodic
/// chains from oscillating) to residual 1e-12.
inline std::vector<double> stationary_distribution(const TabularMdp& m, const RandomizedPolicy& phi) {
  m.validate();
  phi.validate();
  if (phi.num_states != m.num_states || phi.num_actions != m.num_actions)
    throw std::invalid_argument("stationary_distribution: policy/MDP dimension mismatch");
  const int s = m.num_states;
  const int a = m.num_actions;
  const std::size_t n = static_cast<std::size_t>(s) * a;
  std::vector<double> mu(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n, 0.0);
  const long max_iters = 1000000;
  double res = 0.0;
  for (long it = 0; it < max_iters; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int x = 0; x < s; ++x) {
      for (int u = 0; u < a; ++u) {
        const double mass = mu[static_cast<std::size_t>(x) * a + u];
        if (mass == 0.0) continue;
        for (int y = 0; y < s; ++y) {
          const double py = m.p(x, u, y);
          if (py == 0.0) continue;
          for (int v = 0; v < a; ++v)
            next[static_cast<std::size_t>(y) * a + v] += mass * py * phi.at(y, v);
        }
      }
    }
    res = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] = 0.5 * (next[i] + mu[i]);
      res = std::max(res, std::abs(next[i] - mu[i]));
      total += next[i];
    }
    for (std::size_t i = 0; i < n; ++i) next[i] /= total;
    mu.swap(next);
    if (res <= 1e-12) return mu;
  }
  throw std::runtime_error("stationary_distribution: no convergence, residual " + std::to_string(res));
}

}  // namespace fgdqn
