#pragma once

#include "fgdqn/encoders.hpp"
#include "fgdqn/mdp.hpp"
#include "fgdqn/replay.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <unordered_map>
#include <vector>

namespace fgdqn {

enum class RunKind { off_policy, on_policy };

/// Everything a single training run records. Iteration-grain series may be
/// empty when a quantity is not defined for the environment (e.g. no exact
/// Bellman error without a tabular model).
struct RunMetrics {
  RunKind kind = RunKind::off_policy;
  std::uint64_t seed = 0;
  std::string config_hash;
  bool diverged = false;

  // per iteration
  std::vector<double> dqn_bellman_error;
  std::vector<double> true_bellman_error;
  std::vector<double> hamming_distance;

  // per episode
  std::vector<double> episode_reward;
  std::vector<double> episode_length;
  std::vector<double> episode_discounted_reward;
  std::vector<double> episode_mean_bellman_error;
};

// ---- Bellman errors ---------------------------------------------------------

/// Empirical mean of (Z - Q(X,U))^2 over a batch with Z = r + gamma max Q(X')
/// (Z = r on terminal transitions); all values from the given network.
template <class Encoder>
double dqn_bellman_error(const QFunction<Encoder>& qf,
                         const std::vector<Transition<typename Encoder::State>>& batch,
                         double gamma) {
  if (batch.empty()) throw std::invalid_argument("dqn_bellman_error: empty batch");
  using State = typename Encoder::State;
  double sum = 0.0;
  if constexpr (std::is_integral_v<State>) {
    std::unordered_map<long long, double> max_memo;
    for (const auto& t : batch) {
      double z = t.reward;
      if (!t.terminal) {
        auto it = max_memo.find(t.next_state);
        if (it == max_memo.end()) it = max_memo.emplace(t.next_state, qf.argmax(t.next_state).value).first;
        z += gamma * it->second;
      }
      const double d = z - qf.value(t.state, t.action);
      sum += d * d;
    }
  } else {
    for (const auto& t : batch) {
      double z = t.reward;
      if (!t.terminal) z += gamma * qf.argmax(t.next_state).value;
      const double d = z - qf.value(t.state, t.action);
      sum += d * d;
    }
  }
  return sum / static_cast<double>(batch.size());
}

inline double dqn_bellman_error(const QTable& q, const std::vector<Transition<int>>& batch,
                                double gamma) {
  if (batch.empty()) throw std::invalid_argument("dqn_bellman_error: empty batch");
  double sum = 0.0;
  for (const auto& t : batch) {
    double z = t.reward;
    if (!t.terminal) {
      double best = q.at(t.next_state, 0);
      for (int u = 1; u < q.num_actions; ++u) best = std::max(best, q.at(t.next_state, u));
      z += gamma * best;
    }
    const double d = z - q.at(t.state, t.action);
    sum += d * d;
  }
  return sum / static_cast<double>(batch.size());
}

inline std::vector<double> uniform_state_action_weights(const TabularMdp& m) {
  const std::size_t n = static_cast<std::size_t>(m.num_states) * m.num_actions;
  return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

/// Exact weighted Bellman residual: the conditional expectation over next
/// states sits inside the square.
inline double true_bellman_error(const QTable& q, const TabularMdp& m,
                                 const std::vector<double>& mu) {
  if (q.num_states != m.num_states || q.num_actions != m.num_actions)
    throw std::invalid_argument("true_bellman_error: table/MDP dimension mismatch");
  if (mu.size() != static_cast<std::size_t>(m.num_states) * m.num_actions)
    throw std::invalid_argument("true_bellman_error: weight vector has wrong length");
  double total_mass = 0.0;
  for (double w : mu) {
    if (!(w >= 0.0)) throw std::invalid_argument("true_bellman_error: weights must be non-negative");
    total_mass += w;
  }
  if (std::abs(total_mass - 1.0) > 1e-9)
    throw std::invalid_argument("true_bellman_error: weights must sum to one");

  std::vector<double> vmax(m.num_states);
  for (int y = 0; y < m.num_states; ++y) {
    double best = q.at(y, 0);
    for (int u = 1; u < m.num_actions; ++u) best = std::max(best, q.at(y, u));
    vmax[y] = best;
  }
  double err = 0.0;
  for (int x = 0; x < m.num_states; ++x) {
    for (int u = 0; u < m.num_actions; ++u) {
      double resid = m.r(x, u) - q.at(x, u);
      for (int y = 0; y < m.num_states; ++y) resid += m.discount * m.p(x, u, y) * vmax[y];
      err += mu[static_cast<std::size_t>(x) * m.num_actions + u] * resid * resid;
    }
  }
  return err;
}

/// Network evaluated at every (x,u) of a tabular model.
template <class Encoder>
QTable q_table_of(const QFunction<Encoder>& qf, int num_states) {
  static_assert(std::is_integral_v<typename Encoder::State>,
                "q_table_of requires a discrete-state encoder");
  QTable q(num_states, qf.num_actions());
  Eigen::VectorXd row;
  for (int x = 0; x < num_states; ++x) {
    qf.qvalues(x, row);
    for (int u = 0; u < qf.num_actions(); ++u) q.at(x, u) = row[u];
  }
  return q;
}

template <class Encoder>
double true_bellman_error(const QFunction<Encoder>& qf, const TabularMdp& m,
                          const std::vector<double>& mu) {
  return true_bellman_error(q_table_of(qf, m.num_states), m, mu);
}

// ---- policy comparison --------------------------------------------------------

/// Number of states where the two policies pick different actions.
inline int hamming_distance(const DeterministicPolicy& a, const DeterministicPolicy& b) {
  if (a.action.size() != b.action.size())
    throw std::invalid_argument("hamming_distance: policies have different lengths");
  int d = 0;
  for (std::size_t i = 0; i < a.action.size(); ++i) d += (a.action[i] != b.action[i]) ? 1 : 0;
  return d;
}

template <class Encoder>
DeterministicPolicy greedy_policy_of_net(const QFunction<Encoder>& qf, int num_states) {
  static_assert(std::is_integral_v<typename Encoder::State>,
                "greedy_policy_of_net requires a discrete-state encoder");
  DeterministicPolicy pi;
  pi.action.assign(num_states, 0);
  for (int x = 0; x < num_states; ++x) pi.action[x] = qf.argmax(x).index;
  return pi;
}

// ---- series utilities -----------------------------------------------------------

/// Trailing mean over min(window, i+1) entries; the warm-up prefix averages
/// what is available.
inline std::vector<double> moving_average(const std::vector<double>& series, int window) {
  if (window < 1) throw std::invalid_argument("moving_average: window must be >= 1");
  std::vector<double> out(series.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    sum += series[i];
    if (i >= static_cast<std::size_t>(window)) sum -= series[i - window];
    const std::size_t n = std::min<std::size_t>(window, i + 1);
    out[i] = sum / static_cast<double>(n);
  }
  return out;
}

/// Cumulative prefix mean (the running average used for loss curves).
inline std::vector<double> running_mean(const std::vector<double>& series) {
  std::vector<double> out(series.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    sum += series[i];
    out[i] = sum / static_cast<double>(i + 1);
  }
  return out;
}

/// Every stride-th entry, starting with the first.
inline std::vector<double> hamming_subsample(const std::vector<double>& series, int stride) {
  if (stride < 1) throw std::invalid_argument("hamming_subsample: stride must be >= 1");
  std::vector<double> out;
  out.reserve((series.size() + stride - 1) / stride);
  for (std::size_t i = 0; i < series.size(); i += stride) out.push_back(series[i]);
  return out;
}

struct AggregateStats {
  int num_runs = 0;
  std::vector<double> mean;
  std::vector<double> stddev;    // sample standard deviation
  std::vector<double> ci_half;   // 1.96 * sd / sqrt(num_runs)
};

/// Pointwise mean / sd / normal-approximation 95% CI across runs; series are
/// truncated to the shortest run.
inline AggregateStats aggregate_runs(const std::vector<std::vector<double>>& series_per_run) {
  if (series_per_run.size() < 2)
    throw std::invalid_argument("aggregate_runs: need at least two runs");
  std::size_t len = series_per_run.front().size();
  for (const auto& s : series_per_run) len = std::min(len, s.size());
  AggregateStats out;
  out.num_runs = static_cast<int>(series_per_run.size());
  out.mean.resize(len);
  out.stddev.resize(len);
  out.ci_half.resize(len);
  const double n = static_cast<double>(out.num_runs);
  for (std::size_t i = 0; i < len; ++i) {
    double sum = 0.0;
    for (const auto& s : series_per_run) sum += s[i];
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& s : series_per_run) ss += (s[i] - mean) * (s[i] - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    out.mean[i] = mean;
    out.stddev[i] = sd;
    out.ci_half[i] = 1.96 * sd / std::sqrt(n);
  }
  return out;
}

}  // namespace fgdqn
