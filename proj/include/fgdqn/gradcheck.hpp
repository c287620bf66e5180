#pragma once

#include "fgdqn/encoders.hpp"
#include "fgdqn/qnet.hpp"
#include "fgdqn/replay.hpp"
#include "fgdqn/trainers.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace fgdqn {

/// Central finite differences of a scalar function of theta, wiggling the
/// vector in place and restoring it. `value` must read theta through the
/// reference it closed over.
template <class ValueFn>
Eigen::VectorXd finite_difference_grad(Eigen::VectorXd& theta, ValueFn&& value, double h = 1e-5) {
  Eigen::VectorXd g(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double orig = theta[i];
    theta[i] = orig + h;
    const double fp = value();
    theta[i] = orig - h;
    const double fm = value();
    theta[i] = orig;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

/// |a-b| / max(|a|, |b|, floor); the floor keeps near-zero coordinates from
/// dominating with pure roundoff.
inline double relative_error(double a, double b, double floor = 1e-3) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline double max_relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                 double floor = 1e-3, Eigen::Index* arg = nullptr) {
  double worst = 0.0;
  Eigen::Index worst_i = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double e = relative_error(a[i], b[i], floor);
    if (e > worst) {
      worst = e;
      worst_i = i;
    }
  }
  if (arg) *arg = worst_i;
  return worst;
}

struct GradCheckReport {
  struct LayerWorst {
    int layer = 0;
    long flat_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    double rel_error = 0.0;
  };
  double max_rel_error_network = 0.0;         // grad_params vs finite differences
  double max_rel_error_full_gradient = 0.0;   // update direction vs d(0.5*delta^2)/dtheta
  std::vector<LayerWorst> per_layer;          // network suite, worst coordinate per layer
  int probes = 0;

  bool passed(double network_tol = 1e-5, double full_gradient_tol = 1e-4) const {
    return max_rel_error_network < network_tol && max_rel_error_full_gradient < full_gradient_tol;
  }
};

namespace detail {

inline int layer_of_flat_index(const QNetwork& net, long flat) {
  const auto& layout = net.layout();
  for (int l = static_cast<int>(layout.size()) - 1; l >= 0; --l)
    if (flat >= layout[l].w_offset) return l;
  return 0;
}

}  // namespace detail

/// Finite-difference validation of (a) the network parameter gradients on
/// smooth activations and (b) the per-sample full-gradient update direction
/// against the instantaneous squared TD error. Random nets and transitions;
/// probes with a near-tied argmax are re-drawn since the max is not
/// differentiable there.
inline GradCheckReport run_gradcheck(int probes, std::uint64_t seed, double fd_step = 1e-5) {
  GradCheckReport report;
  report.probes = probes;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  // (a) network gradients
  for (int p = 0; p < probes; ++p) {
    MlpTopology topo;
    topo.input_dim = 3 + static_cast<int>(rng() % 4);
    topo.hidden_dims = {4 + static_cast<int>(rng() % 5), 3 + static_cast<int>(rng() % 4)};
    topo.output_dim = 1 + static_cast<int>(rng() % 3);
    topo.activation = (p % 2 == 0) ? Activation::sigmoid : Activation::gelu;
    QNetwork net = init_params(topo, rng);
    Eigen::VectorXd input(topo.input_dim);
    for (int i = 0; i < topo.input_dim; ++i) input[i] = unif(rng);
    const int out_idx = static_cast<int>(rng() % topo.output_dim);

    Eigen::VectorXd analytic = net.grad_params(input, out_idx);
    Eigen::VectorXd numeric = finite_difference_grad(
        net.params(), [&] { return net.forward(input)[out_idx]; }, fd_step);

    if (report.per_layer.empty()) report.per_layer.resize(net.layout().size());
    bool widest_net = report.per_layer.size() == net.layout().size();
    for (Eigen::Index i = 0; i < analytic.size(); ++i) {
      const double e = relative_error(analytic[i], numeric[i]);
      report.max_rel_error_network = std::max(report.max_rel_error_network, e);
      if (widest_net) {
        const int layer = detail::layer_of_flat_index(net, i);
        if (e >= report.per_layer[layer].rel_error)
          report.per_layer[layer] = {layer, i, analytic[i], numeric[i], e};
      }
    }
  }

  // (b) full-gradient update direction
  const int num_states = 5;
  const int num_actions = 3;
  OneHotPairEncoder enc{num_states, num_actions};
  for (int p = 0; p < probes; ++p) {
    MlpTopology topo;
    topo.input_dim = enc.input_dim();
    topo.hidden_dims = {8};
    topo.output_dim = 1;
    topo.activation = (p % 2 == 0) ? Activation::sigmoid : Activation::gelu;
    QFunction<OneHotPairEncoder> qf(init_params(topo, rng), enc);
    // widen initial weights so argmax gaps are comfortably away from ties
    qf.net().params() *= 3.0;

    const double gamma = 0.9;
    Transition<int> t;
    t.state = static_cast<int>(rng() % num_states);
    t.action = static_cast<int>(rng() % num_actions);
    t.reward = unif(rng);
    t.next_state = static_cast<int>(rng() % num_states);
    t.terminal = false;

    Eigen::VectorXd q;
    qf.qvalues(t.next_state, q);
    std::sort(q.data(), q.data() + q.size());
    if (q.size() >= 2 && q[q.size() - 1] - q[q.size() - 2] < 1e-3) {
      --p;  // re-draw near a tie
      continue;
    }

    const TdTerms terms =
        compute_td_terms<OneHotPairEncoder>(qf, nullptr, t, TdMode::fgdqn, gamma);
    const Eigen::VectorXd analytic = terms.delta * (terms.grad_target - terms.grad_current);
    Eigen::VectorXd numeric = finite_difference_grad(
        qf.net().params(),
        [&] {
          const double delta =
              t.reward + gamma * qf.argmax(t.next_state).value - qf.value(t.state, t.action);
          return 0.5 * delta * delta;
        },
        fd_step);
    report.max_rel_error_full_gradient =
        std::max(report.max_rel_error_full_gradient, max_relative_error(analytic, numeric));
  }

  return report;
}

}  // namespace fgdqn
