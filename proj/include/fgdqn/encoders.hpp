#pragma once

#include "fgdqn/envs.hpp"
#include "fgdqn/qnet.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <utility>

namespace fgdqn {

/// Discrete states: one-hot state concatenated with one-hot action, single
/// network output Q(x,u).
struct OneHotPairEncoder {
  using State = int;
  static constexpr bool per_action_outputs = false;

  int states = 0;
  int actions = 0;

  int num_actions() const { return actions; }
  int input_dim() const { return states + actions; }
  int output_dim() const { return 1; }

  void encode(int x, int u, Eigen::VectorXd& buf) const {
    buf.setZero(states + actions);
    buf[x] = 1.0;
    buf[states + u] = 1.0;
  }
};

/// Raw 4-vector state, one output head per action.
struct CartPoleEncoder {
  using State = CartPoleState;
  static constexpr bool per_action_outputs = true;

  int num_actions() const { return 2; }
  int input_dim() const { return 4; }
  int output_dim() const { return 2; }

  void encode(const CartPoleState& s, Eigen::VectorXd& buf) const {
    buf.resize(4);
    buf << s.cart_position, s.cart_velocity, s.pole_angle, s.angular_velocity;
  }
};

/// Plain vector state, one output head per action (test environments).
struct VectorStateEncoder {
  using State = Eigen::VectorXd;
  static constexpr bool per_action_outputs = true;

  int state_dim = 0;
  int actions = 0;

  int num_actions() const { return actions; }
  int input_dim() const { return state_dim; }
  int output_dim() const { return actions; }

  void encode(const Eigen::VectorXd& s, Eigen::VectorXd& buf) const { buf = s; }
};

/// A Q-network together with the encoding that realizes Q(x,u;theta) for a
/// concrete environment. Owns the network; target copies are plain copies.
template <class Encoder>
class QFunction {
 public:
  using State = typename Encoder::State;

  QFunction() = default;

  QFunction(QNetwork net, Encoder enc) : net_(std::move(net)), enc_(std::move(enc)) {
    if (net_.topology().input_dim != enc_.input_dim() ||
        net_.topology().output_dim != enc_.output_dim())
      throw std::invalid_argument("QFunction: network shape does not match encoder");
  }

  int num_actions() const { return enc_.num_actions(); }
  const Encoder& encoder() const { return enc_; }
  QNetwork& net() { return net_; }
  const QNetwork& net() const { return net_; }

  double value(const State& x, int u) const {
    if constexpr (Encoder::per_action_outputs) {
      enc_.encode(x, in_);
      net_.forward(in_, out_);
      return out_[u];
    } else {
      enc_.encode(x, u, in_);
      net_.forward(in_, out_);
      return out_[0];
    }
  }

  void qvalues(const State& x, Eigen::VectorXd& q) const {
    if constexpr (Encoder::per_action_outputs) {
      enc_.encode(x, in_);
      net_.forward(in_, q);
    } else {
      q.resize(enc_.num_actions());
      for (int u = 0; u < enc_.num_actions(); ++u) {
        enc_.encode(x, u, in_);
        net_.forward(in_, out_);
        q[u] = out_[0];
      }
    }
  }

  /// Maximizing action with ties broken toward the lowest index.
  ArgmaxResult argmax(const State& x) const {
    Eigen::VectorXd q;
    qvalues(x, q);
    return argmax_lowest_tie(q);
  }

  void grad(const State& x, int u, Eigen::VectorXd& g) const {
    if constexpr (Encoder::per_action_outputs) {
      enc_.encode(x, in_);
      net_.grad_params(in_, u, g);
    } else {
      enc_.encode(x, u, in_);
      net_.grad_params(in_, 0, g);
    }
  }

  /// Writes the encoding of (x,u) into a column of a batch matrix and returns
  /// the output index the pair maps to.
  int encode_into_column(const State& x, int u, Eigen::MatrixXd& cols, int col) const {
    if constexpr (Encoder::per_action_outputs) {
      enc_.encode(x, in_);
      cols.col(col) = in_;
      return u;
    } else {
      enc_.encode(x, u, in_);
      cols.col(col) = in_;
      return 0;
    }
  }

  QNetwork::BatchWorkspace& batch_workspace() const { return batch_ws_; }

 private:
  QNetwork net_;
  Encoder enc_;
  mutable Eigen::VectorXd in_, out_;
  mutable QNetwork::BatchWorkspace batch_ws_;
};

}  // namespace fgdqn
