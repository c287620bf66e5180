#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fgdqn {

enum class Activation { relu, gelu, sigmoid };

inline std::string to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::gelu: return "gelu";
    case Activation::sigmoid: return "sigmoid";
  }
  return "relu";
}

inline Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "gelu") return Activation::gelu;
  if (s == "sigmoid") return Activation::sigmoid;
  throw std::invalid_argument("unknown activation: " + s);
}

namespace detail {

inline double activate(Activation a, double z) {
  switch (a) {
    case Activation::relu: return z > 0.0 ? z : 0.0;
    case Activation::gelu: return 0.5 * z * std::erfc(-z * M_SQRT1_2);
    case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-z));
  }
  return z;
}

// Derivative at z. The ReLU kink at 0 takes the subgradient selection 0.
inline double activate_deriv(Activation a, double z) {
  switch (a) {
    case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::gelu: {
      const double cdf = 0.5 * std::erfc(-z * M_SQRT1_2);
      const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
      return cdf + z * pdf;
    }
    case Activation::sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-z));
      return s * (1.0 - s);
    }
  }
  return 1.0;
}

}  // namespace detail

struct MlpTopology {
  int input_dim = 0;
  std::vector<int> hidden_dims;
  int output_dim = 1;
  Activation activation = Activation::relu;
  bool with_bias = true;
  // > 0 squashes the output through scale * sigmoid(z), bounding |Q| by scale.
  double output_squash_scale = 0.0;

  void validate() const {
    if (input_dim < 1 || output_dim < 1)
      throw std::invalid_argument("MlpTopology: input/output dims must be positive");
    for (int h : hidden_dims)
      if (h < 1) throw std::invalid_argument("MlpTopology: hidden dims must be positive");
    if (output_squash_scale < 0.0)
      throw std::invalid_argument("MlpTopology: output_squash_scale must be non-negative");
  }

  std::vector<int> layer_dims() const {
    std::vector<int> dims;
    dims.reserve(hidden_dims.size() + 2);
    dims.push_back(input_dim);
    for (int h : hidden_dims) dims.push_back(h);
    dims.push_back(output_dim);
    return dims;
  }

  long param_count() const {
    const auto dims = layer_dims();
    long n = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l)
      n += static_cast<long>(dims[l + 1]) * dims[l] + (with_bias ? dims[l + 1] : 0);
    return n;
  }

  bool operator==(const MlpTopology&) const = default;
};

/// Feed-forward Q-network over a flat parameter vector. Forward/backward
/// passes are exact; a batched weighted-gradient path serves the training
/// loops, the per-sample path serves probes and tests.
class QNetwork {
 public:
  struct LayerLayout {
    int in = 0;
    int out = 0;
    long w_offset = 0;   // row-major (out x in) block
    long b_offset = -1;  // -1 when the layer has no bias
  };

  QNetwork() = default;

  explicit QNetwork(MlpTopology topo) : topo_(std::move(topo)) {
    topo_.validate();
    const auto dims = topo_.layer_dims();
    long offset = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      LayerLayout lay;
      lay.in = dims[l];
      lay.out = dims[l + 1];
      lay.w_offset = offset;
      offset += static_cast<long>(lay.out) * lay.in;
      if (topo_.with_bias) {
        lay.b_offset = offset;
        offset += lay.out;
      }
      layout_.push_back(lay);
    }
    params_ = Eigen::VectorXd::Zero(offset);
  }

  const MlpTopology& topology() const { return topo_; }
  const std::vector<LayerLayout>& layout() const { return layout_; }
  long param_count() const { return params_.size(); }
  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

  using WeightMap =
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

  WeightMap weights(int layer) const {
    const LayerLayout& l = layout_[layer];
    return WeightMap(params_.data() + l.w_offset, l.out, l.in);
  }

  // ---- single-sample paths --------------------------------------------------

  void forward(const Eigen::Ref<const Eigen::VectorXd>& input, Eigen::VectorXd& out) const {
    check_input(input.size());
    ensure_single_ws();
    ws_.a[0] = input;
    run_forward(ws_);
    out = ws_.a.back();
  }

  Eigen::VectorXd forward(const Eigen::Ref<const Eigen::VectorXd>& input) const {
    Eigen::VectorXd out;
    forward(input, out);
    return out;
  }

  /// Exact reverse-mode gradient of output[output_index] w.r.t. the flat
  /// parameter vector.
  void grad_params(const Eigen::Ref<const Eigen::VectorXd>& input, int output_index,
                   Eigen::VectorXd& grad) const {
    check_input(input.size());
    if (output_index < 0 || output_index >= topo_.output_dim)
      throw std::invalid_argument("QNetwork: output index out of range");
    ensure_single_ws();
    ws_.a[0] = input;
    run_forward(ws_);
    grad.setZero(params_.size());

    const int last = static_cast<int>(layout_.size()) - 1;
    // Seed: d out[j] / d z_last.
    double seed = 1.0;
    if (topo_.output_squash_scale > 0.0) {
      const double s = 1.0 / (1.0 + std::exp(-ws_.z[last][output_index]));
      seed = topo_.output_squash_scale * s * (1.0 - s);
    }

    Eigen::VectorXd delta;  // gradient w.r.t. z of the current layer
    for (int l = last; l >= 0; --l) {
      const LayerLayout& lay = layout_[l];
      if (l == last) {
        // One-hot seed: only row `output_index` of the last weight block is hit.
        auto w_grad = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            grad.data() + lay.w_offset, lay.out, lay.in);
        w_grad.row(output_index) = seed * ws_.a[l].transpose();
        if (lay.b_offset >= 0) grad[lay.b_offset + output_index] = seed;
        if (l > 0) {
          delta = seed * weights(l).row(output_index).transpose();
          for (int i = 0; i < lay.in; ++i)
            delta[i] *= detail::activate_deriv(topo_.activation, ws_.z[l - 1][i]);
        }
      } else {
        auto w_grad = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            grad.data() + lay.w_offset, lay.out, lay.in);
        w_grad = delta * ws_.a[l].transpose();
        if (lay.b_offset >= 0) grad.segment(lay.b_offset, lay.out) = delta;
        if (l > 0) {
          Eigen::VectorXd prev = weights(l).transpose() * delta;
          for (int i = 0; i < lay.in; ++i)
            prev[i] *= detail::activate_deriv(topo_.activation, ws_.z[l - 1][i]);
          delta = std::move(prev);
        }
      }
    }
  }

  Eigen::VectorXd grad_params(const Eigen::Ref<const Eigen::VectorXd>& input, int output_index) const {
    Eigen::VectorXd g;
    grad_params(input, output_index, g);
    return g;
  }

  // ---- batched paths ----------------------------------------------------------

  /// Column-per-sample activations cached between a forward_batch and the
  /// matching backward_weighted call.
  struct BatchWorkspace {
    std::vector<Eigen::MatrixXd> a;  // a[0] = inputs, a[L] = outputs (pre-squash applied)
    std::vector<Eigen::MatrixXd> z;
    Eigen::MatrixXd delta, delta_prev;
  };

  void forward_batch(const Eigen::Ref<const Eigen::MatrixXd>& inputs, BatchWorkspace& ws) const {
    check_input(inputs.rows());
    const std::size_t layers = layout_.size();
    ws.a.resize(layers + 1);
    ws.z.resize(layers);
    ws.a[0] = inputs;
    for (std::size_t l = 0; l < layers; ++l) {
      const LayerLayout& lay = layout_[l];
      ws.z[l].noalias() = weights(static_cast<int>(l)) * ws.a[l];
      if (lay.b_offset >= 0) ws.z[l].colwise() += params_.segment(lay.b_offset, lay.out);
      ws.a[l + 1] = ws.z[l];
      if (l + 1 < layers) {
        apply_activation(ws.a[l + 1]);
      } else if (topo_.output_squash_scale > 0.0) {
        ws.a[l + 1] = topo_.output_squash_scale *
                      (1.0 + (-ws.a[l + 1].array()).exp()).inverse().matrix();
      }
    }
  }

  const Eigen::MatrixXd& batch_outputs(const BatchWorkspace& ws) const { return ws.a.back(); }

  /// grad = sum_k coeffs[k] * d output(col k)[out_indices[k]] / d theta,
  /// using the activations cached by the preceding forward_batch.
  void backward_weighted(BatchWorkspace& ws, const std::vector<int>& out_indices,
                         const Eigen::Ref<const Eigen::VectorXd>& coeffs,
                         Eigen::VectorXd& grad) const {
    const int cols = static_cast<int>(ws.a[0].cols());
    if (static_cast<int>(out_indices.size()) != cols || coeffs.size() != cols)
      throw std::invalid_argument("QNetwork: per-column index/coefficient size mismatch");
    grad.setZero(params_.size());
    const int last = static_cast<int>(layout_.size()) - 1;

    ws.delta.setZero(layout_[last].out, cols);
    for (int k = 0; k < cols; ++k) {
      double seed = coeffs[k];
      if (topo_.output_squash_scale > 0.0) {
        const double s = 1.0 / (1.0 + std::exp(-ws.z[last](out_indices[k], k)));
        seed *= topo_.output_squash_scale * s * (1.0 - s);
      }
      ws.delta(out_indices[k], k) = seed;
    }

    for (int l = last; l >= 0; --l) {
      const LayerLayout& lay = layout_[l];
      auto w_grad = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          grad.data() + lay.w_offset, lay.out, lay.in);
      w_grad.noalias() = ws.delta * ws.a[l].transpose();
      if (lay.b_offset >= 0) grad.segment(lay.b_offset, lay.out) = ws.delta.rowwise().sum();
      if (l > 0) {
        ws.delta_prev.noalias() = weights(l).transpose() * ws.delta;
        const Eigen::MatrixXd& zprev = ws.z[l - 1];
        for (int c = 0; c < cols; ++c)
          for (int i = 0; i < lay.in; ++i)
            ws.delta_prev(i, c) *= detail::activate_deriv(topo_.activation, zprev(i, c));
        ws.delta.swap(ws.delta_prev);
      }
    }
  }

 private:
  struct SingleWorkspace {
    std::vector<Eigen::VectorXd> a;
    std::vector<Eigen::VectorXd> z;
  };

  void check_input(Eigen::Index n) const {
    if (static_cast<int>(n) != topo_.input_dim)
      throw std::invalid_argument("QNetwork: input has dimension " + std::to_string(n) +
                                  ", expected " + std::to_string(topo_.input_dim));
  }

  void ensure_single_ws() const {
    if (ws_.a.size() == layout_.size() + 1) return;
    ws_.a.resize(layout_.size() + 1);
    ws_.z.resize(layout_.size());
  }

  void run_forward(SingleWorkspace& ws) const {
    const std::size_t layers = layout_.size();
    for (std::size_t l = 0; l < layers; ++l) {
      const LayerLayout& lay = layout_[l];
      ws.z[l].noalias() = weights(static_cast<int>(l)) * ws.a[l];
      if (lay.b_offset >= 0) ws.z[l] += params_.segment(lay.b_offset, lay.out);
      ws.a[l + 1] = ws.z[l];
      if (l + 1 < layers) {
        for (int i = 0; i < lay.out; ++i)
          ws.a[l + 1][i] = detail::activate(topo_.activation, ws.a[l + 1][i]);
      } else if (topo_.output_squash_scale > 0.0) {
        for (int i = 0; i < lay.out; ++i)
          ws.a[l + 1][i] = topo_.output_squash_scale / (1.0 + std::exp(-ws.a[l + 1][i]));
      }
    }
  }

  void apply_activation(Eigen::MatrixXd& m) const {
    switch (topo_.activation) {
      case Activation::relu:
        m = m.array().max(0.0).matrix();
        break;
      case Activation::gelu:
        for (Eigen::Index j = 0; j < m.cols(); ++j)
          for (Eigen::Index i = 0; i < m.rows(); ++i)
            m(i, j) = detail::activate(Activation::gelu, m(i, j));
        break;
      case Activation::sigmoid:
        m = (1.0 + (-m.array()).exp()).inverse().matrix();
        break;
    }
  }

  MlpTopology topo_;
  std::vector<LayerLayout> layout_;
  Eigen::VectorXd params_;
  mutable SingleWorkspace ws_;
};

enum class InitScheme { uniform_fan_in };

/// Weights uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)], biases zero.
/// Draw order is layer by layer, row-major, so a fixed seed pins theta.
template <class Rng>
QNetwork init_params(const MlpTopology& topo, Rng& rng, InitScheme scheme = InitScheme::uniform_fan_in) {
  (void)scheme;
  QNetwork net(topo);
  Eigen::VectorXd& theta = net.params();
  for (std::size_t l = 0; l < net.layout().size(); ++l) {
    const QNetwork::LayerLayout& lay = net.layout()[l];
    const double bound = 1.0 / std::sqrt(static_cast<double>(lay.in));
    std::uniform_real_distribution<double> unif(-bound, bound);
    for (long i = 0; i < static_cast<long>(lay.out) * lay.in; ++i) theta[lay.w_offset + i] = unif(rng);
    // biases stay zero
  }
  return net;
}

struct ArgmaxResult {
  int index = 0;
  double value = 0.0;
};

/// First strictly-greater scan: ties resolve to the lowest index.
template <class Derived>
ArgmaxResult argmax_lowest_tie(const Eigen::MatrixBase<Derived>& q) {
  if (q.size() == 0) throw std::invalid_argument("argmax over empty vector");
  ArgmaxResult best{0, q[0]};
  for (Eigen::Index i = 1; i < q.size(); ++i) {
    if (q[i] > best.value) {
      best.index = static_cast<int>(i);
      best.value = q[i];
    }
  }
  return best;
}

}  // namespace fgdqn
