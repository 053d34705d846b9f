#pragma once

// The discrete hierarchical DNN: states live on the quotient groups, layer l
// holds p^l neurons, and a state moves from level l-1 to level l by the copy
// (lift) operator followed by an affine map and a bounded activation.
//
//   Z[l] = W[l] * lift(X[l-1]) + theta[l],   X[l] = sigma_M(Z[l])
//
// Dense layers store the full p^l x p^l matrix (row-major by rank);
// convolutional layers store a kernel over G_l and weight entry w(j - k)
// with the group subtraction of the ambient characteristic.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "padnn/field.hpp"
#include "padnn/rng.hpp"
#include "padnn/test_function.hpp"

namespace padnn {

enum class ActivationKind { ScaledTanh };

// sigma_M(u) = M tanh(u): odd, strictly increasing, range (-M, M), with the
// closed-form inverse required by the constructive approximation.
struct Activation {
  ActivationKind kind = ActivationKind::ScaledTanh;
  double M = 1.0;

  explicit Activation(double bound) : M(bound) {
    if (!(bound > 0.0)) throw std::invalid_argument("Activation: M must be > 0");
  }

  double apply(double u) const { return M * std::tanh(u); }

  double derivative(double u) const {
    const double t = std::tanh(u);
    return M * (1.0 - t * t);
  }

  // Defined for |y| < M.
  double inverse(double y) const {
    if (!(std::fabs(y) < M))
      throw std::invalid_argument("Activation: inverse requires |y| < M");
    return std::atanh(y / M);
  }

  bool operator==(const Activation&) const = default;
};

enum class LayerKind { Dense, Conv };

struct Layer {
  uint32_t level = 0;
  LayerKind kind = LayerKind::Dense;
  std::vector<double> weights;  // dense: p^l x p^l row-major; conv: kernel of length p^l
  std::vector<double> bias;     // length p^l
};

inline void validate_layer(const FieldConfig& cfg, const Layer& layer) {
  const uint64_t n = group_order(cfg, layer.level);
  const uint64_t expected = layer.kind == LayerKind::Dense ? n * n : n;
  if (layer.weights.size() != expected)
    throw std::invalid_argument("Layer: weight count does not match p^level");
  if (layer.bias.size() != n)
    throw std::invalid_argument("Layer: bias count does not match p^level");
  for (double w : layer.weights)
    if (!std::isfinite(w)) throw std::invalid_argument("Layer: non-finite weight");
  for (double b : layer.bias)
    if (!std::isfinite(b)) throw std::invalid_argument("Layer: non-finite bias");
}

// A network mapping D^L to D^{L+delta}; layers sit at levels L+1, ..., L+delta.
struct Network {
  FieldConfig cfg;
  uint32_t input_level;  // L
  uint32_t depth;        // delta
  Activation activation;
  std::vector<Layer> layers;

  Network(FieldConfig c, uint32_t L, uint32_t delta, Activation act, std::vector<Layer> ls)
      : cfg(c), input_level(L), depth(delta), activation(act), layers(std::move(ls)) {
    if (L < 1) throw std::invalid_argument("Network: input level must be >= 1");
    if (depth < 1) throw std::invalid_argument("Network: depth must be >= 1");
    if (layers.size() != depth)
      throw std::invalid_argument("Network: expected one layer per level L+1..L+delta");
    for (uint32_t i = 0; i < depth; ++i) {
      if (layers[i].level != input_level + 1 + i)
        throw std::invalid_argument("Network: layer levels must be consecutive from L+1");
      validate_layer(cfg, layers[i]);
    }
  }

  uint32_t output_level() const { return input_level + depth; }
};

// Copy a level-(l-1) state to level l: out[rank k] = in[rank Λ(k)], which in
// rank order is p-fold tiling.
inline std::vector<double> lift_state(const FieldConfig& cfg, const std::vector<double>& x) {
  const size_t n = x.size();
  std::vector<double> out(n * cfg.p);
  for (size_t r = 0; r < out.size(); ++r) out[r] = x[r % n];
  return out;
}

inline std::vector<double> lift_state(const FieldConfig& cfg, const std::vector<double>& x,
                                      uint32_t target_level) {
  if (target_level < 1 || x.size() != group_order(cfg, target_level - 1))
    throw std::invalid_argument("lift_state: state length != p^(target_level-1)");
  return lift_state(cfg, x);
}

// Everything backprop needs: the weighted inputs Z[l] and states X[l] per
// layer, plus the lifted input fed to each layer.
struct ForwardTrace {
  std::vector<double> input;                  // X[L]
  std::vector<std::vector<double>> lifted;    // lift(X[l-1]) per layer
  std::vector<std::vector<double>> weighted;  // Z[l] per layer
  std::vector<std::vector<double>> states;    // X[l] per layer
};

struct ForwardResult {
  TestFunction output;
  ForwardTrace trace;
};

namespace detail {

inline std::vector<double> layer_affine(const FieldConfig& cfg, const Layer& layer,
                                        const std::vector<double>& lifted) {
  const uint64_t n = group_order(cfg, layer.level);
  std::vector<double> z(n);
  if (layer.kind == LayerKind::Dense) {
    for (uint64_t j = 0; j < n; ++j) {
      const double* row = layer.weights.data() + j * n;
      double acc = 0.0;
      for (uint64_t k = 0; k < n; ++k) acc += row[k] * lifted[k];
      z[j] = acc + layer.bias[j];
    }
  } else {
    for (uint64_t j = 0; j < n; ++j) {
      const TreeIndex ji = index_from_rank(cfg, layer.level, j);
      double acc = 0.0;
      for (uint64_t k = 0; k < n; ++k) {
        const TreeIndex ki = index_from_rank(cfg, layer.level, k);
        acc += lifted[k] * layer.weights[rank(cfg, sub(cfg, ji, ki))];
      }
      z[j] = acc + layer.bias[j];
    }
  }
  return z;
}

}  // namespace detail

inline ForwardResult forward(const Network& net, const TestFunction& input) {
  if (!(input.cfg == net.cfg)) throw std::invalid_argument("forward: mismatched field configs");
  if (input.level != net.input_level)
    throw std::invalid_argument("forward: input level must equal the network's L");

  ForwardTrace trace;
  trace.input = input.coeffs;
  std::vector<double> state = input.coeffs;
  for (const Layer& layer : net.layers) {
    std::vector<double> lifted = lift_state(net.cfg, state);
    std::vector<double> z = detail::layer_affine(net.cfg, layer, lifted);
    std::vector<double> x(z.size());
    for (size_t i = 0; i < z.size(); ++i) {
      if (!std::isfinite(z[i]))
        throw std::runtime_error("forward: non-finite weighted input at layer level " +
                                 std::to_string(layer.level));
      x[i] = net.activation.apply(z[i]);
    }
    trace.lifted.push_back(std::move(lifted));
    trace.weighted.push_back(std::move(z));
    trace.states.push_back(x);
    state = std::move(x);
  }
  return ForwardResult{TestFunction(net.cfg, net.output_level(), std::move(state)),
                       std::move(trace)};
}

// Expand a convolutional layer into the dense matrix with entry kernel(j - k).
inline Layer conv_to_dense(const FieldConfig& cfg, const Layer& layer) {
  if (layer.kind != LayerKind::Conv)
    throw std::invalid_argument("conv_to_dense: layer is not convolutional");
  validate_layer(cfg, layer);
  const uint64_t n = group_order(cfg, layer.level);
  Layer dense;
  dense.level = layer.level;
  dense.kind = LayerKind::Dense;
  dense.bias = layer.bias;
  dense.weights.assign(n * n, 0.0);
  for (uint64_t j = 0; j < n; ++j) {
    const TreeIndex ji = index_from_rank(cfg, layer.level, j);
    for (uint64_t k = 0; k < n; ++k) {
      const TreeIndex ki = index_from_rank(cfg, layer.level, k);
      dense.weights[j * n + k] = layer.weights[rank(cfg, sub(cfg, ji, ki))];
    }
  }
  return dense;
}

// Seeded init: weights uniform in ±1/sqrt(p^l), biases uniform in ±0.1.
inline Network random_network(const FieldConfig& cfg, uint32_t L, uint32_t delta, double M,
                              LayerKind kind, uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<Layer> layers;
  for (uint32_t l = L + 1; l <= L + delta; ++l) {
    const uint64_t n = group_order(cfg, l);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    Layer layer;
    layer.level = l;
    layer.kind = kind;
    layer.weights.resize(kind == LayerKind::Dense ? n * n : n);
    for (double& w : layer.weights) w = rng.next_in(-scale, scale);
    layer.bias.resize(n);
    for (double& b : layer.bias) b = rng.next_in(-0.1, 0.1);
    layers.push_back(std::move(layer));
  }
  return Network(cfg, L, delta, Activation(M), std::move(layers));
}

}  // namespace padnn
