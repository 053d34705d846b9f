#pragma once

// Quadratic cost, backpropagation, and seeded stochastic gradient descent.
//
// The delta recursion follows the standard backward pass with one extra step
// forced by the copy operator: (W[l+1])^T delta[l+1] lives at level l+1, so it
// is pushed down through the lifting adjoint (sum over the p children of each
// index) before the Hadamard product with sigma_M'(Z[l]).
//
// Per-sample cost is (1/2)|Y - X[L+delta]|^2 in the plain Euclidean metric;
// CostMetric::HaarWeighted instead weights each squared term by the level's
// ball mass p^-(L+delta), matching the L^2 metric of the function space.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "padnn/field.hpp"
#include "padnn/network.hpp"
#include "padnn/rng.hpp"
#include "padnn/test_function.hpp"

namespace padnn {

struct TrainingSample {
  TestFunction input;   // level L
  TestFunction target;  // level L+delta
};

struct LayerGradient {
  std::vector<double> weights;
  std::vector<double> bias;
};

struct Gradient {
  std::vector<LayerGradient> layers;
};

enum class CostMetric { Euclidean, HaarWeighted };

namespace detail {

inline void check_sample(const Network& net, const TrainingSample& s) {
  if (!(s.input.cfg == net.cfg) || !(s.target.cfg == net.cfg))
    throw std::invalid_argument("training: sample field config mismatch");
  if (s.input.level != net.input_level || s.target.level != net.output_level())
    throw std::invalid_argument("training: sample levels do not match the network");
}

inline double cell_weight(const Network& net, CostMetric metric) {
  if (metric == CostMetric::Euclidean) return 1.0;
  return 1.0 / static_cast<double>(group_order(net.cfg, net.output_level()));
}

}  // namespace detail

// Mean over samples of (1/2)|target - output|^2.
inline double cost(const Network& net, std::span<const TrainingSample> samples,
                   CostMetric metric = CostMetric::Euclidean) {
  if (samples.empty()) throw std::invalid_argument("cost: empty sample set");
  const double w = detail::cell_weight(net, metric);
  double acc = 0.0;
  for (const TrainingSample& s : samples) {
    detail::check_sample(net, s);
    const ForwardResult fwd = forward(net, s.input);
    double c = 0.0;
    for (size_t k = 0; k < fwd.output.coeffs.size(); ++k) {
      const double diff = fwd.output.coeffs[k] - s.target.coeffs[k];
      c += w * diff * diff;
    }
    acc += 0.5 * c;
  }
  return acc / static_cast<double>(samples.size());
}

// Adjoint of lift_state: sum each index's p children.
inline std::vector<double> lift_adjoint(const FieldConfig& cfg, const std::vector<double>& v) {
  if (v.size() % cfg.p != 0) throw std::invalid_argument("lift_adjoint: length not divisible by p");
  const size_t n = v.size() / cfg.p;
  std::vector<double> u(n, 0.0);
  for (size_t r = 0; r < v.size(); ++r) u[r % n] += v[r];
  return u;
}

// Gradient of the single-sample cost with respect to every weight and bias.
inline Gradient backprop(const Network& net, const TrainingSample& sample,
                         CostMetric metric = CostMetric::Euclidean) {
  detail::check_sample(net, sample);
  const ForwardResult fwd = forward(net, sample.input);
  const double cw = detail::cell_weight(net, metric);

  const size_t last = net.layers.size() - 1;
  std::vector<std::vector<double>> deltas(net.layers.size());

  {  // delta[L+delta] = sigma'(Z) o (X - Y), with the metric's cell weight
    const std::vector<double>& z = fwd.trace.weighted[last];
    const std::vector<double>& x = fwd.trace.states[last];
    std::vector<double> d(z.size());
    for (size_t k = 0; k < z.size(); ++k)
      d[k] = net.activation.derivative(z[k]) * cw * (x[k] - sample.target.coeffs[k]);
    deltas[last] = std::move(d);
  }

  for (size_t li = last; li-- > 0;) {
    const Layer& next = net.layers[li + 1];
    const std::vector<double>& dnext = deltas[li + 1];
    const uint64_t n = dnext.size();
    std::vector<double> v(n, 0.0);  // (W[l+1])^T delta[l+1]
    if (next.kind == LayerKind::Dense) {
      for (uint64_t j = 0; j < n; ++j) {
        const double* row = next.weights.data() + j * n;
        for (uint64_t k = 0; k < n; ++k) v[k] += row[k] * dnext[j];
      }
    } else {
      for (uint64_t j = 0; j < n; ++j) {
        const TreeIndex ji = index_from_rank(net.cfg, next.level, j);
        for (uint64_t k = 0; k < n; ++k) {
          const TreeIndex ki = index_from_rank(net.cfg, next.level, k);
          v[k] += next.weights[rank(net.cfg, sub(net.cfg, ji, ki))] * dnext[j];
        }
      }
    }
    const std::vector<double> u = lift_adjoint(net.cfg, v);
    const std::vector<double>& z = fwd.trace.weighted[li];
    std::vector<double> d(z.size());
    for (size_t k = 0; k < z.size(); ++k) d[k] = net.activation.derivative(z[k]) * u[k];
    deltas[li] = std::move(d);
  }

  Gradient grad;
  grad.layers.resize(net.layers.size());
  for (size_t li = 0; li < net.layers.size(); ++li) {
    const Layer& layer = net.layers[li];
    const std::vector<double>& delta = deltas[li];
    const std::vector<double>& lifted = fwd.trace.lifted[li];
    const uint64_t n = delta.size();
    LayerGradient& g = grad.layers[li];
    g.bias = delta;
    if (layer.kind == LayerKind::Dense) {
      g.weights.assign(n * n, 0.0);
      for (uint64_t j = 0; j < n; ++j)
        for (uint64_t k = 0; k < n; ++k) g.weights[j * n + k] = delta[j] * lifted[k];
    } else {
      g.weights.assign(n, 0.0);
      for (uint64_t j = 0; j < n; ++j) {
        const TreeIndex ji = index_from_rank(net.cfg, layer.level, j);
        for (uint64_t d = 0; d < n; ++d) {
          const TreeIndex di = index_from_rank(net.cfg, layer.level, d);
          g.weights[d] += delta[j] * lifted[rank(net.cfg, sub(net.cfg, ji, di))];
        }
      }
    }
  }
  return grad;
}

// One gradient-descent step: Theta -> Theta - (eta/|batch|) sum of gradients.
inline Network sgd_step(const Network& net, std::span<const TrainingSample> batch, double eta,
                        CostMetric metric = CostMetric::Euclidean) {
  if (!(eta > 0.0)) throw std::invalid_argument("sgd_step: learning rate must be > 0");
  if (batch.empty()) throw std::invalid_argument("sgd_step: empty batch");
  Network updated = net;
  const double factor = eta / static_cast<double>(batch.size());
  for (const TrainingSample& s : batch) {
    const Gradient grad = backprop(net, s, metric);
    for (size_t li = 0; li < updated.layers.size(); ++li) {
      Layer& layer = updated.layers[li];
      const LayerGradient& g = grad.layers[li];
      for (size_t i = 0; i < layer.weights.size(); ++i) layer.weights[i] -= factor * g.weights[i];
      for (size_t i = 0; i < layer.bias.size(); ++i) layer.bias[i] -= factor * g.bias[i];
    }
  }
  return updated;
}

struct TrainSchedule {
  uint32_t epochs = 0;
  uint32_t batch_size = 1;
  double eta = 0.1;
  uint64_t seed = 0;
  CostMetric metric = CostMetric::Euclidean;
};

struct TrainResult {
  Network net;
  std::vector<double> cost_log;  // full-dataset cost after each epoch
};

// Seeded SGD: samples are reshuffled each epoch with SplitMix64(seed); batches
// are consecutive runs of the shuffled order (the final batch may be short).
// Fully deterministic for a fixed (net, samples, schedule).
inline TrainResult train(const Network& net, std::span<const TrainingSample> samples,
                         const TrainSchedule& schedule) {
  if (samples.empty()) throw std::invalid_argument("train: empty sample set");
  if (schedule.batch_size < 1) throw std::invalid_argument("train: batch size must be >= 1");
  TrainResult result{net, {}};
  SplitMix64 rng(schedule.seed);
  std::vector<size_t> order(samples.size());
  std::iota(order.begin(), order.end(), size_t{0});
  for (uint32_t epoch = 0; epoch < schedule.epochs; ++epoch) {
    rng.shuffle(order);
    for (size_t begin = 0; begin < order.size(); begin += schedule.batch_size) {
      const size_t end = std::min(order.size(), begin + schedule.batch_size);
      std::vector<TrainingSample> batch;
      batch.reserve(end - begin);
      for (size_t i = begin; i < end; ++i) batch.push_back(samples[order[i]]);
      result.net = sgd_step(result.net, batch, schedule.eta, schedule.metric);
    }
    result.cost_log.push_back(cost(result.net, samples, schedule.metric));
  }
  return result;
}

}  // namespace padnn
