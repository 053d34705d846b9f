#pragma once

// Constructive universal approximation with explicit robustness radii,
// direct products of networks, and affine charts for functions supported on
// disjoint unions of balls.
//
// The construction: to reproduce a target in D^{L+delta} exactly, set every
// weight to zero and the final-layer bias to sigma_M^{-1}(target).  The
// output is then independent of the input, and the approximation survives
// perturbations of all parameters inside the RobustnessBall:
//   delta(eps)   = eps / M            (Lipschitz bound of M tanh)
//   theta radius = delta(eps) / 2
//   w radius     = delta(eps) / (2 p^{L+delta} ||X||_inf)

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "padnn/field.hpp"
#include "padnn/network.hpp"
#include "padnn/test_function.hpp"

namespace padnn {

struct RobustnessBall {
  double theta_radius = 0.0;
  double weight_radius = 0.0;
};

struct ConstructiveResult {
  Network net;
  RobustnessBall ball;
};

// Network with zero weights and final bias sigma_M^{-1}(target); reproduces
// target on any input.  input_sup_bound bounds ||X||_inf of the inputs the
// robustness radii must cover.
inline ConstructiveResult constructive_network(const TestFunction& target, double M,
                                               uint32_t input_level, double epsilon = 0.1,
                                               double input_sup_bound = 1.0) {
  if (input_level < 1) throw std::invalid_argument("constructive_network: L must be >= 1");
  if (target.level <= input_level)
    throw std::invalid_argument(
        "constructive_network: target level must exceed L; embed the target first");
  if (!(epsilon > 0.0)) throw std::invalid_argument("constructive_network: epsilon must be > 0");
  if (!(input_sup_bound >= 0.0))
    throw std::invalid_argument("constructive_network: input bound must be >= 0");
  if (!(lp_norm(target, kInfNorm) < M))
    throw std::invalid_argument("constructive_network: ||target||_inf must be < M");

  const Activation act(M);
  const uint32_t delta = target.level - input_level;
  std::vector<Layer> layers;
  for (uint32_t l = input_level + 1; l <= input_level + delta; ++l) {
    const uint64_t n = group_order(target.cfg, l);
    Layer layer;
    layer.level = l;
    layer.kind = LayerKind::Dense;
    layer.weights.assign(n * n, 0.0);
    layer.bias.assign(n, 0.0);
    layers.push_back(std::move(layer));
  }
  for (size_t i = 0; i < target.coeffs.size(); ++i)
    layers.back().bias[i] = act.inverse(target.coeffs[i]);

  const double delta_eps = epsilon / M;
  RobustnessBall ball;
  ball.theta_radius = delta_eps / 2.0;
  ball.weight_radius =
      input_sup_bound > 0.0
          ? delta_eps / (2.0 * static_cast<double>(group_order(target.cfg, target.level)) *
                         input_sup_bound)
          : std::numeric_limits<double>::infinity();
  return ConstructiveResult{Network(target.cfg, input_level, delta, act, std::move(layers)),
                            ball};
}

// Reduce an L^rho approximation target to the exact construction: the target
// already lives at some finer level L' > L, so delta = L' - L.
inline Network approximate_lp(const TestFunction& target, double epsilon, double rho, double M,
                              uint32_t input_level) {
  if (target.level <= input_level)
    throw std::invalid_argument(
        "approximate_lp: target level must exceed L; embed the target to a finer level first");
  if (!(lp_norm(target, rho) < M))
    throw std::invalid_argument("approximate_lp: ||target||_rho must be < M");
  return constructive_network(target, M, input_level, epsilon).net;
}

// The ball center + ℘^N O_K.  For N >= 0 the chart is a ball inside the unit
// ball and center is a level-N index; N < 0 (a ball containing the unit
// ball) is supported with center 0.
struct AffineChart {
  TreeIndex center;
  int32_t scale_exponent = 0;  // N

  AffineChart(TreeIndex c, int32_t n) : center(std::move(c)), scale_exponent(n) {
    const uint32_t expected = n >= 0 ? static_cast<uint32_t>(n) : 0;
    if (center.level() != expected)
      throw std::invalid_argument("AffineChart: center level must equal max(N, 0)");
  }
};

inline AffineChart identity_chart() { return AffineChart(TreeIndex{}, 0); }

// A function on a chart ball, constant on cells of absolute size p^-level;
// coefficients are indexed by the relative rank j of the cell
// center + ℘^N (j + ℘^{level-N} O_K).
struct ChartFunction {
  FieldConfig cfg;
  AffineChart chart;
  int32_t level;  // absolute resolution; level >= N
  std::vector<double> coeffs;

  ChartFunction(FieldConfig c, AffineChart ch, int32_t l, std::vector<double> v)
      : cfg(c), chart(std::move(ch)), level(l), coeffs(std::move(v)) {
    if (level < chart.scale_exponent)
      throw std::invalid_argument("ChartFunction: resolution coarser than the chart");
    check_digits(cfg, chart.center);
    const uint64_t n = group_order(cfg, static_cast<uint32_t>(level - chart.scale_exponent));
    if (coeffs.size() != n)
      throw std::invalid_argument("ChartFunction: coefficient count != p^(level-N)");
  }
};

// T_{a,N} x = ℘^-N (x - a) maps the chart onto the unit ball; composing with
// its inverse relabels cells by their relative rank, so the pullback is the
// coefficient vector read as a test function at level (level - N).
inline TestFunction chart_pullback(const ChartFunction& f) {
  return TestFunction(f.cfg, static_cast<uint32_t>(f.level - f.chart.scale_exponent), f.coeffs);
}

inline ChartFunction chart_pushforward(const TestFunction& y, const AffineChart& chart) {
  return ChartFunction(y.cfg, chart, static_cast<int32_t>(y.level) + chart.scale_exponent,
                       y.coeffs);
}

// ||f||_rho on the chart: cells carry Haar mass p^-level.
inline double lp_norm(const ChartFunction& f, double rho) {
  if (!(rho >= 1.0)) throw std::invalid_argument("lp_norm: rho must be >= 1 or infinity");
  if (std::isinf(rho)) {
    double m = 0.0;
    for (double x : f.coeffs) m = std::max(m, std::fabs(x));
    return m;
  }
  const double cell = std::pow(static_cast<double>(f.cfg.p), -static_cast<double>(f.level));
  double acc = 0.0;
  for (double x : f.coeffs) acc += std::pow(std::fabs(x), rho) * cell;
  return std::pow(acc, 1.0 / rho);
}

// Restriction of a unit-ball test function to a chart with N >= 0: absolute
// index (center digits then relative digits) has rank(center) + p^N * j.
inline ChartFunction restrict_to_chart(const TestFunction& f, const AffineChart& chart) {
  const int32_t n = chart.scale_exponent;
  if (n < 0) throw std::invalid_argument("restrict_to_chart: chart must lie in the unit ball");
  if (f.level < static_cast<uint32_t>(n))
    throw std::invalid_argument("restrict_to_chart: resolution coarser than the chart");
  const uint64_t stride = group_order(f.cfg, static_cast<uint32_t>(n));
  const uint64_t count = group_order(f.cfg, f.level) / stride;
  const uint64_t base = rank(f.cfg, chart.center);
  std::vector<double> coeffs(count);
  for (uint64_t j = 0; j < count; ++j) coeffs[j] = f.coeffs[base + stride * j];
  return ChartFunction(f.cfg, chart, static_cast<int32_t>(f.level), std::move(coeffs));
}

// Extend a chart function (N >= 0) to the unit ball by zero outside the chart.
inline TestFunction embed_chart(const ChartFunction& f) {
  if (f.chart.scale_exponent < 0)
    throw std::invalid_argument("embed_chart: chart must lie in the unit ball");
  if (f.level < 0) throw std::invalid_argument("embed_chart: negative absolute resolution");
  const uint64_t stride = group_order(f.cfg, static_cast<uint32_t>(f.chart.scale_exponent));
  const uint64_t base = rank(f.cfg, f.chart.center);
  std::vector<double> coeffs(group_order(f.cfg, static_cast<uint32_t>(f.level)), 0.0);
  for (uint64_t j = 0; j < f.coeffs.size(); ++j) coeffs[base + stride * j] = f.coeffs[j];
  return TestFunction(f.cfg, static_cast<uint32_t>(f.level), std::move(coeffs));
}

struct BundleComponent {
  AffineChart chart;
  Network net;
};

// One network per chart, run in parallel; the bundle norm is the max of the
// component norms.
struct NetworkBundle {
  std::vector<BundleComponent> components;
};

inline NetworkBundle direct_product(const std::vector<Network>& nets) {
  NetworkBundle bundle;
  for (const Network& net : nets) {
    if (!bundle.components.empty() && !(net.cfg == bundle.components.front().net.cfg))
      throw std::invalid_argument("direct_product: networks must share p and characteristic");
    bundle.components.push_back(BundleComponent{identity_chart(), net});
  }
  return bundle;
}

inline NetworkBundle direct_product(std::vector<BundleComponent> components) {
  for (const BundleComponent& c : components)
    if (!(c.net.cfg == components.front().net.cfg))
      throw std::invalid_argument("direct_product: networks must share p and characteristic");
  return NetworkBundle{std::move(components)};
}

inline std::vector<TestFunction> forward_bundle(const NetworkBundle& bundle,
                                                const std::vector<TestFunction>& inputs) {
  if (inputs.size() != bundle.components.size())
    throw std::invalid_argument("forward_bundle: one input per component required");
  std::vector<TestFunction> outputs;
  outputs.reserve(inputs.size());
  for (size_t i = 0; i < inputs.size(); ++i)
    outputs.push_back(forward(bundle.components[i].net, inputs[i]).output);
  return outputs;
}

// max over components of ||f_i||_rho.
inline double bundle_norm(const std::vector<TestFunction>& fs, double rho) {
  double m = 0.0;
  for (const TestFunction& f : fs) m = std::max(m, lp_norm(f, rho));
  return m;
}

}  // namespace padnn
