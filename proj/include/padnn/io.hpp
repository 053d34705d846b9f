#pragma once

// JSON schemas for test functions, models, and bundles, plus the CSV writers
// used by the CLI.  Doubles are emitted with shortest-round-trip formatting
// (JSON) or 17 significant digits (CSV), so files round-trip value-exact and
// repeated runs are byte-identical.

#include <complex>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "padnn/approx.hpp"
#include "padnn/field.hpp"
#include "padnn/network.hpp"
#include "padnn/test_function.hpp"
#include "padnn/walsh.hpp"

namespace padnn {

inline std::string to_string(Characteristic ch) {
  return ch == Characteristic::PositiveChar ? "pos" : "zero";
}

inline Characteristic characteristic_from_string(const std::string& s) {
  if (s == "pos") return Characteristic::PositiveChar;
  if (s == "zero") return Characteristic::CharZero;
  throw std::invalid_argument("characteristic must be \"pos\" or \"zero\", got \"" + s + "\"");
}

inline nlohmann::json to_json(const TestFunction& f) {
  return nlohmann::json{{"p", f.cfg.p},
                        {"char", to_string(f.cfg.characteristic)},
                        {"level", f.level},
                        {"coeffs", f.coeffs}};
}

inline TestFunction test_function_from_json(const nlohmann::json& j) {
  const FieldConfig cfg(j.at("p").get<uint32_t>(),
                        characteristic_from_string(j.at("char").get<std::string>()));
  return TestFunction(cfg, j.at("level").get<uint32_t>(),
                      j.at("coeffs").get<std::vector<double>>());
}

inline nlohmann::json to_json(const Network& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const Layer& layer : net.layers)
    layers.push_back({{"level", layer.level},
                      {"kind", layer.kind == LayerKind::Dense ? "dense" : "conv"},
                      {"weights", layer.weights},
                      {"bias", layer.bias}});
  return nlohmann::json{{"p", net.cfg.p},
                        {"char", to_string(net.cfg.characteristic)},
                        {"L", net.input_level},
                        {"delta", net.depth},
                        {"M", net.activation.M},
                        {"layers", layers}};
}

inline Network network_from_json(const nlohmann::json& j) {
  const FieldConfig cfg(j.at("p").get<uint32_t>(),
                        characteristic_from_string(j.at("char").get<std::string>()));
  std::vector<Layer> layers;
  for (const nlohmann::json& lj : j.at("layers")) {
    Layer layer;
    layer.level = lj.at("level").get<uint32_t>();
    const std::string kind = lj.at("kind").get<std::string>();
    if (kind == "dense")
      layer.kind = LayerKind::Dense;
    else if (kind == "conv")
      layer.kind = LayerKind::Conv;
    else
      throw std::invalid_argument("layer kind must be \"dense\" or \"conv\"");
    layer.weights = lj.at("weights").get<std::vector<double>>();
    layer.bias = lj.at("bias").get<std::vector<double>>();
    layers.push_back(std::move(layer));
  }
  return Network(cfg, j.at("L").get<uint32_t>(), j.at("delta").get<uint32_t>(),
                 Activation(j.at("M").get<double>()), std::move(layers));
}

inline nlohmann::json to_json(const NetworkBundle& bundle) {
  nlohmann::json arr = nlohmann::json::array();
  for (const BundleComponent& c : bundle.components)
    arr.push_back({{"chart",
                    {{"center", format_index(c.chart.center)}, {"N", c.chart.scale_exponent}}},
                   {"model", to_json(c.net)}});
  return arr;
}

inline NetworkBundle bundle_from_json(const nlohmann::json& j) {
  NetworkBundle bundle;
  for (const nlohmann::json& cj : j) {
    Network net = network_from_json(cj.at("model"));
    const nlohmann::json& chart = cj.at("chart");
    bundle.components.push_back(
        BundleComponent{AffineChart(parse_index(net.cfg, chart.at("center").get<std::string>()),
                                    chart.at("N").get<int32_t>()),
                        std::move(net)});
  }
  return bundle;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void save_json(const std::string& path, const nlohmann::json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

inline nlohmann::json load_json(const std::string& path) {
  return nlohmann::json::parse(read_text_file(path));
}

inline std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// Training log: header "epoch,cost", one row per epoch.
inline std::string cost_log_csv(const std::vector<double>& log) {
  std::string out = "epoch,cost\n";
  for (size_t i = 0; i < log.size(); ++i)
    out += std::to_string(i + 1) + "," + format_g17(log[i]) + "\n";
  return out;
}

// Walsh coefficients: one row per character, "level,a_digits,re,im,modulus".
inline std::string walsh_coeffs_csv(const std::vector<WalshCoefficient>& coeffs) {
  std::string out = "level,a_digits,re,im,modulus\n";
  for (const WalshCoefficient& c : coeffs) {
    out += std::to_string(c.character.level) + "," + format_index(c.character.index) + "," +
           format_g17(c.value.real()) + "," + format_g17(c.value.imag()) + "," +
           format_g17(std::abs(c.value)) + "\n";
  }
  return out;
}

}  // namespace padnn
