// Command-line driver for hierarchical digit-space networks: digit encoding,
// function sampling, constructive approximation, SGD training, and
// Fourier-Walsh analysis, with reproducible JSON/CSV artifacts.
//
// Exit codes: 0 success, 1 training made no improvement (or no-op),
// 2 invalid configuration, 3 numeric failure.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "padnn/approx.hpp"
#include "padnn/encoding.hpp"
#include "padnn/field.hpp"
#include "padnn/io.hpp"
#include "padnn/network.hpp"
#include "padnn/rng.hpp"
#include "padnn/targets.hpp"
#include "padnn/test_function.hpp"
#include "padnn/training.hpp"
#include "padnn/walsh.hpp"

namespace {

using nlohmann::json;
using namespace padnn;

// Invalid configuration (exit 2), as opposed to a numeric failure (exit 3).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

FieldConfig make_field(uint32_t p, const std::string& characteristic) {
  try {
    return FieldConfig(p, characteristic_from_string(characteristic));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

LayerKind parse_kind(const std::string& kind) {
  if (kind == "dense") return LayerKind::Dense;
  if (kind == "conv") return LayerKind::Conv;
  throw ConfigError("network kind must be \"dense\" or \"conv\", got \"" + kind + "\"");
}

std::vector<double> parse_norms(const std::string& list) {
  std::vector<double> out;
  size_t pos = 0;
  while (pos <= list.size()) {
    const size_t comma = list.find(',', pos);
    const std::string tok = list.substr(pos, comma == std::string::npos ? comma : comma - pos);
    if (tok == "1")
      out.push_back(1.0);
    else if (tok == "2")
      out.push_back(2.0);
    else if (tok == "inf")
      out.push_back(kInfNorm);
    else
      throw ConfigError("norms must be a comma list drawn from {1,2,inf}");
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::string norm_key(double rho) { return std::isinf(rho) ? "inf" : (rho == 1.0 ? "1" : "2"); }

// Target given as a builtin name or a path to TestFunction JSON.
bool is_json_path(const std::string& target) {
  return target.size() > 5 && target.substr(target.size() - 5) == ".json";
}

TestFunction resolve_target(const std::string& target, const FieldConfig& cfg, uint32_t level,
                            SampleMode mode) {
  if (is_json_path(target)) {
    const TestFunction f = test_function_from_json(load_json(target));
    if (!(f.cfg == cfg))
      throw ConfigError("target file field config does not match the requested field");
    if (f.level != level)
      throw ConfigError("target file has level " + std::to_string(f.level) + ", expected " +
                        std::to_string(level));
    return f;
  }
  return sample_function(make_target(target), cfg, level, mode);
}

json load_config_file(const std::string& path) {
  try {
    return load_json(path);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config file: ") + e.what());
  }
}

// Pull a value from the config file unless the flag was given explicitly.
template <typename T>
void merge(const CLI::Option* opt, const json& cfg, const char* section, const char* key,
           T& value) {
  if (opt != nullptr && opt->count() > 0) return;
  if (!cfg.contains(section)) return;
  const json& s = cfg.at(section);
  if (s.contains(key)) value = s.at(key).get<T>();
}

template <typename T>
void merge_top(const CLI::Option* opt, const json& cfg, const char* key, T& value) {
  if (opt != nullptr && opt->count() > 0) return;
  if (cfg.contains(key)) value = cfg.at(key).get<T>();
}

TestFunction random_input(const FieldConfig& cfg, uint32_t level, SplitMix64& rng) {
  std::vector<double> v(group_order(cfg, level));
  for (double& x : v) x = rng.next_in(-1.0, 1.0);
  return TestFunction(cfg, level, std::move(v));
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

TestFunction difference(const TestFunction& a, const TestFunction& b) {
  TestFunction d = a;
  for (size_t i = 0; i < d.coeffs.size(); ++i) d.coeffs[i] -= b.coeffs[i];
  return d;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hierarchical digit-space deep neural networks"};
  app.require_subcommand(1);

  // ---- encode ----
  double enc_x = 0.0;
  uint32_t enc_p = 2, enc_depth = 8;
  CLI::App* encode_cmd = app.add_subcommand("encode", "digit-expand a real number in [0,1]");
  encode_cmd->add_option("x", enc_x, "number in [0,1]")->required();
  encode_cmd->add_option("--p", enc_p, "prime base");
  encode_cmd->add_option("--depth", enc_depth, "number of digits");

  // ---- sample ----
  std::string smp_fn = "sin2pi", smp_char = "pos", smp_mode = "left", smp_out;
  uint32_t smp_p = 2, smp_level = 4, smp_sub = 8;
  CLI::App* sample_cmd =
      app.add_subcommand("sample", "sample a function on [0,1] into a test function");
  sample_cmd->add_option("--fn", smp_fn, "builtin target name");
  sample_cmd->add_option("--p", smp_p, "prime");
  sample_cmd->add_option("--char", smp_char, "pos|zero");
  sample_cmd->add_option("--level", smp_level, "resolution level");
  sample_cmd->add_option("--mode", smp_mode, "left|avg");
  sample_cmd->add_option("--subsamples", smp_sub, "sub-samples per cell for avg mode");
  sample_cmd->add_option("--out", smp_out, "output TestFunction JSON path")->required();

  // ---- approx ----
  std::string apx_config, apx_char = "pos", apx_target = "sin2pi", apx_norms = "1,2,inf";
  std::string apx_model_out, apx_report_out, apx_mode = "left";
  uint32_t apx_p = 2, apx_L = 2, apx_delta = 2;
  double apx_M = 2.0, apx_eps = 0.1, apx_bound = 1.0;
  CLI::App* approx_cmd =
      app.add_subcommand("approx", "constructive approximation with robustness radii");
  approx_cmd->add_option("--config", apx_config, "JSON config file (flags override)");
  auto* apx_p_opt = approx_cmd->add_option("--p", apx_p, "prime");
  auto* apx_char_opt = approx_cmd->add_option("--char", apx_char, "pos|zero");
  auto* apx_L_opt = approx_cmd->add_option("-L,--input-level", apx_L, "input level L");
  auto* apx_delta_opt = approx_cmd->add_option("--delta", apx_delta, "depth");
  auto* apx_M_opt = approx_cmd->add_option("-M,--bound", apx_M, "activation range bound");
  auto* apx_target_opt =
      approx_cmd->add_option("--target", apx_target, "builtin name or TestFunction JSON path");
  auto* apx_norms_opt = approx_cmd->add_option("--norms", apx_norms, "norms to report (1,2,inf)");
  approx_cmd->add_option("--epsilon", apx_eps, "robustness epsilon");
  approx_cmd->add_option("--input-bound", apx_bound, "sup bound of admissible inputs");
  approx_cmd->add_option("--mode", apx_mode, "target sampling mode left|avg");
  uint32_t apx_ref_level = 0;
  approx_cmd->add_option("--reference-level", apx_ref_level,
                         "report errors against the builtin target sampled at this finer level "
                         "(default: the target's own level)");
  approx_cmd->add_option("--out-model", apx_model_out, "model JSON output path");
  approx_cmd->add_option("--out-report", apx_report_out, "error report JSON output path");

  // ---- train ----
  std::string trn_config, trn_char = "pos", trn_target = "sin2pi", trn_kind = "dense";
  std::string trn_metric = "euclidean", trn_model_out, trn_log_out;
  uint32_t trn_p = 2, trn_L = 3, trn_delta = 2, trn_epochs = 200, trn_batch = 8, trn_samples = 32;
  double trn_M = 2.0, trn_eta = 0.05;
  uint64_t trn_seed = 1;
  CLI::App* train_cmd = app.add_subcommand("train", "seeded stochastic gradient descent");
  train_cmd->add_option("--config", trn_config, "JSON config file (flags override)");
  auto* trn_p_opt = train_cmd->add_option("--p", trn_p, "prime");
  auto* trn_char_opt = train_cmd->add_option("--char", trn_char, "pos|zero");
  auto* trn_L_opt = train_cmd->add_option("-L,--input-level", trn_L, "input level L");
  auto* trn_delta_opt = train_cmd->add_option("--delta", trn_delta, "depth");
  auto* trn_M_opt = train_cmd->add_option("-M,--bound", trn_M, "activation range bound");
  auto* trn_kind_opt = train_cmd->add_option("--kind", trn_kind, "dense|conv");
  auto* trn_epochs_opt = train_cmd->add_option("--epochs", trn_epochs, "epochs");
  auto* trn_batch_opt = train_cmd->add_option("--batch", trn_batch, "batch size");
  auto* trn_eta_opt = train_cmd->add_option("--eta", trn_eta, "learning rate");
  auto* trn_seed_opt = train_cmd->add_option("--seed", trn_seed, "PRNG seed");
  auto* trn_target_opt =
      train_cmd->add_option("--target", trn_target, "builtin name or TestFunction JSON path");
  train_cmd->add_option("--samples", trn_samples, "training set size");
  train_cmd->add_option("--metric", trn_metric, "euclidean|haar cost metric");
  train_cmd->add_option("--out-model", trn_model_out, "model JSON output path");
  train_cmd->add_option("--out-log", trn_log_out, "cost CSV output path");

  // ---- walsh ----
  std::string wls_fn = "sin2pi", wls_basis = "theta", wls_coeffs_out, wls_errors_out;
  uint32_t wls_p = 2, wls_level = 4, wls_sub = 8;
  CLI::App* walsh_cmd =
      app.add_subcommand("walsh", "Fourier-Walsh coefficients of a function on [0,1]");
  walsh_cmd->add_option("--fn", wls_fn, "builtin target name");
  walsh_cmd->add_option("--p", wls_p, "prime");
  walsh_cmd->add_option("--basis", wls_basis, "theta|gamma");
  walsh_cmd->add_option("--max-level", wls_level, "finest character level");
  walsh_cmd->add_option("--subsamples", wls_sub, "sub-samples per cell");
  walsh_cmd->add_option("--out-coeffs", wls_coeffs_out, "coefficient CSV path");
  walsh_cmd->add_option("--out-errors", wls_errors_out, "truncation-error CSV path");

  // ---- product ----
  std::string prd_config, prd_bundle_out, prd_report_out;
  CLI::App* product_cmd =
      app.add_subcommand("product", "direct product of constructive networks over charts");
  product_cmd->add_option("--config", prd_config, "JSON config with a components array")
      ->required();
  product_cmd->add_option("--out-bundle", prd_bundle_out, "bundle JSON output path");
  product_cmd->add_option("--out-report", prd_report_out, "report JSON output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (encode_cmd->parsed()) {
      const UnitDigits digits = rho_encode(enc_x, enc_p, enc_depth);
      const TreeIndex index = to_field(digits);
      const FieldConfig cfg(enc_p, Characteristic::PositiveChar);
      std::cout << "digits = " << format_index(index) << "\n";
      std::cout << "index  = " << format_index(index) << " (level " << index.level() << ", rank "
                << rank(cfg, index) << ")\n";
      return 0;
    }

    if (sample_cmd->parsed()) {
      const FieldConfig cfg = make_field(smp_p, smp_char);
      if (smp_mode != "left" && smp_mode != "avg") throw ConfigError("mode must be left or avg");
      const SampleMode mode =
          smp_mode == "left" ? SampleMode::LeftEndpoint : SampleMode::CellAverage;
      const TestFunction phi = sample_function(make_target(smp_fn), cfg, smp_level, mode, smp_sub);
      save_json(smp_out, to_json(phi));
      std::cout << "wrote " << smp_out << " (level " << smp_level << ", " << phi.coeffs.size()
                << " coefficients)\n";
      return 0;
    }

    if (approx_cmd->parsed()) {
      if (!apx_config.empty()) {
        const json cfgj = load_config_file(apx_config);
        merge(apx_p_opt, cfgj, "field", "p", apx_p);
        merge(apx_char_opt, cfgj, "field", "char", apx_char);
        merge(apx_L_opt, cfgj, "network", "L", apx_L);
        merge(apx_delta_opt, cfgj, "network", "delta", apx_delta);
        merge(apx_M_opt, cfgj, "network", "M", apx_M);
        merge_top(apx_target_opt, cfgj, "target", apx_target);
        if ((apx_norms_opt == nullptr || apx_norms_opt->count() == 0) && cfgj.contains("norms")) {
          apx_norms.clear();
          for (const auto& n : cfgj.at("norms"))
            apx_norms += (apx_norms.empty() ? "" : ",") + n.get<std::string>();
        }
      }
      const FieldConfig cfg = make_field(apx_p, apx_char);
      const std::vector<double> norms = parse_norms(apx_norms);
      const SampleMode mode =
          apx_mode == "avg" ? SampleMode::CellAverage : SampleMode::LeftEndpoint;
      const TestFunction target = resolve_target(apx_target, cfg, apx_L + apx_delta, mode);

      const double sup = max_abs(target.coeffs);
      if (!(sup < apx_M)) {
        size_t worst = 0;
        for (size_t i = 0; i < target.coeffs.size(); ++i)
          if (std::fabs(target.coeffs[i]) >= std::fabs(target.coeffs[worst])) worst = i;
        throw ConfigError("target sup norm " + format_g17(sup) + " at index " +
                          format_index(index_from_rank(cfg, target.level, worst)) +
                          " is not below M = " + format_g17(apx_M));
      }
      const auto [net, ball] = constructive_network(target, apx_M, apx_L, apx_eps, apx_bound);
      const TestFunction out = forward(net, constant_function(cfg, apx_L, 0.0)).output;
      TestFunction reference = target;
      TestFunction compared = out;
      if (apx_ref_level > target.level) {
        if (is_json_path(apx_target))
          throw ConfigError("--reference-level needs a builtin target to resample");
        reference = sample_function(make_target(apx_target), cfg, apx_ref_level, mode);
        compared = embed(out, apx_ref_level);
      } else if (apx_ref_level != 0 && apx_ref_level != target.level) {
        throw ConfigError("--reference-level must be at least the target level L+delta");
      }
      const TestFunction residual = difference(compared, reference);
      json report;
      for (double rho : norms) report["errors"][norm_key(rho)] = lp_norm(residual, rho);
      report["robustness"] = {{"theta_radius", ball.theta_radius},
                              {"weight_radius", ball.weight_radius},
                              {"epsilon", apx_eps},
                              {"input_bound", apx_bound}};
      if (!apx_model_out.empty()) save_json(apx_model_out, to_json(net));
      if (!apx_report_out.empty()) save_json(apx_report_out, report);
      for (double rho : norms)
        std::cout << "error_" << norm_key(rho) << " = "
                  << format_g17(report["errors"][norm_key(rho)].get<double>()) << "\n";
      std::cout << "theta_radius = " << format_g17(ball.theta_radius)
                << "\nweight_radius = " << format_g17(ball.weight_radius) << "\n";
      return 0;
    }

    if (train_cmd->parsed()) {
      if (!trn_config.empty()) {
        const json cfgj = load_config_file(trn_config);
        merge(trn_p_opt, cfgj, "field", "p", trn_p);
        merge(trn_char_opt, cfgj, "field", "char", trn_char);
        merge(trn_L_opt, cfgj, "network", "L", trn_L);
        merge(trn_delta_opt, cfgj, "network", "delta", trn_delta);
        merge(trn_M_opt, cfgj, "network", "M", trn_M);
        merge(trn_kind_opt, cfgj, "network", "kind", trn_kind);
        merge(trn_epochs_opt, cfgj, "training", "epochs", trn_epochs);
        merge(trn_batch_opt, cfgj, "training", "batch", trn_batch);
        merge(trn_eta_opt, cfgj, "training", "eta", trn_eta);
        merge(trn_seed_opt, cfgj, "training", "seed", trn_seed);
        merge_top(trn_target_opt, cfgj, "target", trn_target);
      }
      const FieldConfig cfg = make_field(trn_p, trn_char);
      const LayerKind kind = parse_kind(trn_kind);
      const CostMetric metric = trn_metric == "haar" ? CostMetric::HaarWeighted
                                : trn_metric == "euclidean"
                                    ? CostMetric::Euclidean
                                    : throw ConfigError("metric must be euclidean or haar");
      if (trn_samples < 1) throw ConfigError("samples must be >= 1");
      const TestFunction target =
          resolve_target(trn_target, cfg, trn_L + trn_delta, SampleMode::LeftEndpoint);

      // Seed layout: seed -> init, seed+1 -> data, seed+2 -> shuffling.
      const Network net = random_network(cfg, trn_L, trn_delta, trn_M, kind, trn_seed);
      SplitMix64 data_rng(trn_seed + 1);
      std::vector<TrainingSample> samples;
      for (uint32_t i = 0; i < trn_samples; ++i)
        samples.push_back(TrainingSample{random_input(cfg, trn_L, data_rng), target});

      const double initial = cost(net, samples, metric);
      if (!std::isfinite(initial)) throw std::runtime_error("initial cost is not finite");
      const TrainSchedule schedule{trn_epochs, trn_batch, trn_eta, trn_seed + 2, metric};
      const TrainResult result = train(net, samples, schedule);
      for (double c : result.cost_log)
        if (!std::isfinite(c)) throw std::runtime_error("training diverged: non-finite cost");
      const double final_cost = result.cost_log.empty() ? initial : result.cost_log.back();

      if (!trn_model_out.empty()) save_json(trn_model_out, to_json(result.net));
      if (!trn_log_out.empty()) write_text_file(trn_log_out, cost_log_csv(result.cost_log));
      std::cout << "initial_cost = " << format_g17(initial) << "\n";
      std::cout << "final_cost = " << format_g17(final_cost) << "\n";
      return final_cost < initial ? 0 : 1;
    }

    if (walsh_cmd->parsed()) {
      WalshBasis basis;
      FieldConfig cfg(2, Characteristic::PositiveChar);
      if (wls_basis == "theta") {
        basis = WalshBasis::Theta;
        cfg = make_field(wls_p, "pos");
      } else if (wls_basis == "gamma") {
        basis = WalshBasis::Gamma;
        cfg = make_field(wls_p, "zero");
      } else {
        throw ConfigError("basis must be theta or gamma");
      }
      const TestFunction phi = sample_function(make_target(wls_fn), cfg, wls_level,
                                               SampleMode::CellAverage, wls_sub);
      const std::vector<WalshCoefficient> coeffs = walsh_expand(phi, basis);
      const double total = lp_norm(phi, 2.0) * lp_norm(phi, 2.0);
      std::string errors = "level,l2_truncation_error\n";
      for (uint32_t l = 1; l <= wls_level; ++l) {
        double kept = 0.0;
        for (const WalshCoefficient& c : coeffs)
          if (c.character.level <= l) kept += std::norm(c.value);
        errors += std::to_string(l) + "," + format_g17(std::sqrt(std::max(0.0, total - kept))) +
                  "\n";
      }
      if (!wls_coeffs_out.empty()) write_text_file(wls_coeffs_out, walsh_coeffs_csv(coeffs));
      if (!wls_errors_out.empty()) write_text_file(wls_errors_out, errors);
      size_t nonzero = 0;
      for (const WalshCoefficient& c : coeffs)
        if (std::abs(c.value) > 1e-12) ++nonzero;
      std::cout << "coefficients = " << coeffs.size() << "\n";
      std::cout << "nonzero_coefficients = " << nonzero << "\n";
      return 0;
    }

    if (product_cmd->parsed()) {
      const json cfgj = load_config_file(prd_config);
      const uint32_t p = cfgj.at("field").at("p").get<uint32_t>();
      const FieldConfig cfg = make_field(p, cfgj.at("field").at("char").get<std::string>());
      const double M = cfgj.at("M").get<double>();
      NetworkBundle bundle;
      json report;
      report["components"] = json::array();
      double worst = 0.0;
      for (const json& comp : cfgj.at("components")) {
        const uint32_t L = comp.at("L").get<uint32_t>();
        const uint32_t delta = comp.at("delta").get<uint32_t>();
        const TestFunction target = resolve_target(comp.at("target").get<std::string>(), cfg,
                                                   L + delta, SampleMode::LeftEndpoint);
        const Network net = constructive_network(target, M, L).net;
        AffineChart chart = identity_chart();
        if (comp.contains("chart"))
          chart = AffineChart(parse_index(cfg, comp.at("chart").at("center").get<std::string>()),
                              comp.at("chart").at("N").get<int32_t>());
        const TestFunction out = forward(net, constant_function(cfg, L, 0.0)).output;
        const double err = lp_norm(difference(out, target), kInfNorm);
        worst = std::max(worst, err);
        report["components"].push_back(
            {{"target", comp.at("target")}, {"linf_error", err}});
        bundle.components.push_back(BundleComponent{chart, net});
      }
      report["max_linf_error"] = worst;
      if (!prd_bundle_out.empty()) save_json(prd_bundle_out, to_json(bundle));
      if (!prd_report_out.empty()) save_json(prd_report_out, report);
      std::cout << "components = " << bundle.components.size() << "\n";
      std::cout << "max_linf_error = " << format_g17(worst) << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::overflow_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
