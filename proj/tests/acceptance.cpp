// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion.  Criterion 9 drives the CLI
// binary end to end; pass its path as argv[1] (ctest does).

#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

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

using namespace padnn;

namespace {

std::string g_cli;

std::vector<FieldConfig> all_configs(uint32_t p) {
  return {FieldConfig(p, Characteristic::PositiveChar), FieldConfig(p, Characteristic::CharZero)};
}

TestFunction random_function(const FieldConfig& cfg, uint32_t level, SplitMix64& rng,
                             double bound = 1.0) {
  std::vector<double> v(group_order(cfg, level));
  for (double& x : v) x = rng.next_in(-bound, bound);
  return TestFunction(cfg, level, std::move(v));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- criterion 1: backprop vs central finite differences ----
bool criterion_gradients(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  const double h = 1e-6;
  double worst = 0.0;
  uint64_t seed = 20250 * 7;
  for (uint32_t p : {2u, 3u})
    for (const auto& cfg : all_configs(p))
      for (uint32_t L : {1u, 2u})
        for (auto kind : {LayerKind::Dense, LayerKind::Conv})
          for (int rep = 0; rep < 10; ++rep) {
            SplitMix64 rng(seed);
            const Network net = random_network(cfg, L, 2, 2.0, kind, seed++);
            const TrainingSample s{random_function(cfg, L, rng),
                                   random_function(cfg, L + 2, rng)};
            const Gradient grad = backprop(net, s);
            for (size_t li = 0; li < net.layers.size(); ++li) {
              for (int which = 0; which < 2; ++which) {
                const bool is_weight = which == 0;
                const auto& analytic =
                    is_weight ? grad.layers[li].weights : grad.layers[li].bias;
                for (size_t i = 0; i < analytic.size(); ++i) {
                  Network probe = net;
                  auto& v = is_weight ? probe.layers[li].weights : probe.layers[li].bias;
                  const double orig = v[i];
                  v[i] = orig + h;
                  const double up = cost(probe, {&s, 1});
                  v[i] = orig - h;
                  const double down = cost(probe, {&s, 1});
                  const double numeric = (up - down) / (2.0 * h);
                  const double rel = std::fabs(analytic[i] - numeric) /
                                     std::max({1.0, std::fabs(analytic[i]), std::fabs(numeric)});
                  worst = std::max(worst, rel);
                  if (rel >= 1e-6) {
                    detail = "relative error " + format_g17(rel);
                    return false;
                  }
                }
              }
            }
          }
  const double elapsed = seconds_since(t0);
  detail = "160 networks, worst relative error " + format_g17(worst) + ", " +
           format_g17(elapsed) + " s";
  return elapsed < 30.0;
}

// ---- criterion 2: constructive networks reproduce targets exactly ----
bool criterion_constructive(std::string& detail) {
  const FieldConfig cfg(2, Characteristic::PositiveChar);
  SplitMix64 rng(202);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const TestFunction target = random_function(cfg, 4, rng, 0.9 * 2.0);
    const Network net = constructive_network(target, 2.0, 2).net;
    for (int rep = 0; rep < 5; ++rep) {
      const TestFunction out = forward(net, random_function(cfg, 2, rng)).output;
      for (size_t i = 0; i < out.coeffs.size(); ++i)
        worst = std::max(worst, std::fabs(out.coeffs[i] - target.coeffs[i]));
    }
  }
  detail = "20 targets x 5 inputs, worst sup error " + format_g17(worst);
  return worst < 1e-12;
}

// ---- criterion 3: robustness ball valid at 0.99x, non-vacuous at 10x ----
bool criterion_robustness(std::string& detail) {
  const FieldConfig cfg(2, Characteristic::PositiveChar);
  const double eps = 0.1;
  SplitMix64 rng(203);
  const TestFunction target = random_function(cfg, 4, rng, 0.9 * 2.0);
  const auto [net, ball] = constructive_network(target, 2.0, 2, eps, 1.0);

  const auto perturb = [&](double scale) {
    Network wobbled = net;
    for (Layer& layer : wobbled.layers) {
      for (double& w : layer.weights)
        w += (rng.next() & 1 ? 1.0 : -1.0) * scale * ball.weight_radius;
      for (double& b : layer.bias)
        b += (rng.next() & 1 ? 1.0 : -1.0) * scale * ball.theta_radius;
    }
    const TestFunction out = forward(wobbled, random_function(cfg, 2, rng)).output;
    double err = 0.0;
    for (size_t i = 0; i < out.coeffs.size(); ++i)
      err = std::max(err, std::fabs(out.coeffs[i] - target.coeffs[i]));
    return err;
  };

  double worst_inside = 0.0;
  for (int rep = 0; rep < 100; ++rep) worst_inside = std::max(worst_inside, perturb(0.99));
  int violations = 0;
  for (int rep = 0; rep < 100; ++rep)
    if (perturb(10.0) >= eps) ++violations;
  detail = "inside: worst " + format_g17(worst_inside) + " < 0.1; at 10x: " +
           std::to_string(violations) + "/100 violations";
  return worst_inside < eps && violations >= 1;
}

// ---- criterion 4: group laws, homomorphism, non-closure ----
bool criterion_group_laws(std::string& detail) {
  for (uint32_t p : {2u, 3u})
    for (const auto& cfg : all_configs(p))
      for (uint32_t l = 1; l <= 3; ++l) {
        const auto g = enumerate(cfg, l);
        const auto zero = zero_index(l);
        for (const auto& x : g) {
          if (!(add(cfg, x, zero) == x)) return false;
          if (!(add(cfg, x, neg(cfg, x)) == zero)) return false;
          for (const auto& y : g) {
            if (!(add(cfg, x, y) == add(cfg, y, x))) return false;
            if (l >= 1 && !(project(cfg, add(cfg, x, y)) ==
                            add(cfg, project(cfg, x), project(cfg, y))))
              return false;
            for (const auto& z : g)
              if (!(add(cfg, add(cfg, x, y), z) == add(cfg, x, add(cfg, y, z)))) return false;
          }
        }
      }
  // Characteristic zero: the level-1 representatives are not closed at l = 2.
  const FieldConfig zero_cfg(2, Characteristic::CharZero);
  const TreeIndex one = index_from_rank(zero_cfg, 2, 1);
  const bool non_closure = rank(zero_cfg, add(zero_cfg, one, one)) == 2;
  const FieldConfig pos_cfg(2, Characteristic::PositiveChar);
  const TreeIndex one_pos = index_from_rank(pos_cfg, 2, 1);
  const bool closed_pos = rank(pos_cfg, add(pos_cfg, one_pos, one_pos)) == 0;
  detail = "abelian laws and homomorphism exhaustive (p in {2,3}, l <= 3, both); 1+1=2 outside "
           "{0,1} in char 0";
  return non_closure && closed_pos;
}

// ---- criterion 5: encoding fidelity ----
bool criterion_encoding(std::string& detail) {
  SplitMix64 rng(205);
  // Round trip: digit value equals floor(x p^d) exactly (forces the p^-d
  // truncation bound), and the double decode is within one final rounding.
  const std::array<std::pair<uint32_t, uint32_t>, 3> cases{{{2u, 52u}, {3u, 32u}, {5u, 22u}}};
  for (const auto& [p, depth] : cases) {
    unsigned __int128 pd = 1;
    for (uint32_t i = 0; i < depth; ++i) pd *= p;
    const double ulp_bound = std::pow(double(p), -double(depth)) + 0x1.0p-52;
    for (int rep = 0; rep < 1000; ++rep) {
      const double x = rng.next_double();
      int e = 0;
      const double fr = std::frexp(x, &e);
      const auto m = static_cast<uint64_t>(std::ldexp(fr, 53));
      const int s = 53 - e;
      const unsigned __int128 expect =
          s >= 128 ? 0 : (static_cast<unsigned __int128>(m) * pd) >> s;
      const UnitDigits d = rho_encode(x, p, depth);
      unsigned __int128 n = 0;
      for (uint8_t dig : d.digits) n = n * p + dig;
      if (n != expect) {
        detail = "round trip broke at x = " + format_g17(x);
        return false;
      }
      if (std::fabs(rho_decode(d) - x) > ulp_bound) {
        detail = "decode off at x = " + format_g17(x);
        return false;
      }
    }
  }
  // Exact finite digits for powers-of-p rationals.
  for (uint32_t p : {2u, 3u, 5u}) {
    for (int rep = 0; rep < 100; ++rep) {
      const uint32_t nexp = 1 + static_cast<uint32_t>(rng.next_below(12));
      uint64_t pn = 1;
      for (uint32_t i = 0; i < nexp; ++i) pn *= p;
      const uint64_t m = 1 + rng.next_below(pn - 1);
      const UnitDigits d = rho_encode_pow_rational(p, m, nexp, nexp + 6);
      for (uint32_t i = nexp; i < d.depth(); ++i)
        if (d.digits[i] != 0) {
          detail = "nonzero tail digit for m/p^n";
          return false;
        }
    }
  }
  // Monte-Carlo pushforward: every level-2 ball within 3 sigma of p^-2.
  std::string mc;
  for (uint32_t p : {2u, 3u, 5u}) {
    const int n = 100000;
    const uint64_t balls = static_cast<uint64_t>(p) * p;
    std::vector<int> hits(balls, 0);
    const FieldConfig cfg(p, Characteristic::PositiveChar);
    for (int i = 0; i < n; ++i)
      hits[rank(cfg, to_field(rho_encode(rng.next_double(), p, 2)))] += 1;
    const double q = 1.0 / static_cast<double>(balls);
    const double sigma = std::sqrt(q * (1.0 - q) / n);
    double worst = 0.0;
    for (int h : hits) worst = std::max(worst, std::fabs(h / double(n) - q));
    mc += " p=" + std::to_string(p) + ": " + format_g17(worst / sigma) + " sigma;";
    if (worst > 3.0 * sigma) {
      detail = "pushforward off at p = " + std::to_string(p);
      return false;
    }
  }
  detail = "round trips exact, rational tails zero, MC max deviation" + mc;
  return true;
}

// ---- criterion 6: Gram identity, Parseval, reconstruction ----
bool criterion_orthonormality(std::string& detail) {
  double worst_gram = 0.0, worst_parseval = 0.0, worst_recon = 0.0;
  SplitMix64 rng(206);
  for (uint32_t p : {2u, 3u})
    for (const auto& cfg : all_configs(p))
      for (uint32_t l = 1; l <= 3; ++l) {
        const auto chars = enumerate_characters(cfg, l);
        if (chars.size() != group_order(cfg, l)) {
          detail = "character count mismatch";
          return false;
        }
        const auto gram = gram_matrix(cfg, chars, l);
        for (size_t i = 0; i < chars.size(); ++i)
          for (size_t j = 0; j < chars.size(); ++j)
            worst_gram =
                std::max(worst_gram, std::abs(gram[i][j] - (i == j ? 1.0 : 0.0)));
        for (int rep = 0; rep < 100 / 4; ++rep) {
          const TestFunction phi = random_function(cfg, l, rng, 2.0);
          const auto coeffs = walsh_expand(phi);
          double sum = 0.0;
          for (const auto& c : coeffs) sum += std::norm(c.value);
          const double n2 = lp_norm(phi, 2.0);
          worst_parseval = std::max(worst_parseval, std::fabs(sum - n2 * n2));
          const TestFunction back = walsh_reconstruct(cfg, coeffs, l);
          for (size_t i = 0; i < phi.coeffs.size(); ++i)
            worst_recon = std::max(worst_recon, std::fabs(back.coeffs[i] - phi.coeffs[i]));
        }
      }
  detail = "gram " + format_g17(worst_gram) + ", parseval " + format_g17(worst_parseval) +
           ", reconstruction " + format_g17(worst_recon);
  return worst_gram < 1e-12 && worst_parseval < 1e-10 && worst_recon < 1e-10;
}

// ---- criterion 7: Walsh-Paley agreement at p = 2 ----
bool criterion_walsh_paley(std::string& detail) {
  const FieldConfig cfg(2, Characteristic::PositiveChar);
  for (uint32_t l = 0; l <= 3; ++l)
    for (const Character& chi : enumerate_characters(cfg, l)) {
      uint64_t n = 0;
      if (!chi.is_trivial()) {
        const uint64_t r = rank(cfg, chi.index);
        for (uint32_t i = 0; i < chi.level; ++i)
          if (r & (1ull << i)) n |= 1ull << (chi.level - 1 - i);
      }
      for (const auto& x : enumerate(cfg, 3)) {
        const std::complex<double> v = char_eval(cfg, chi, x);
        const int expected = std::popcount(n & rank(cfg, x)) % 2 == 0 ? 1 : -1;
        if (v.imag() != 0.0 || v.real() != expected) {
          detail = "mismatch at character n = " + std::to_string(n);
          return false;
        }
      }
    }
  detail = "all characters of level <= 3 match the XOR-parity generator exactly";
  return true;
}

// ---- criterion 8: Lebesgue/Haar isometry on step functions ----
bool criterion_isometry(std::string& detail) {
  SplitMix64 rng(208);
  double worst = 0.0;
  for (uint32_t p : {2u, 3u}) {
    const FieldConfig cfg(p, Characteristic::PositiveChar);
    for (uint32_t l = 1; l <= 3; ++l)
      for (int rep = 0; rep < 50; ++rep) {
        const uint64_t cells = group_order(cfg, l);
        std::vector<double> values(cells);
        for (double& v : values) v = rng.next_in(-3.0, 3.0);
        const auto f = [&](double x) {
          const auto j = static_cast<uint64_t>(x * static_cast<double>(cells) + 1e-9);
          return values[std::min(j, cells - 1)];
        };
        double lebesgue_sq = 0.0;
        for (double v : values) lebesgue_sq += v * v / static_cast<double>(cells);
        const TestFunction phi = sample_function(f, cfg, l);
        worst = std::max(worst, std::fabs(lp_norm(phi, 2.0) - std::sqrt(lebesgue_sq)));
      }
  }
  detail = "300 step functions, worst norm gap " + format_g17(worst);
  return worst < 1e-12;
}

// ---- criterion 9: cmd_train end to end, reproducible, < 60 s ----
std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool criterion_training(std::string& detail) {
  if (g_cli.empty()) {
    detail = "no CLI path given (pass the padnn binary as argv[1])";
    return false;
  }
  const auto t0 = std::chrono::steady_clock::now();
  char tmpl[] = "/tmp/padnn_acceptance_XXXXXX";
  const char* dir = mkdtemp(tmpl);
  if (dir == nullptr) {
    detail = "mkdtemp failed";
    return false;
  }
  const std::string base = dir;
  const std::string args =
      " train --p 2 --char pos -L 3 --delta 2 -M 2 --epochs 200 --batch 8 --eta 0.05 --seed 1 "
      "--target sin2pi ";
  const std::string run1 = g_cli + args + "--out-model " + base + "/m1.json --out-log " + base +
                           "/l1.csv > " + base + "/out1.txt 2>&1";
  const std::string run2 = g_cli + args + "--out-model " + base + "/m2.json --out-log " + base +
                           "/l2.csv > " + base + "/out2.txt 2>&1";
  const int rc1 = std::system(run1.c_str());
  const int rc2 = std::system(run2.c_str());
  if (!WIFEXITED(rc1) || WEXITSTATUS(rc1) != 0 || !WIFEXITED(rc2) || WEXITSTATUS(rc2) != 0) {
    detail = "cmd_train exited nonzero";
    return false;
  }
  const std::string out = slurp(base + "/out1.txt");
  double initial = 0.0, final_cost = 0.0;
  if (std::sscanf(out.c_str(), "initial_cost = %lf\nfinal_cost = %lf", &initial, &final_cost) !=
      2) {
    detail = "could not parse cmd_train output";
    return false;
  }
  const bool ratio_ok = final_cost < 0.5 * initial;
  const bool bytes_ok =
      slurp(base + "/m1.json") == slurp(base + "/m2.json") &&
      !slurp(base + "/l1.csv").empty() && slurp(base + "/l1.csv") == slurp(base + "/l2.csv");
  const double elapsed = seconds_since(t0);
  detail = "cost " + format_g17(initial) + " -> " + format_g17(final_cost) +
           (bytes_ok ? ", reruns byte-identical" : ", rerun differs!") + ", " +
           format_g17(elapsed) + " s";
  return ratio_ok && bytes_ok && elapsed < 60.0;
}

// ---- criterion 10: refinement monotonicity against a level-8 reference ----
bool criterion_refinement(std::string& detail) {
  const FieldConfig cfg(2, Characteristic::PositiveChar);
  const auto f = make_target("sin2pi");
  const TestFunction reference = sample_function(f, cfg, 8);
  double prev = std::numeric_limits<double>::infinity();
  std::string errs;
  for (uint32_t delta = 1; delta <= 4; ++delta) {
    const TestFunction target = sample_function(f, cfg, 2 + delta);
    const Network net = constructive_network(target, 2.0, 2).net;
    const TestFunction out = embed(forward(net, constant_function(cfg, 2, 0.0)).output, 8);
    double sq = 0.0;
    for (size_t i = 0; i < out.coeffs.size(); ++i) {
      const double diff = out.coeffs[i] - reference.coeffs[i];
      sq += diff * diff / static_cast<double>(out.coeffs.size());
    }
    const double err = std::sqrt(sq);
    errs += (delta == 1 ? "" : " > ") + format_g17(err);
    if (err > prev) {
      detail = "error increased at delta = " + std::to_string(delta);
      return false;
    }
    prev = err;
  }
  detail = "L2 errors " + errs;
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_cli = argv[1];
  struct Criterion {
    int id;
    const char* name;
    std::function<bool(std::string&)> run;
  };
  const std::vector<Criterion> criteria{
      {1, "gradient correctness (backprop vs central differences)", criterion_gradients},
      {2, "exact constructive approximation", criterion_constructive},
      {3, "robustness ball (valid at 0.99x, non-vacuous at 10x)", criterion_robustness},
      {4, "group and homomorphism laws", criterion_group_laws},
      {5, "encoding fidelity (round trip, rationals, pushforward)", criterion_encoding},
      {6, "orthonormality and Parseval", criterion_orthonormality},
      {7, "Walsh-Paley agreement at p = 2", criterion_walsh_paley},
      {8, "Lebesgue/Haar isometry on step functions", criterion_isometry},
      {9, "training end to end (reproducible, cost halved)", criterion_training},
      {10, "refinement monotonicity", criterion_refinement},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    if (!ok) ++failures;
    std::printf("[%s] criterion %2d: %s%s%s\n", ok ? "PASS" : "FAIL", c.id, c.name,
                detail.empty() ? "" : " -- ", detail.c_str());
  }
  if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
