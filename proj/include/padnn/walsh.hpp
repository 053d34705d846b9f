#pragma once

// Additive characters of the unit ball and the Fourier-Walsh analysis they
// induce.  A nontrivial character is labeled by a level l >= 1 and an index a
// with leading digit a_0 != 0 (indices divisible by ℘ would duplicate a
// lower-level character); together with the trivial character this gives
// exactly p^l characters of level <= l, an orthonormal basis of D^l ⊗ C.
//
// Values at a point x (only the first l digits matter):
//   positive characteristic:  exp(2πi/p * c),  c = sum_{s+t=l-1} a_s x_t mod p
//   characteristic zero:      exp(2πi * (rank(a) rank(x) mod p^l) / p^l)
//
// At p = 2 in positive characteristic the basis is the Walsh-Paley system.

#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "padnn/encoding.hpp"
#include "padnn/field.hpp"
#include "padnn/test_function.hpp"

namespace padnn {

namespace detail {

// exp(2πi k / n), exact at quarter turns so p = 2 characters are exactly ±1.
inline std::complex<double> unit_root(uint64_t k, uint64_t n) {
  k %= n;
  if (k == 0) return {1.0, 0.0};
  if (2 * k == n) return {-1.0, 0.0};
  if (4 * k == n) return {0.0, 1.0};
  if (4 * k == 3 * n) return {0.0, -1.0};
  const double angle = 6.283185307179586476925286766559 * static_cast<double>(k) /
                       static_cast<double>(n);
  return {std::cos(angle), std::sin(angle)};
}

}  // namespace detail

// Trivial (level 0) or the character x -> chi_K(℘^-level * index * x).
struct Character {
  uint32_t level = 0;
  TreeIndex index;  // level digits, leading digit != 0; empty when trivial

  bool is_trivial() const { return level == 0; }
};

inline Character trivial_character() { return Character{}; }

inline Character make_character(const FieldConfig& cfg, const TreeIndex& index) {
  if (index.level() == 0) return trivial_character();
  check_digits(cfg, index);
  if (index.digits[0] == 0)
    throw std::invalid_argument("make_character: leading digit must be nonzero");
  return Character{index.level(), index};
}

inline std::complex<double> char_eval(const FieldConfig& cfg, const Character& chi,
                                      const TreeIndex& x) {
  if (chi.is_trivial()) return {1.0, 0.0};
  if (x.level() < chi.level)
    throw std::invalid_argument("char_eval: point coarser than the character's level");
  check_digits(cfg, x);
  const uint32_t l = chi.level;
  if (cfg.characteristic == Characteristic::PositiveChar) {
    uint64_t c = 0;
    for (uint32_t s = 0; s < l; ++s)
      c += static_cast<uint64_t>(chi.index.digits[s]) * x.digits[l - 1 - s];
    return detail::unit_root(c % cfg.p, cfg.p);
  }
  const uint64_t n = group_order(cfg, l);
  const uint64_t xr = rank(cfg, x) % n;
  return detail::unit_root((rank(cfg, chi.index) % n) * xr % n, n);
}

// Trivial character first, then levels 1..max_level in rank order of the
// index; p^max_level characters in total.
inline std::vector<Character> enumerate_characters(const FieldConfig& cfg, uint32_t max_level) {
  std::vector<Character> out;
  out.reserve(group_order(cfg, max_level));
  out.push_back(trivial_character());
  for (uint32_t l = 1; l <= max_level; ++l) {
    const uint64_t n = group_order(cfg, l);
    for (uint64_t r = 0; r < n; ++r)
      if (r % cfg.p != 0) out.push_back(make_character(cfg, index_from_rank(cfg, l, r)));
  }
  return out;
}

// Integer display label n = sum n_i p^i of a character's index.
inline uint64_t character_label(const FieldConfig& cfg, const Character& chi) {
  return chi.is_trivial() ? 0 : rank(cfg, chi.index);
}

namespace detail {

inline std::vector<std::complex<double>> character_table(const FieldConfig& cfg,
                                                         const Character& chi, uint32_t level) {
  const uint64_t n = group_order(cfg, level);
  std::vector<std::complex<double>> table(n);
  for (uint64_t r = 0; r < n; ++r)
    table[r] = char_eval(cfg, chi, index_from_rank(cfg, level, r));
  return table;
}

}  // namespace detail

// Gram matrix <chi_i, chi_j> = p^-l sum_x chi_i(x) conj(chi_j(x)) over G_l.
inline std::vector<std::vector<std::complex<double>>> gram_matrix(
    const FieldConfig& cfg, const std::vector<Character>& characters, uint32_t level) {
  for (const Character& chi : characters)
    if (chi.level > level)
      throw std::invalid_argument("gram_matrix: evaluation level below a character's level");
  const uint64_t n = group_order(cfg, level);
  std::vector<std::vector<std::complex<double>>> tables;
  tables.reserve(characters.size());
  for (const Character& chi : characters)
    tables.push_back(detail::character_table(cfg, chi, level));
  const double weight = 1.0 / static_cast<double>(n);
  std::vector<std::vector<std::complex<double>>> gram(
      characters.size(), std::vector<std::complex<double>>(characters.size()));
  for (size_t i = 0; i < characters.size(); ++i)
    for (size_t j = 0; j < characters.size(); ++j) {
      std::complex<double> acc{0.0, 0.0};
      for (uint64_t r = 0; r < n; ++r) acc += tables[i][r] * std::conj(tables[j][r]);
      gram[i][j] = acc * weight;
    }
  return gram;
}

// Label conventions for the same character set: Theta is the carry-free
// labeling (positive characteristic only), Gamma the mod-p^l labeling
// (characteristic zero only).
enum class WalshBasis { RawCharacters, Theta, Gamma };

inline void check_basis(const FieldConfig& cfg, WalshBasis basis) {
  if (basis == WalshBasis::Theta && cfg.characteristic != Characteristic::PositiveChar)
    throw std::invalid_argument("walsh: Theta basis requires positive characteristic");
  if (basis == WalshBasis::Gamma && cfg.characteristic != Characteristic::CharZero)
    throw std::invalid_argument("walsh: Gamma basis requires characteristic zero");
}

struct WalshCoefficient {
  Character character;
  std::complex<double> value;
};

// C_chi = <phi, chi> over the p^l characters of level <= phi.level.
inline std::vector<WalshCoefficient> walsh_expand(const TestFunction& phi,
                                                  WalshBasis basis = WalshBasis::RawCharacters) {
  check_basis(phi.cfg, basis);
  const std::vector<Character> chars = enumerate_characters(phi.cfg, phi.level);
  const uint64_t n = group_order(phi.cfg, phi.level);
  const double weight = 1.0 / static_cast<double>(n);
  std::vector<WalshCoefficient> coeffs;
  coeffs.reserve(chars.size());
  for (const Character& chi : chars) {
    const std::vector<std::complex<double>> table =
        detail::character_table(phi.cfg, chi, phi.level);
    std::complex<double> acc{0.0, 0.0};
    for (uint64_t r = 0; r < n; ++r) acc += phi.coeffs[r] * std::conj(table[r]);
    coeffs.push_back(WalshCoefficient{chi, acc * weight});
  }
  return coeffs;
}

// phi(x) = sum C_chi chi(x); exact on D^level ⊗ C, so the imaginary part of a
// real function's reconstruction is numerical noise and is dropped.
inline TestFunction walsh_reconstruct(const FieldConfig& cfg,
                                      const std::vector<WalshCoefficient>& coeffs,
                                      uint32_t level) {
  const uint64_t n = group_order(cfg, level);
  std::vector<std::complex<double>> acc(n, {0.0, 0.0});
  for (const WalshCoefficient& c : coeffs) {
    const std::vector<std::complex<double>> table = detail::character_table(cfg, c.character, level);
    for (uint64_t r = 0; r < n; ++r) acc[r] += c.value * table[r];
  }
  std::vector<double> real(n);
  for (uint64_t r = 0; r < n; ++r) real[r] = acc[r].real();
  return TestFunction(cfg, level, std::move(real));
}

// Fourier-Walsh coefficients of a function on [0,1]: cell-average sampling
// followed by expansion in the chosen basis.
inline std::vector<WalshCoefficient> walsh_on_unit_interval(
    const std::function<double(double)>& f, const FieldConfig& cfg, uint32_t level,
    WalshBasis basis, uint32_t subsamples = 8) {
  check_basis(cfg, basis);
  const TestFunction phi = sample_function(f, cfg, level, SampleMode::CellAverage, subsamples);
  return walsh_expand(phi, basis);
}

}  // namespace padnn
