#pragma once

// The base-p digit expansion x = sum x_i p^{-i-1} of the unit interval, its
// reinterpretation as a point of the ring of integers (the measure-preserving
// map into digit space), and sampling of real functions on [0,1] into test
// functions.
//
// Digits are extracted exactly: the input double is decomposed as m * 2^-s
// and floor(x * p^d) is computed in 128-bit integer arithmetic, which agrees
// with the interval recursion at every depth and is exact for every
// representable x.  The recursion's half-open intervals pick the expansion
// ending in zeros for p-power rationals; x = 1 is defined as all digits p-1.

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "padnn/field.hpp"
#include "padnn/test_function.hpp"

namespace padnn {

struct UnitDigits {
  uint32_t p;
  std::vector<uint8_t> digits;  // x_0, x_1, ...: x = sum digits[i] p^{-i-1}

  UnitDigits(uint32_t prime, std::vector<uint8_t> d) : p(prime), digits(std::move(d)) {
    if (!detail::is_prime(prime)) throw std::invalid_argument("UnitDigits: p is not prime");
    for (uint8_t x : digits)
      if (x >= p) throw std::invalid_argument("UnitDigits: digit out of range");
  }

  uint32_t depth() const { return static_cast<uint32_t>(digits.size()); }
};

namespace detail {

inline uint64_t pow_u63(uint32_t p, uint32_t d) {
  uint64_t n = 1;
  for (uint32_t i = 0; i < d; ++i) {
    if (n > (0x7FFFFFFFFFFFFFFFull / p))
      throw std::overflow_error("encoding: p^depth exceeds 63-bit capacity");
    n *= p;
  }
  return n;
}

// Digits of x at depth d are the base-p digits of floor(x p^d), most
// significant first.
inline std::vector<uint8_t> digits_from_scaled(uint64_t n, uint32_t p, uint32_t depth) {
  std::vector<uint8_t> out(depth);
  for (uint32_t i = 0; i < depth; ++i) {
    out[depth - 1 - i] = static_cast<uint8_t>(n % p);
    n /= p;
  }
  return out;
}

}  // namespace detail

inline UnitDigits rho_encode(double x, uint32_t p, uint32_t depth) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("rho_encode: x must lie in [0,1]");
  if (depth < 1) throw std::invalid_argument("rho_encode: depth must be >= 1");
  const uint64_t pd = detail::pow_u63(p, depth);
  if (x == 1.0) return UnitDigits(p, std::vector<uint8_t>(depth, static_cast<uint8_t>(p - 1)));
  if (x == 0.0) return UnitDigits(p, std::vector<uint8_t>(depth, 0));

  int e = 0;
  const double fr = std::frexp(x, &e);           // x = fr * 2^e, fr in [0.5, 1)
  const auto m = static_cast<uint64_t>(std::ldexp(fr, 53));  // exact, < 2^53
  const int s = 53 - e;                          // x = m * 2^-s, s >= 53 for x < 1
  uint64_t n = 0;
  if (s < 128) {
    const unsigned __int128 prod = static_cast<unsigned __int128>(m) * pd;
    n = static_cast<uint64_t>(prod >> s);
  }
  return UnitDigits(p, detail::digits_from_scaled(n, p, depth));
}

// Exact digits of x = m / p^n (0 <= m <= p^n); the double entry point cannot
// represent such x for p > 2.
inline UnitDigits rho_encode_pow_rational(uint32_t p, uint64_t m, uint32_t n, uint32_t depth) {
  if (depth < 1) throw std::invalid_argument("rho_encode_pow_rational: depth must be >= 1");
  const uint64_t pn = detail::pow_u63(p, n);
  detail::pow_u63(p, depth);
  if (m > pn) throw std::invalid_argument("rho_encode_pow_rational: m/p^n must lie in [0,1]");
  if (m == pn)
    return UnitDigits(p, std::vector<uint8_t>(depth, static_cast<uint8_t>(p - 1)));
  uint64_t scaled;  // floor(m p^depth / p^n)
  if (depth >= n) {
    scaled = m;
    for (uint32_t i = 0; i < depth - n; ++i) scaled *= p;
  } else {
    scaled = m;
    for (uint32_t i = 0; i < n - depth; ++i) scaled /= p;
  }
  return UnitDigits(p, detail::digits_from_scaled(scaled, p, depth));
}

// sum digits[i] p^{-i-1}, Neumaier-compensated in order of increasing i.
inline double rho_decode(const UnitDigits& d) {
  double sum = 0.0;
  double comp = 0.0;
  double scale = 1.0 / d.p;
  for (uint8_t x : d.digits) {
    const double term = x * scale;
    const double t = sum + term;
    if (std::fabs(sum) >= std::fabs(term))
      comp += (sum - t) + term;
    else
      comp += (term - t) + sum;
    sum = t;
    scale /= d.p;
  }
  return sum + comp;
}

// Reinterpret the digit sequence as a level-d point of digit space (the
// truncation of the ring-of-integers image of x).
inline TreeIndex to_field(const UnitDigits& d) {
  return TreeIndex(d.digits);
}

// Left endpoint of the interval cell owned by a tree index: sum a_i p^{-i-1}.
inline double left_endpoint(uint32_t p, const TreeIndex& idx) {
  return rho_decode(UnitDigits(p, idx.digits));
}

enum class SampleMode {
  LeftEndpoint,  // value at the cell's left endpoint
  CellAverage,   // midpoint-rule average over the cell
};

// Sample f : [0,1] -> R into a level-l test function.  Each index owns the
// cell [alpha, alpha + p^-l) with alpha its left endpoint.
inline TestFunction sample_function(const std::function<double(double)>& f,
                                    const FieldConfig& cfg, uint32_t level,
                                    SampleMode mode = SampleMode::LeftEndpoint,
                                    uint32_t subsamples = 8) {
  if (subsamples < 1) throw std::invalid_argument("sample_function: subsamples must be >= 1");
  const uint64_t n = group_order(cfg, level);
  const double width = 1.0 / static_cast<double>(n);
  std::vector<double> coeffs(n);
  for (uint64_t r = 0; r < n; ++r) {
    const TreeIndex idx = index_from_rank(cfg, level, r);
    const double alpha = left_endpoint(cfg.p, idx);
    double value;
    if (mode == SampleMode::LeftEndpoint) {
      value = f(alpha);
    } else {
      double acc = 0.0;
      for (uint32_t k = 0; k < subsamples; ++k)
        acc += f(alpha + (k + 0.5) * width / subsamples);
      value = acc / subsamples;
    }
    if (!std::isfinite(value))
      throw std::runtime_error("sample_function: f is not finite on the cell of index " +
                               format_index(idx));
    coeffs[r] = value;
  }
  return TestFunction(cfg, level, std::move(coeffs));
}

}  // namespace padnn
