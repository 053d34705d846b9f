#pragma once

// Exact arithmetic on the finite quotient groups G_l = O_K / ℘^l O_K of the
// ring of integers of a local field with residue field F_p.  Two ambient
// arithmetics are supported: positive characteristic (F_p[[T]], digit-wise,
// carry-free) and characteristic zero (Z_p, integer arithmetic with carries).
//
// Elements of G_l are digit tuples (a_0,...,a_{l-1}), a_i in {0,...,p-1},
// representing a_0 + a_1*℘ + ... + a_{l-1}*℘^{l-1}.  The canonical in-memory
// order is rank order, rank = sum a_i p^i (little-endian digits), which makes
// the truncation homomorphism Λ_l the map rank -> rank mod p^{l-1}.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace padnn {

enum class Characteristic {
  PositiveChar,  // F_p[[T]]: digit operations in F_p, no carries
  CharZero,      // Z_p: integer operations mod p^l, with carries
};

namespace detail {

inline bool is_prime(uint32_t n) {
  if (n < 2) return false;
  for (uint32_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

}  // namespace detail

// Ambient arithmetic: the prime p and the characteristic of the field.
struct FieldConfig {
  uint32_t p;
  Characteristic characteristic;

  FieldConfig(uint32_t prime, Characteristic ch) : p(prime), characteristic(ch) {
    if (!detail::is_prime(prime))
      throw std::invalid_argument("FieldConfig: p = " + std::to_string(prime) + " is not prime");
    if (prime > 251)
      throw std::invalid_argument("FieldConfig: p must fit in one byte (p <= 251)");
  }

  bool operator==(const FieldConfig&) const = default;
};

// p^level, guarded so that dense p^l x p^l matrices stay at desk scale.
inline uint64_t group_order(const FieldConfig& cfg, uint32_t level) {
  uint64_t n = 1;
  for (uint32_t i = 0; i < level; ++i) {
    n *= cfg.p;
    if (n > 0xFFFFFFFFull)
      throw std::overflow_error("group_order: p^l exceeds 32-bit capacity (p = " +
                                std::to_string(cfg.p) + ", l = " + std::to_string(level) + ")");
  }
  return n;
}

// An element of G_l.  digits[i] is the coefficient of ℘^i; level = digits.size().
struct TreeIndex {
  std::vector<uint8_t> digits;

  TreeIndex() = default;
  explicit TreeIndex(std::vector<uint8_t> d) : digits(std::move(d)) {}

  uint32_t level() const { return static_cast<uint32_t>(digits.size()); }

  bool operator==(const TreeIndex&) const = default;
};

inline void check_digits(const FieldConfig& cfg, const TreeIndex& x) {
  for (uint8_t d : x.digits)
    if (d >= cfg.p) throw std::invalid_argument("TreeIndex: digit out of range for p");
}

inline TreeIndex make_index(const FieldConfig& cfg, std::vector<uint8_t> digits) {
  TreeIndex x(std::move(digits));
  check_digits(cfg, x);
  return x;
}

// rank = sum a_i p^i; a bijection G_l -> {0,...,p^l-1}.
inline uint64_t rank(const FieldConfig& cfg, const TreeIndex& x) {
  uint64_t r = 0;
  uint64_t scale = 1;
  for (uint8_t d : x.digits) {
    r += d * scale;
    scale *= cfg.p;
  }
  return r;
}

inline TreeIndex index_from_rank(const FieldConfig& cfg, uint32_t level, uint64_t r) {
  if (r >= group_order(cfg, level))
    throw std::invalid_argument("index_from_rank: rank out of range");
  std::vector<uint8_t> digits(level);
  for (uint32_t i = 0; i < level; ++i) {
    digits[i] = static_cast<uint8_t>(r % cfg.p);
    r /= cfg.p;
  }
  return TreeIndex(std::move(digits));
}

// All of G_l in rank order.
inline std::vector<TreeIndex> enumerate(const FieldConfig& cfg, uint32_t level) {
  const uint64_t n = group_order(cfg, level);
  std::vector<TreeIndex> out;
  out.reserve(n);
  for (uint64_t r = 0; r < n; ++r) out.push_back(index_from_rank(cfg, level, r));
  return out;
}

// Λ_l: drop the last digit.  Group homomorphism G_l -> G_{l-1}.
inline TreeIndex project(const FieldConfig& cfg, const TreeIndex& x) {
  check_digits(cfg, x);
  if (x.level() == 0) throw std::invalid_argument("project: level-0 index has no parent");
  std::vector<uint8_t> d(x.digits.begin(), x.digits.end() - 1);
  return TreeIndex(std::move(d));
}

// The p liftings of j to G_{l+1}, in digit order of the appended digit.
inline std::vector<TreeIndex> lifts(const FieldConfig& cfg, const TreeIndex& j) {
  check_digits(cfg, j);
  group_order(cfg, j.level() + 1);  // capacity
  std::vector<TreeIndex> out;
  out.reserve(cfg.p);
  for (uint32_t c = 0; c < cfg.p; ++c) {
    std::vector<uint8_t> d = j.digits;
    d.push_back(static_cast<uint8_t>(c));
    out.push_back(TreeIndex(std::move(d)));
  }
  return out;
}

namespace detail {

inline void check_same_level(const TreeIndex& x, const TreeIndex& y, const char* op) {
  if (x.level() != y.level())
    throw std::invalid_argument(std::string(op) + ": mismatched levels");
}

}  // namespace detail

inline TreeIndex add(const FieldConfig& cfg, const TreeIndex& x, const TreeIndex& y) {
  detail::check_same_level(x, y, "add");
  check_digits(cfg, x);
  check_digits(cfg, y);
  if (cfg.characteristic == Characteristic::PositiveChar) {
    std::vector<uint8_t> d(x.level());
    for (uint32_t i = 0; i < x.level(); ++i)
      d[i] = static_cast<uint8_t>((x.digits[i] + y.digits[i]) % cfg.p);
    return TreeIndex(std::move(d));
  }
  const uint64_t n = group_order(cfg, x.level());
  return index_from_rank(cfg, x.level(), (rank(cfg, x) + rank(cfg, y)) % n);
}

inline TreeIndex neg(const FieldConfig& cfg, const TreeIndex& x) {
  check_digits(cfg, x);
  if (cfg.characteristic == Characteristic::PositiveChar) {
    std::vector<uint8_t> d(x.level());
    for (uint32_t i = 0; i < x.level(); ++i)
      d[i] = static_cast<uint8_t>((cfg.p - x.digits[i]) % cfg.p);
    return TreeIndex(std::move(d));
  }
  const uint64_t n = group_order(cfg, x.level());
  return index_from_rank(cfg, x.level(), (n - rank(cfg, x)) % n);
}

inline TreeIndex sub(const FieldConfig& cfg, const TreeIndex& x, const TreeIndex& y) {
  detail::check_same_level(x, y, "sub");
  return add(cfg, x, neg(cfg, y));
}

// PositiveChar: truncated polynomial product over F_p.  CharZero: rank product mod p^l.
inline TreeIndex multiply(const FieldConfig& cfg, const TreeIndex& x, const TreeIndex& y) {
  detail::check_same_level(x, y, "multiply");
  check_digits(cfg, x);
  check_digits(cfg, y);
  const uint32_t l = x.level();
  if (cfg.characteristic == Characteristic::PositiveChar) {
    std::vector<uint8_t> d(l, 0);
    for (uint32_t i = 0; i < l; ++i) {
      uint64_t acc = 0;
      for (uint32_t s = 0; s <= i; ++s)
        acc += static_cast<uint64_t>(x.digits[s]) * y.digits[i - s];
      d[i] = static_cast<uint8_t>(acc % cfg.p);
    }
    return TreeIndex(std::move(d));
  }
  const uint64_t n = group_order(cfg, l);
  return index_from_rank(cfg, l, (rank(cfg, x) * rank(cfg, y)) % n);
}

inline TreeIndex zero_index(uint32_t level) {
  return TreeIndex(std::vector<uint8_t>(level, 0));
}

inline TreeIndex one_index(uint32_t level) {
  if (level == 0) throw std::invalid_argument("one_index: G_0 is trivial");
  std::vector<uint8_t> d(level, 0);
  d[0] = 1;
  return TreeIndex(std::move(d));
}

// A level-l ball center + ℘^l O_K; its Haar measure is exactly p^{-l}.
struct BallId {
  TreeIndex center;

  uint32_t radius_exponent() const { return center.level(); }
};

inline double haar_measure(const FieldConfig& cfg, const BallId& ball) {
  double m = 1.0;
  for (uint32_t i = 0; i < ball.center.level(); ++i) m /= cfg.p;
  return m;
}

// Text form: digit string "a0a1...", most significant last; 0-9 then a-z.
inline std::string format_index(const TreeIndex& x) {
  std::string s;
  s.reserve(x.level());
  for (uint8_t d : x.digits) {
    if (d >= 36) throw std::invalid_argument("format_index: text form supports digits < 36");
    s.push_back(d < 10 ? static_cast<char>('0' + d) : static_cast<char>('a' + d - 10));
  }
  return s;
}

inline TreeIndex parse_index(const FieldConfig& cfg, const std::string& s) {
  std::vector<uint8_t> digits;
  digits.reserve(s.size());
  for (char c : s) {
    uint8_t d;
    if (c >= '0' && c <= '9')
      d = static_cast<uint8_t>(c - '0');
    else if (c >= 'a' && c <= 'z')
      d = static_cast<uint8_t>(c - 'a' + 10);
    else
      throw std::invalid_argument("parse_index: bad digit character");
    digits.push_back(d);
  }
  return make_index(cfg, std::move(digits));
}

}  // namespace padnn
