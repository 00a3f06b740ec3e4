#pragma once

// Weight arithmetic for the entropy recursion.
//
// Weights g_k(u) = 2^{H_k(u)} are non-negative integers. The recursion only
// needs three operations: the unit weight, acc <- 2*acc + h, and comparison.
// BigUInt is exact at any size; Checked128 is a fast path that throws
// WeightOverflow instead of wrapping.

#include <bit>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "gtbr/errors.hpp"

namespace gtbr {

using BigUInt = boost::multiprecision::cpp_int;

class Checked128 {
 public:
  using value_type = unsigned __int128;

  constexpr Checked128() = default;
  constexpr explicit Checked128(std::uint64_t v) : value_(v) {}

  constexpr value_type value() const noexcept { return value_; }

  // *this <- 2 * (*this) + h
  void double_add(const Checked128& h) {
    constexpr value_type kMax = std::numeric_limits<value_type>::max();
    if (value_ > (kMax - h.value_) / 2) throw WeightOverflow{};
    value_ = 2 * value_ + h.value_;
  }

  friend constexpr bool operator==(const Checked128&, const Checked128&) = default;
  friend constexpr auto operator<=>(const Checked128& a, const Checked128& b) {
    return a.value_ <=> b.value_;
  }

 private:
  value_type value_ = 0;
};

inline void double_add(BigUInt& acc, const BigUInt& h) {
  acc <<= 1;
  acc += h;
}

inline void double_add(Checked128& acc, const Checked128& h) { acc.double_add(h); }

template <class W>
W unit_weight() {
  return W(1u);
}

inline BigUInt to_big(const BigUInt& w) { return w; }

inline BigUInt to_big(const Checked128& w) {
  const auto v = w.value();
  BigUInt hi = static_cast<std::uint64_t>(v >> 64);
  hi <<= 64;
  hi += static_cast<std::uint64_t>(v);
  return hi;
}

// Floor of log2 for x >= 1 (index of the most significant bit).
inline std::size_t bit_floor_log2(const BigUInt& x) {
  return static_cast<std::size_t>(boost::multiprecision::msb(x));
}

// log2 of a positive big integer.
//
// Computed as msb + log2(top 64 bits / 2^63). The top word is converted to
// double (53-bit mantissa), so the absolute error is below 2^-52 bits and the
// relative error on any value >= 1 bit is below 1e-15. log2(0) is -inf.
inline double log2_weight(const BigUInt& x) {
  if (x.is_zero()) return -std::numeric_limits<double>::infinity();
  const std::size_t top_bit = bit_floor_log2(x);
  if (top_bit < 64) return std::log2(static_cast<double>(x.convert_to<std::uint64_t>()));
  const std::size_t shift = top_bit - 63;
  const auto top = BigUInt(x >> shift).convert_to<std::uint64_t>();
  return static_cast<double>(shift) + std::log2(static_cast<double>(top));
}

inline double log2_weight(const Checked128& x) { return log2_weight(to_big(x)); }

inline std::string to_decimal(const BigUInt& x) { return x.str(); }

}  // namespace gtbr
