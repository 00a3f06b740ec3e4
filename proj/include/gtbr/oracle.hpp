#pragma once

// Brute-force reference for the information utility.
//
// Every conforming schedule l carries 2^{sum l} distinct packet contents, and
// the maximum-entropy flow is uniform over all (schedule, contents) pairs, so
// g_0(0) = sum over conforming schedules of 2^{sum l}. This walks the schedules
// one slot at a time with the same carry rule as evolve() and never touches
// the backward recursion.

#include <cstdint>
#include <string>

#include "gtbr/errors.hpp"
#include "gtbr/regulator.hpp"
#include "gtbr/weights.hpp"

namespace gtbr {

struct OracleResult {
  BigUInt weight;
  double bits = 0.0;
  std::uint64_t schedules = 0;
};

inline OracleResult oracle_utility(const RegulatorSpec& spec, std::uint64_t max_schedules = 10'000'000) {
  OracleResult out;
  auto walk = [&](auto&& self, std::size_t k, Tokens u, std::size_t overt) -> void {
    if (k == spec.horizon()) {
      if (++out.schedules > max_schedules)
        throw EnumerationTooLarge("more than " + std::to_string(max_schedules) + " conforming schedules");
      BigUInt term = 1;
      term <<= static_cast<unsigned>(overt);
      out.weight += term;
      return;
    }
    const Tokens available = u + spec.increment(k);
    for (Tokens l = 0; l <= available; ++l) {
      self(self, k + 1, spec.carry(k, available - l), overt + static_cast<std::size_t>(l));
    }
  };
  walk(walk, 0, 0, 0);

  out.bits = log2_weight(out.weight);
  return out;
}

}  // namespace gtbr
