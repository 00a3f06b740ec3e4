#pragma once

// Bounded integer compositions: ordered tuples of `parts` integers, each in
// [lo, hi], whose sum lies in [sum_min, sum_max]. Visited in lexicographic
// order, largest first.

#include <cstddef>
#include <vector>

#include "gtbr/regulator.hpp"

namespace gtbr {

struct CompositionBounds {
  std::size_t parts = 0;
  Tokens lo = 0;
  Tokens hi = 0;
  Tokens sum_min = 0;
  Tokens sum_max = 0;
};

// Calls fn(const std::vector<Tokens>&) for each composition; stops early if
// fn returns false. Returns false iff stopped early.
template <class Fn>
bool for_each_composition(const CompositionBounds& b, Fn&& fn) {
  std::vector<Tokens> current(b.parts, 0);
  if (b.lo > b.hi) return true;

  auto rec = [&](auto&& self, std::size_t i, Tokens sum) -> bool {
    if (i == b.parts) {
      if (sum < b.sum_min || sum > b.sum_max) return true;
      return fn(static_cast<const std::vector<Tokens>&>(current));
    }
    const auto rest = static_cast<Tokens>(b.parts - i - 1);
    // Remaining parts contribute between rest*lo and rest*hi.
    const Tokens top = std::min(b.hi, b.sum_max - sum - rest * b.lo);
    const Tokens bottom = std::max(b.lo, b.sum_min - sum - rest * b.hi);
    for (Tokens x = top; x >= bottom; --x) {
      current[i] = x;
      if (!self(self, i + 1, sum + x)) return false;
    }
    return true;
  };
  return rec(rec, 0, 0);
}

template <class Fn>
bool for_each_composition(std::size_t parts, Tokens total, Tokens lo, Tokens hi, Fn&& fn) {
  return for_each_composition(CompositionBounds{parts, lo, hi, total, total}, std::forward<Fn>(fn));
}

inline std::vector<std::vector<Tokens>> collect_compositions(const CompositionBounds& b) {
  std::vector<std::vector<Tokens>> out;
  for_each_composition(b, [&](const std::vector<Tokens>& c) {
    out.push_back(c);
    return true;
  });
  return out;
}

}  // namespace gtbr
