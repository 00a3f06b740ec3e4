#pragma once

// Exact maximum flow entropy of a regulator by backward recursion.
//
// With g_k(u) = 2^{H*_k(u)}, the optimal entropy satisfies
//
//   g_N(u) = 1
//   g_k(u) = sum_{l=0}^{u+r_k} 2^l g_{k+1}(min(u + r_k - l, B_k))
//
// (no clamp at k = N-1). All g are integers, so the table is built exactly and
// entropies are derived from it only when reported. The information utility of
// the regulator is H*_0(0) = log2 g_0(0).
//
// Substituting j = u + r_k - l turns the sum into a running prefix:
//   S(t) = sum_{j=0}^{t} 2^{t-j} h(j),  h(j) = g_{k+1}(min(j, B_k)),
//   S(t) = 2 S(t-1) + h(t),             g_k(u) = S(u + r_k),
// which makes each stage linear in its number of states.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gtbr/errors.hpp"
#include "gtbr/regulator.hpp"
#include "gtbr/weights.hpp"

namespace gtbr {

struct SolveLimits {
  std::size_t max_table_entries = std::size_t{1} << 22;
  std::size_t max_weight_bits = std::size_t{1} << 16;
};

// One backward step. `next(j)` returns g_{k+1} at the residual j after the
// optional clamp has been applied by the caller-supplied `clamp`. Writes
// g_k(u) for u in [0, bound] into `out`.
template <class W, class NextFn>
void backward_stage(NextFn&& next, Tokens increment, std::optional<Tokens> depth, Tokens bound,
                    std::vector<W>& out) {
  out.clear();
  out.reserve(static_cast<std::size_t>(bound + 1));
  W running{};
  const Tokens last = bound + increment;
  for (Tokens t = 0; t <= last; ++t) {
    const Tokens j = depth ? std::min(t, *depth) : t;
    double_add(running, next(j));
    if (t >= increment) out.push_back(running);
  }
}

template <class W = BigUInt>
class EntropySolution {
 public:
  const RegulatorSpec& spec() const noexcept { return spec_; }
  std::size_t horizon() const noexcept { return spec_.horizon(); }

  // Largest tabulated state at stage k: 0 at k = 0, B_{k-1} for 1 <= k < N,
  // and U_{N-1} + r_{N-1} at k = N.
  Tokens state_bound(std::size_t k) const {
    check_stage(k, horizon());
    return static_cast<Tokens>(weights_[k].size()) - 1;
  }

  std::span<const W> stage(std::size_t k) const {
    check_stage(k, horizon());
    return weights_[k];
  }

  const W& weight(std::size_t k, Tokens u) const {
    check_stage(k, horizon());
    if (u < 0 || u > state_bound(k))
      throw StateOutOfRange("state " + std::to_string(u) + " outside [0, " + std::to_string(state_bound(k)) +
                            "] at stage " + std::to_string(k));
    return weights_[k][static_cast<std::size_t>(u)];
  }

  // H*_k(u) in bits.
  double entropy(std::size_t k, Tokens u) const { return log2_weight(weight(k, u)); }

  const W& utility_weight() const { return weights_[0][0]; }

  std::size_t table_entries() const {
    std::size_t n = 0;
    for (const auto& s : weights_) n += s.size();
    return n;
  }

 private:
  template <class V>
  friend EntropySolution<V> solve(const RegulatorSpec&, const SolveLimits&);

  explicit EntropySolution(RegulatorSpec spec) : spec_(std::move(spec)) {}

  static void check_stage(std::size_t k, std::size_t n) {
    if (k > n) throw StateOutOfRange("stage " + std::to_string(k) + " beyond horizon " + std::to_string(n));
  }

  RegulatorSpec spec_;
  std::vector<std::vector<W>> weights_;
};

template <class W = BigUInt>
EntropySolution<W> solve(const RegulatorSpec& spec, const SolveLimits& limits = {}) {
  const std::size_t n = spec.horizon();

  std::vector<Tokens> bounds(n + 1, 0);
  for (std::size_t k = 1; k < n; ++k) bounds[k] = spec.depth(k - 1);
  bounds[n] = bounds[n - 1] + spec.increment(n - 1);

  std::size_t entries = 0;
  for (Tokens b : bounds) {
    entries += static_cast<std::size_t>(b) + 1;
    if (entries > limits.max_table_entries)
      throw ResourceLimit("weight table needs more than " + std::to_string(limits.max_table_entries) +
                          " entries");
  }

  EntropySolution<W> out(spec);
  out.weights_.resize(n + 1);
  out.weights_[n].assign(static_cast<std::size_t>(bounds[n]) + 1, unit_weight<W>());

  for (std::size_t k = n; k-- > 0;) {
    const auto& next = out.weights_[k + 1];
    const std::optional<Tokens> depth = k + 1 < n ? std::optional<Tokens>(spec.depth(k)) : std::nullopt;
    backward_stage<W>([&](Tokens j) -> const W& { return next[static_cast<std::size_t>(j)]; },
                      spec.increment(k), depth, bounds[k], out.weights_[k]);
    if (bit_floor_log2(to_big(out.weights_[k].back())) + 1 > limits.max_weight_bits)
      throw ResourceLimit("weights exceed " + std::to_string(limits.max_weight_bits) + " bits");
  }
  return out;
}

template <class W>
double information_utility(const EntropySolution<W>& solution) {
  return log2_weight(solution.utility_weight());
}

// Optimal law of the packet length at (stage, state):
//   p*(l) = 2^l g_{k+1}(next(l)) / g_k(u),  l in [0, u + r_k].
struct StagePmf {
  std::size_t stage = 0;
  Tokens state = 0;
  std::vector<BigUInt> numerators;
  BigUInt denominator;

  std::size_t support() const { return numerators.size(); }
  double log2_probability(std::size_t length) const {
    return log2_weight(numerators.at(length)) - log2_weight(denominator);
  }
  double probability(std::size_t length) const { return std::exp2(log2_probability(length)); }
};

template <class W>
StagePmf optimal_pmf(const EntropySolution<W>& solution, std::size_t stage, Tokens state) {
  if (stage >= solution.horizon())
    throw StateOutOfRange("stage " + std::to_string(stage) + " has no packet decision");
  const auto& spec = solution.spec();
  StagePmf pmf;
  pmf.stage = stage;
  pmf.state = state;
  pmf.denominator = to_big(solution.weight(stage, state));
  const Tokens available = state + spec.increment(stage);
  pmf.numerators.reserve(static_cast<std::size_t>(available) + 1);
  for (Tokens l = 0; l <= available; ++l) {
    BigUInt num = to_big(solution.weight(stage + 1, spec.carry(stage, available - l)));
    num <<= static_cast<unsigned>(l);
    pmf.numerators.push_back(std::move(num));
  }
  return pmf;
}

// Uniform integer in [0, bound) by rejection on bit_length(bound) random bits.
template <class Engine>
BigUInt uniform_below(const BigUInt& bound, Engine& engine) {
  if (bound <= 1) return BigUInt(0);
  const std::size_t bits = bit_floor_log2(bound - 1) + 1;
  const std::size_t words = (bits + 63) / 64;
  for (;;) {
    BigUInt x = 0;
    for (std::size_t i = 0; i < words; ++i) {
      x <<= 64;
      x += static_cast<std::uint64_t>(engine());
    }
    x >>= words * 64 - bits;
    if (x < bound) return x;
  }
}

// Draws one schedule from the optimal law, stage by stage.
template <class W, class Engine>
Schedule sample_schedule(const EntropySolution<W>& solution, Engine& engine) {
  const auto& spec = solution.spec();
  std::vector<Tokens> lengths;
  lengths.reserve(spec.horizon());
  Tokens u = 0;
  for (std::size_t k = 0; k < spec.horizon(); ++k) {
    const StagePmf pmf = optimal_pmf(solution, k, u);
    BigUInt point = uniform_below(pmf.denominator, engine);
    std::size_t l = 0;
    while (point >= pmf.numerators[l]) point -= pmf.numerators[l++];
    lengths.push_back(static_cast<Tokens>(l));
    u = spec.carry(k, u + spec.increment(k) - static_cast<Tokens>(l));
  }
  return evolve(spec, lengths);
}

template <class W>
Schedule sample_schedule(const EntropySolution<W>& solution, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  return sample_schedule(solution, engine);
}

// Overt plus covert bits carried by one schedule under the optimal law:
// sum_k [ l_k - log2 p*_k(l_k | u_k) ].
template <class W>
double per_schedule_information(const EntropySolution<W>& solution, std::span<const Tokens> lengths) {
  const Schedule schedule = evolve(solution.spec(), lengths);
  const auto& spec = solution.spec();
  double bits = 0.0;
  for (std::size_t k = 0; k < spec.horizon(); ++k) {
    const Tokens u = schedule.states[k];
    const Tokens l = schedule.lengths[k];
    const BigUInt& den = to_big(solution.weight(k, u));
    BigUInt num = to_big(solution.weight(k + 1, schedule.states[k + 1]));
    num <<= static_cast<unsigned>(l);
    bits += static_cast<double>(l) + log2_weight(den) - log2_weight(num);
  }
  return bits;
}

}  // namespace gtbr
