#pragma once

// Generalized token bucket regulator (GTBR): per-slot token increments r_k and
// per-slot bucket depths B_k over a horizon of N slots. The standard regulator
// (STBR) is the special case of constant r and B.
//
// Slot k may send a packet of length l_k <= u_k + r_k, where u_k is the number
// of residual tokens at the start of slot k (u_0 = 0). The residual then
// evolves as u_{k+1} = min(u_k + r_k - l_k, B_k), except after the final slot,
// where no depth exists and u_N = u_{N-1} + r_{N-1} - l_{N-1}.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "gtbr/errors.hpp"

namespace gtbr {

using Tokens = std::int64_t;

class RegulatorSpec {
 public:
  RegulatorSpec(std::vector<Tokens> increments, std::vector<Tokens> depths)
      : increments_(std::move(increments)), depths_(std::move(depths)) {
    if (increments_.empty()) throw InvalidSpec("horizon must be at least one slot");
    if (depths_.size() + 1 != increments_.size())
      throw InvalidSpec("expected " + std::to_string(increments_.size() - 1) +
                        " bucket depths, got " + std::to_string(depths_.size()));
    const auto negative = [](Tokens t) { return t < 0; };
    if (std::ranges::any_of(increments_, negative))
      throw InvalidSpec("token increments must be non-negative");
    if (std::ranges::any_of(depths_, negative))
      throw InvalidSpec("bucket depths must be non-negative");
  }

  std::size_t horizon() const noexcept { return increments_.size(); }
  std::span<const Tokens> increments() const noexcept { return increments_; }
  std::span<const Tokens> depths() const noexcept { return depths_; }
  Tokens increment(std::size_t k) const { return increments_.at(k); }
  Tokens depth(std::size_t k) const { return depths_.at(k); }

  Tokens total_tokens() const { return std::accumulate(increments_.begin(), increments_.end(), Tokens{0}); }
  Tokens total_depth() const { return std::accumulate(depths_.begin(), depths_.end(), Tokens{0}); }

  // Residual carried into slot k+1 after slot k leaves `remaining` tokens.
  Tokens carry(std::size_t k, Tokens remaining) const {
    return k + 1 < horizon() ? std::min(remaining, depths_[k]) : remaining;
  }

  friend bool operator==(const RegulatorSpec&, const RegulatorSpec&) = default;

 private:
  std::vector<Tokens> increments_;
  std::vector<Tokens> depths_;
};

struct StbrSpec {
  std::size_t horizon = 1;
  Tokens rate = 0;
  Tokens depth = 0;

  RegulatorSpec to_regulator() const {
    if (horizon == 0) throw InvalidSpec("horizon must be at least one slot");
    return RegulatorSpec(std::vector<Tokens>(horizon, rate), std::vector<Tokens>(horizon - 1, depth));
  }

  friend bool operator==(const StbrSpec&, const StbrSpec&) = default;
};

// Packet lengths l_0..l_{N-1} with the token trajectory u_0..u_N they induce.
struct Schedule {
  std::vector<Tokens> lengths;
  std::vector<Tokens> states;

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

inline Schedule evolve(const RegulatorSpec& spec, std::span<const Tokens> lengths) {
  if (lengths.size() != spec.horizon())
    throw InvalidSpec("schedule has " + std::to_string(lengths.size()) + " slots, regulator has " +
                      std::to_string(spec.horizon()));
  Schedule out;
  out.lengths.assign(lengths.begin(), lengths.end());
  out.states.reserve(lengths.size() + 1);
  Tokens u = 0;
  out.states.push_back(u);
  for (std::size_t k = 0; k < lengths.size(); ++k) {
    const Tokens available = u + spec.increment(k);
    if (lengths[k] < 0 || lengths[k] > available) throw NonConforming(k, available, lengths[k]);
    u = spec.carry(k, available - lengths[k]);
    out.states.push_back(u);
  }
  return out;
}

inline bool conforms(const RegulatorSpec& spec, std::span<const Tokens> lengths) {
  try {
    evolve(spec, lengths);
    return true;
  } catch (const NonConforming&) {
    return false;
  }
}

// phi_i: the largest residual attainable at the start of slot i.
struct ReachabilityProfile {
  std::vector<Tokens> phi;

  bool reachable(std::size_t slot, Tokens u) const { return u >= 0 && u <= phi.at(slot); }
};

inline ReachabilityProfile reachability(const RegulatorSpec& spec) {
  ReachabilityProfile out;
  out.phi.reserve(spec.horizon());
  out.phi.push_back(0);
  for (std::size_t i = 1; i < spec.horizon(); ++i)
    out.phi.push_back(std::min(out.phi.back() + spec.increment(i - 1), spec.depth(i - 1)));
  return out;
}

// Stage i (1 <= i < N) where the depth cap binds on the maximal trajectory:
// phi_i = B_{i-1} < phi_{i-1} + r_{i-1}.
inline std::vector<std::size_t> binding_caps(const RegulatorSpec& spec) {
  const auto profile = reachability(spec);
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i < spec.horizon(); ++i)
    if (spec.depth(i - 1) < profile.phi[i - 1] + spec.increment(i - 1)) out.push_back(i);
  return out;
}

// Verdicts for comparing a GTBR against the STBR envelope it must respect.
struct ComparisonVerdicts {
  bool aggregate_tokens = false;          // sum r_i == N r
  bool aggregate_depth = false;           // sum B_i <= (N-1) B
  bool depth_ratio = false;               // 2r <= B <= 5r
  bool increment_cap = false;             // r_i <= B for all i
  bool aggregate_depth_equality = false;  // sum B_i == (N-1) B

  bool all_satisfied() const { return aggregate_tokens && aggregate_depth && depth_ratio && increment_cap; }

  struct Item {
    std::string name;
    bool satisfied;
  };
  std::vector<Item> items() const {
    return {{"aggregate_tokens", aggregate_tokens},
            {"aggregate_depth", aggregate_depth},
            {"depth_ratio", depth_ratio},
            {"increment_cap", increment_cap},
            {"aggregate_depth_equality", aggregate_depth_equality}};
  }
};

inline bool depth_ratio_ok(const StbrSpec& s) { return 2 * s.rate <= s.depth && s.depth <= 5 * s.rate; }

inline ComparisonVerdicts validate_comparison(const RegulatorSpec& g, const StbrSpec& s) {
  if (g.horizon() != s.horizon) throw HorizonMismatch(g.horizon(), s.horizon);
  const auto n = static_cast<Tokens>(s.horizon);
  ComparisonVerdicts v;
  v.aggregate_tokens = g.total_tokens() == n * s.rate;
  v.aggregate_depth = g.total_depth() <= (n - 1) * s.depth;
  v.aggregate_depth_equality = g.total_depth() == (n - 1) * s.depth;
  v.depth_ratio = depth_ratio_ok(s);
  v.increment_cap = std::ranges::all_of(g.increments(), [&](Tokens r) { return r <= s.depth; });
  return v;
}

}  // namespace gtbr
