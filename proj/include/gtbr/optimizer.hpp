#pragma once

// Exhaustive search for the entropy-maximizing GTBR under an STBR envelope
// (N, r, B):
//
//   sum r_i = N r           (aggregate tokens)
//   sum B_i <= (N-1) B      (aggregate depth; equality mode forces ==)
//   2r <= B <= 5r           (envelope shape)
//   r_i <= B                (per-slot increment cap)
//
// Any regulator whose depth cap binds somewhere on its maximal trajectory
// gains utility from one more unit of depth at that slot, so optimal
// regulators spend the whole depth budget; equality mode searches only those.
//
// Candidates are generated back to front (r_{N-1}, B_{N-2}, r_{N-2}, ...),
// so consecutive candidates share long parameter suffixes. The backward
// tables for stages >= k depend only on that suffix and are memoized in a
// bounded LRU cache keyed by it.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <unordered_map>
#include <vector>

#include "gtbr/compositions.hpp"
#include "gtbr/entropy_dp.hpp"
#include "gtbr/errors.hpp"
#include "gtbr/regulator.hpp"
#include "gtbr/weights.hpp"

namespace gtbr {

enum class DepthMode { equality, inequality };

inline const char* to_string(DepthMode m) { return m == DepthMode::equality ? "equality" : "inequality"; }

struct SearchProblem {
  StbrSpec envelope;
  DepthMode depth_mode = DepthMode::equality;
  std::optional<Tokens> window;  // B_i in [max(0, B-w), B+w]; unbounded if empty
  std::uint64_t max_candidates = 0;  // 0: unlimited
  std::chrono::milliseconds time_limit{0};  // 0: unlimited
  unsigned jobs = 1;
  std::size_t cache_capacity = 4096;
};

// Window 3 from N = 5 on, unbounded below.
inline std::optional<Tokens> default_window(std::size_t horizon) {
  return horizon >= 5 ? std::optional<Tokens>(3) : std::nullopt;
}

inline SearchProblem make_problem(const StbrSpec& envelope) {
  SearchProblem p;
  p.envelope = envelope;
  p.window = default_window(envelope.horizon);
  return p;
}

struct SearchStats {
  std::uint64_t candidates = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t cache_misses = 0;
  double elapsed_seconds = 0.0;
  bool big_weights = false;  // fell back to arbitrary precision
};

struct SearchOutcome {
  StbrSpec envelope;
  DepthMode depth_mode = DepthMode::equality;
  std::optional<Tokens> window;

  BigUInt best_weight;
  double best_utility = 0.0;
  std::vector<RegulatorSpec> optima;

  BigUInt baseline_weight;
  double baseline_utility = 0.0;
  double improvement_percent = 0.0;

  SearchStats stats;
  bool authoritative = true;
};

class SearchLimitReached : public ResourceLimit {
 public:
  explicit SearchLimitReached(SearchOutcome partial)
      : ResourceLimit("search stopped at a resource limit; results are partial"), partial_(std::move(partial)) {}
  const SearchOutcome& partial() const noexcept { return partial_; }

 private:
  SearchOutcome partial_;
};

struct DepthRange {
  Tokens lo = 0;
  Tokens hi = 0;
};

inline DepthRange depth_range(const StbrSpec& envelope, std::optional<Tokens> window) {
  const Tokens budget = static_cast<Tokens>(envelope.horizon - 1) * envelope.depth;
  if (!window) return {0, budget};
  return {std::max<Tokens>(0, envelope.depth - *window), envelope.depth + *window};
}

// Token increment sequences: compositions of N r into N parts in [0, cap].
template <class Fn>
void enumerate_increments(const StbrSpec& envelope, Tokens cap_per_entry, Fn&& fn) {
  const Tokens total = static_cast<Tokens>(envelope.horizon) * envelope.rate;
  for_each_composition(CompositionBounds{envelope.horizon, 0, cap_per_entry, total, total}, std::forward<Fn>(fn));
}

// Bucket depth sequences of N-1 parts within the window, summing to exactly
// (equality) or at most (inequality) (N-1) B.
template <class Fn>
void enumerate_depths(const StbrSpec& envelope, DepthMode mode, std::optional<Tokens> window, Fn&& fn) {
  const auto range = depth_range(envelope, window);
  const Tokens budget = static_cast<Tokens>(envelope.horizon - 1) * envelope.depth;
  const Tokens sum_min = mode == DepthMode::equality ? budget : 0;
  for_each_composition(CompositionBounds{envelope.horizon - 1, range.lo, range.hi, sum_min, budget},
                       std::forward<Fn>(fn));
}

// Identifies the parameters that the backward tables of stages >= k depend on.
struct SuffixKey {
  std::vector<Tokens> increments;  // r_k .. r_{N-1}
  std::vector<Tokens> depths;      // B_k .. B_{N-2}

  friend bool operator==(const SuffixKey&, const SuffixKey&) = default;
};

struct SuffixKeyHash {
  std::size_t operator()(const SuffixKey& key) const noexcept {
    std::size_t h = key.increments.size() * 0x9e3779b97f4a7c15ULL;
    auto mix = [&](Tokens v) { h ^= std::hash<Tokens>{}(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
    for (Tokens v : key.increments) mix(v);
    mix(-1);
    for (Tokens v : key.depths) mix(v);
    return h;
  }
};

inline SuffixKey suffix_memo_key(std::span<const Tokens> increment_suffix, std::span<const Tokens> depth_suffix) {
  return {{increment_suffix.begin(), increment_suffix.end()}, {depth_suffix.begin(), depth_suffix.end()}};
}

template <class Value>
class LruCache {
 public:
  explicit LruCache(std::size_t capacity) : capacity_(std::max<std::size_t>(capacity, 1)) {}

  const Value* find(const SuffixKey& key) {
    auto it = index_.find(key);
    if (it == index_.end()) return nullptr;
    order_.splice(order_.begin(), order_, it->second);
    return &it->second->second;
  }

  const Value& insert(SuffixKey key, Value value) {
    if (index_.size() >= capacity_) {
      index_.erase(order_.back().first);
      order_.pop_back();
    }
    order_.emplace_front(std::move(key), std::move(value));
    index_.emplace(order_.front().first, order_.begin());
    return order_.front().second;
  }

  std::size_t size() const { return index_.size(); }

 private:
  using Entry = std::pair<SuffixKey, Value>;
  std::size_t capacity_;
  std::list<Entry> order_;
  std::unordered_map<SuffixKey, typename std::list<Entry>::iterator, SuffixKeyHash> index_;
};

namespace detail {

template <class W>
struct WorkResult {
  W best{};
  bool any = false;
  std::vector<std::pair<std::vector<Tokens>, std::vector<Tokens>>> optima;
  std::uint64_t candidates = 0;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
};

// Feasible per-slot choices when filling a candidate back to front.
struct SearchShape {
  std::size_t horizon;
  Tokens total_tokens;
  Tokens depth_budget;
  Tokens increment_cap;
  DepthRange range;
  DepthMode mode;

  explicit SearchShape(const SearchProblem& p)
      : horizon(p.envelope.horizon),
        total_tokens(static_cast<Tokens>(p.envelope.horizon) * p.envelope.rate),
        depth_budget(static_cast<Tokens>(p.envelope.horizon - 1) * p.envelope.depth),
        increment_cap(p.envelope.depth),
        range(depth_range(p.envelope, p.window)),
        mode(p.depth_mode) {}

  // r_k when `remaining` tokens are still to be placed in slots 0..k.
  std::vector<Tokens> increment_choices(std::size_t k, Tokens remaining) const {
    const Tokens top = std::min(increment_cap, remaining);
    const Tokens bottom = k == 0 ? remaining : std::max<Tokens>(0, remaining - static_cast<Tokens>(k) * increment_cap);
    std::vector<Tokens> out;
    for (Tokens r = top; r >= bottom; --r) out.push_back(r);
    return out;
  }

  // B_k when `remaining` depth budget is left for B_0..B_k.
  std::vector<Tokens> depth_choices(std::size_t k, Tokens remaining) const {
    const auto rest = static_cast<Tokens>(k);
    const Tokens top = std::min(range.hi, remaining - rest * range.lo);
    const Tokens bottom = mode == DepthMode::equality ? std::max(range.lo, remaining - rest * range.hi) : range.lo;
    std::vector<Tokens> out;
    for (Tokens b = top; b >= bottom; --b) out.push_back(b);
    return out;
  }

  // Work items: every feasible (r_{N-1}, B_{N-2}); just r_0 when N = 1.
  std::vector<std::pair<Tokens, Tokens>> work_items() const {
    if (horizon == 1) return {{total_tokens, 0}};
    std::vector<std::pair<Tokens, Tokens>> items;
    for (Tokens r : increment_choices(horizon - 1, total_tokens))
      for (Tokens b : depth_choices(horizon - 2, depth_budget)) items.emplace_back(r, b);
    return items;
  }
};

// Evaluates the candidates of one work item with a private suffix cache.
template <class W>
class SuffixSearch {
 public:
  using Table = std::shared_ptr<const std::vector<W>>;

  struct Control {
    std::atomic<bool> stop{false};
    std::atomic<std::uint64_t> evaluated{0};
    std::uint64_t max_candidates = 0;
    std::chrono::steady_clock::time_point deadline = std::chrono::steady_clock::time_point::max();
  };

  SuffixSearch(const SearchProblem& problem, Control& control)
      : shape_(problem),
        cache_(problem.cache_capacity),
        control_(control),
        increments_(shape_.horizon, 0),
        depths_(shape_.horizon - 1, 0) {}

  WorkResult<W> run(std::pair<Tokens, Tokens> item) {
    result_ = {};
    const std::size_t n = shape_.horizon;
    if (n == 1) {
      increments_[0] = item.first;
      evaluate();
    } else {
      increments_[n - 1] = item.first;
      depths_[n - 2] = item.second;
      choose_increment(n - 2, shape_.total_tokens - item.first, shape_.depth_budget - item.second);
    }
    return std::move(result_);
  }

 private:
  void choose_increment(std::size_t k, Tokens tokens_left, Tokens depth_left) {
    for (Tokens r : shape_.increment_choices(k, tokens_left)) {
      if (control_.stop.load(std::memory_order_relaxed)) return;
      increments_[k] = r;
      if (k == 0)
        evaluate();
      else
        choose_depth(k - 1, tokens_left - r, depth_left);
    }
  }

  void choose_depth(std::size_t k, Tokens tokens_left, Tokens depth_left) {
    for (Tokens b : shape_.depth_choices(k, depth_left)) {
      depths_[k] = b;
      choose_increment(k, tokens_left, depth_left - b);
    }
  }

  // Largest residual that can be held at the start of stage k >= 1: capped by
  // the widest admissible depth and by the tokens issued before stage k.
  Tokens stage_bound(std::size_t k) const {
    Tokens suffix = 0;
    for (std::size_t j = k; j < shape_.horizon; ++j) suffix += increments_[j];
    return std::min(shape_.range.hi, shape_.total_tokens - suffix);
  }

  Table table(std::size_t k) {
    SuffixKey key = suffix_memo_key(std::span<const Tokens>(increments_).subspan(k),
                                    std::span<const Tokens>(depths_).subspan(k));
    if (const Table* hit = cache_.find(key)) {
      ++result_.hits;
      return *hit;
    }
    ++result_.misses;
    auto out = std::make_shared<std::vector<W>>();
    const Tokens bound = stage_bound(k);
    if (k + 1 == shape_.horizon) {
      const W one = unit_weight<W>();
      backward_stage<W>([&](Tokens) -> const W& { return one; }, increments_[k], std::nullopt, bound, *out);
    } else {
      const Table next = table(k + 1);
      backward_stage<W>([&](Tokens j) -> const W& { return (*next)[static_cast<std::size_t>(j)]; },
                        increments_[k], depths_[k], bound, *out);
    }
    return cache_.insert(std::move(key), Table(std::move(out)));
  }

  void evaluate() {
    const std::uint64_t seen = control_.evaluated.fetch_add(1, std::memory_order_relaxed);
    if (control_.max_candidates && seen >= control_.max_candidates) {
      control_.stop = true;
      return;
    }
    if ((seen & 0xfff) == 0 && std::chrono::steady_clock::now() > control_.deadline) {
      control_.stop = true;
      return;
    }
    ++result_.candidates;

    std::vector<W> g0;
    if (shape_.horizon == 1) {
      const W one = unit_weight<W>();
      backward_stage<W>([&](Tokens) -> const W& { return one; }, increments_[0], std::nullopt, 0, g0);
    } else {
      const Table next = table(1);
      backward_stage<W>([&](Tokens j) -> const W& { return (*next)[static_cast<std::size_t>(j)]; },
                        increments_[0], depths_[0], 0, g0);
    }
    const W& value = g0[0];
    if (!result_.any || result_.best < value) {
      result_.any = true;
      result_.best = value;
      result_.optima.clear();
    }
    if (value == result_.best) result_.optima.emplace_back(increments_, depths_);
  }

  SearchShape shape_;
  LruCache<Table> cache_;
  Control& control_;
  std::vector<Tokens> increments_;
  std::vector<Tokens> depths_;
  WorkResult<W> result_;
};

template <class W>
SearchOutcome run_search(const SearchProblem& problem) {
  const auto start = std::chrono::steady_clock::now();
  const auto items = SearchShape(problem).work_items();
  std::vector<WorkResult<W>> results(items.size());

  typename SuffixSearch<W>::Control control;
  control.max_candidates = problem.max_candidates;
  if (problem.time_limit.count() > 0) control.deadline = start + problem.time_limit;
  std::atomic<std::size_t> next_item{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  // Each work item gets a fresh cache so hit counts do not depend on which
  // worker ran what.
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next_item.fetch_add(1);
      if (i >= items.size() || control.stop.load()) return;
      try {
        results[i] = SuffixSearch<W>(problem, control).run(items[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        control.stop = true;
        return;
      }
    }
  };

  const unsigned jobs = std::max(1u, problem.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  SearchOutcome out;
  out.envelope = problem.envelope;
  out.depth_mode = problem.depth_mode;
  out.window = problem.window;
  out.authoritative = !control.stop.load();

  std::optional<W> best;
  std::vector<std::pair<std::vector<Tokens>, std::vector<Tokens>>> optima;
  for (auto& r : results) {
    out.stats.candidates += r.candidates;
    out.stats.cache_hits += r.hits;
    out.stats.cache_misses += r.misses;
    if (!r.any) continue;
    if (!best || *best < r.best) {
      best = r.best;
      optima.clear();
    }
    if (r.best == *best) optima.insert(optima.end(), r.optima.begin(), r.optima.end());
  }
  std::ranges::sort(optima);
  for (auto& [inc, dep] : optima) out.optima.emplace_back(std::move(inc), std::move(dep));

  const auto baseline = solve<BigUInt>(problem.envelope.to_regulator());
  out.baseline_weight = baseline.utility_weight();
  out.baseline_utility = information_utility(baseline);
  if (best) {
    out.best_weight = to_big(*best);
    out.best_utility = log2_weight(out.best_weight);
  }
  out.improvement_percent =
      out.baseline_utility > 0 ? (out.best_utility - out.baseline_utility) / out.baseline_utility * 100.0 : 0.0;
  out.stats.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace detail

inline SearchOutcome search(const SearchProblem& problem) {
  if (problem.envelope.horizon == 0) throw InvalidSpec("horizon must be at least one slot");
  if (problem.envelope.rate < 0) throw InvalidSpec("rate must be non-negative");
  if (!depth_ratio_ok(problem.envelope))
    throw InvalidSpec("envelope must satisfy 2r <= B <= 5r");
  if (problem.window && *problem.window < 0) throw InvalidSpec("depth window must be non-negative");

  SearchOutcome out;
  try {
    out = detail::run_search<Checked128>(problem);
  } catch (const WeightOverflow&) {
    out = detail::run_search<BigUInt>(problem);
    out.stats.big_weights = true;
  }
  if (!out.authoritative) throw SearchLimitReached(std::move(out));
  return out;
}

}  // namespace gtbr
