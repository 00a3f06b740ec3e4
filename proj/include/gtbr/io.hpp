#pragma once

// Text formats.
//
// Regulator spec (JSON):
//   GTBR  {"N": 4, "r": [6, 3, 3, 0], "B": [6, 6, 6]}
//   STBR  {"N": 4, "r": 3, "B": 6}
//
// Inline spec grammar (CLI):
//   stbr  := N "," r "," B
//   gtbr  := "N=" N  "r=" list  "B=" list        (three tokens, any order)
//   list  := int ("," int)*  |  ""               (B is empty when N = 1)
//
// Search report CSV, one row per optimum, fixed columns:
//   N,r,B,r_star,B_star,H_s,H_g,inc_pct
// r_star and B_star are space-separated; entropies and inc_pct have 4 decimals.

#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "gtbr/entropy_dp.hpp"
#include "gtbr/errors.hpp"
#include "gtbr/optimizer.hpp"
#include "gtbr/regulator.hpp"

namespace gtbr {

using SpecInput = std::variant<RegulatorSpec, StbrSpec>;

inline RegulatorSpec as_regulator(const SpecInput& in) {
  if (const auto* s = std::get_if<StbrSpec>(&in)) return s->to_regulator();
  return std::get<RegulatorSpec>(in);
}

namespace detail {

inline Tokens parse_int(std::string_view text) {
  Tokens value = 0;
  std::size_t used = 0;
  try {
    value = std::stoll(std::string(text), &used);
  } catch (const std::exception&) {
    throw InvalidSpec("not an integer: '" + std::string(text) + "'");
  }
  if (used != text.size()) throw InvalidSpec("not an integer: '" + std::string(text) + "'");
  return value;
}

inline std::vector<Tokens> parse_list(std::string_view text) {
  std::vector<Tokens> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = text.find(',', start);
    out.push_back(parse_int(text.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::string join(std::span<const Tokens> values, char sep) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(values[i]);
  }
  return out;
}

}  // namespace detail

inline StbrSpec parse_stbr(std::string_view text) {
  const auto v = detail::parse_list(text);
  if (v.size() != 3) throw InvalidSpec("expected N,r,B");
  if (v[0] < 1) throw InvalidSpec("horizon must be at least one slot");
  if (v[1] < 0 || v[2] < 0) throw InvalidSpec("rate and depth must be non-negative");
  return StbrSpec{static_cast<std::size_t>(v[0]), v[1], v[2]};
}

inline RegulatorSpec parse_gtbr(const std::vector<std::string>& tokens) {
  std::optional<Tokens> n;
  std::optional<std::vector<Tokens>> r, b;
  for (const auto& t : tokens) {
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw InvalidSpec("expected key=value, got '" + t + "'");
    const auto key = t.substr(0, eq);
    const std::string_view value = std::string_view(t).substr(eq + 1);
    if (key == "N")
      n = detail::parse_int(value);
    else if (key == "r")
      r = detail::parse_list(value);
    else if (key == "B")
      b = detail::parse_list(value);
    else
      throw InvalidSpec("unknown key '" + key + "'");
  }
  if (!r) throw InvalidSpec("missing r=");
  if (!b) b.emplace();
  RegulatorSpec spec(*r, *b);
  if (n && *n != static_cast<Tokens>(spec.horizon()))
    throw InvalidSpec("N=" + std::to_string(*n) + " but r has " + std::to_string(spec.horizon()) + " entries");
  return spec;
}

inline nlohmann::json to_json(const RegulatorSpec& spec) {
  return {{"N", spec.horizon()},
          {"r", std::vector<Tokens>(spec.increments().begin(), spec.increments().end())},
          {"B", std::vector<Tokens>(spec.depths().begin(), spec.depths().end())}};
}

inline nlohmann::json to_json(const StbrSpec& spec) {
  return {{"N", spec.horizon}, {"r", spec.rate}, {"B", spec.depth}};
}

inline SpecInput spec_from_json(const nlohmann::json& j) {
  try {
    const auto n = j.at("N").get<Tokens>();
    if (n < 1) throw InvalidSpec("horizon must be at least one slot");
    if (j.at("r").is_array()) {
      RegulatorSpec spec(j.at("r").get<std::vector<Tokens>>(), j.value("B", std::vector<Tokens>{}));
      if (static_cast<Tokens>(spec.horizon()) != n) throw InvalidSpec("N does not match length of r");
      return spec;
    }
    StbrSpec s{static_cast<std::size_t>(n), j.at("r").get<Tokens>(), j.at("B").get<Tokens>()};
    if (s.rate < 0 || s.depth < 0) throw InvalidSpec("rate and depth must be non-negative");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidSpec(std::string("bad spec JSON: ") + e.what());
  }
}

// Per-stage weight arrays as decimal strings.
template <class W>
nlohmann::json dump_solution(const EntropySolution<W>& solution) {
  nlohmann::json stages = nlohmann::json::array();
  for (std::size_t k = 0; k <= solution.horizon(); ++k) {
    nlohmann::json weights = nlohmann::json::array();
    for (const auto& w : solution.stage(k)) weights.push_back(to_decimal(to_big(w)));
    stages.push_back({{"stage", k}, {"weights", std::move(weights)}});
  }
  return {{"spec", to_json(solution.spec())},
          {"utility_bits", information_utility(solution)},
          {"stages", std::move(stages)}};
}

inline nlohmann::json to_json(const SearchOutcome& out) {
  nlohmann::json optima = nlohmann::json::array();
  for (const auto& o : out.optima) optima.push_back(to_json(o));
  return {{"envelope", to_json(out.envelope)},
          {"depth_mode", to_string(out.depth_mode)},
          {"window", out.window ? nlohmann::json(*out.window) : nlohmann::json(nullptr)},
          {"H_s", out.baseline_utility},
          {"H_g", out.best_utility},
          {"inc_pct", out.improvement_percent},
          {"baseline_weight", to_decimal(out.baseline_weight)},
          {"best_weight", to_decimal(out.best_weight)},
          {"optima", std::move(optima)},
          {"authoritative", out.authoritative},
          {"stats",
           {{"candidates", out.stats.candidates},
            {"cache_hits", out.stats.cache_hits},
            {"cache_misses", out.stats.cache_misses},
            {"elapsed_seconds", out.stats.elapsed_seconds},
            {"big_weights", out.stats.big_weights}}}};
}

inline constexpr std::string_view kTableCsvHeader = "N,r,B,r_star,B_star,H_s,H_g,inc_pct";

inline std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

inline std::vector<std::string> csv_rows(const SearchOutcome& out) {
  std::vector<std::string> rows;
  for (const auto& o : out.optima) {
    std::ostringstream row;
    row << out.envelope.horizon << ',' << out.envelope.rate << ',' << out.envelope.depth << ','
        << detail::join(o.increments(), ' ') << ',' << detail::join(o.depths(), ' ') << ','
        << fixed4(out.baseline_utility) << ',' << fixed4(out.best_utility) << ',' << fixed4(out.improvement_percent);
    rows.push_back(row.str());
  }
  return rows;
}

}  // namespace gtbr
