// gtbr: command-line front end.
//
//   gtbr utility          (--stbr N,r,B | --gtbr N=.. r=.. B=.. | --spec FILE)
//   gtbr optimize         --stbr N,r,B [--depth-mode equality|inequality] [--window W | --unbounded]
//   gtbr sweep            --axis B|r --from X --to Y --N N (--r R | --B B)
//   gtbr reproduce-table  [--check]
//   gtbr sample           SPEC --n COUNT --seed S
//   gtbr encode           SPEC --in PAYLOAD --out WIRE [--chained]
//   gtbr decode           SPEC --in WIRE --out PAYLOAD [--chained]
//
// Exit codes: 0 ok, 2 invalid input, 3 resource limit, 4 reference mismatch.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gtbr/gtbr.hpp"
#include "reference_table.hpp"

namespace {

using namespace gtbr;
using nlohmann::json;

constexpr int kExitInvalid = 2;
constexpr int kExitResource = 3;
constexpr int kExitMismatch = 4;

struct SpecArgs {
  std::string stbr;
  std::vector<std::string> gtbr;
  std::string file;

  void add(CLI::App* app) {
    auto* s = app->add_option("--stbr", stbr, "standard regulator N,r,B");
    auto* g = app->add_option("--gtbr", gtbr, "generalized regulator N=.. r=.. B=..")->expected(1, 3);
    auto* f = app->add_option("--spec", file, "JSON spec file");
    s->excludes(g, f);
    g->excludes(f);
  }

  SpecInput resolve() const {
    if (!stbr.empty()) return parse_stbr(stbr);
    if (!gtbr.empty()) return parse_gtbr(gtbr);
    if (!file.empty()) {
      std::ifstream in(file);
      if (!in) throw InvalidSpec("cannot read " + file);
      json j;
      try {
        j = json::parse(in);
      } catch (const json::exception& e) {
        throw InvalidSpec(std::string("bad JSON in ") + file + ": " + e.what());
      }
      return spec_from_json(j);
    }
    throw InvalidSpec("one of --stbr, --gtbr or --spec is required");
  }
};

struct SearchArgs {
  std::string depth_mode = "equality";
  std::optional<Tokens> window;
  bool unbounded = false;
  unsigned jobs = 1;
  std::uint64_t max_candidates = 0;
  double time_limit = 0;
  std::size_t cache_size = 4096;

  void add(CLI::App* app) {
    app->add_option("--depth-mode", depth_mode)->check(CLI::IsMember({"equality", "inequality"}));
    auto* w = app->add_option("--window", window, "restrict B_i to [B-W, B+W]");
    app->add_flag("--unbounded", unbounded, "no depth window")->excludes(w);
    app->add_option("--jobs", jobs)->check(CLI::Range(1u, 256u));
    app->add_option("--max-candidates", max_candidates, "0 = unlimited");
    app->add_option("--time-limit", time_limit, "seconds, 0 = unlimited");
    app->add_option("--cache-size", cache_size, "suffix tables kept per worker");
  }

  SearchProblem problem(const StbrSpec& envelope) const {
    SearchProblem p = make_problem(envelope);
    p.depth_mode = depth_mode == "equality" ? DepthMode::equality : DepthMode::inequality;
    if (unbounded) p.window.reset();
    if (window) p.window = window;
    p.jobs = jobs;
    p.max_candidates = max_candidates;
    p.time_limit = std::chrono::milliseconds(static_cast<std::int64_t>(time_limit * 1000));
    p.cache_capacity = cache_size;
    return p;
  }
};

StbrSpec require_stbr(const SpecInput& in) {
  if (const auto* s = std::get_if<StbrSpec>(&in)) return *s;
  throw InvalidSpec("an STBR envelope is required (--stbr N,r,B or a spec file with scalar r and B)");
}

std::string join(std::span<const Tokens> v, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + std::to_string(v[i]);
  return out;
}

void print_search_csv(const SearchOutcome& out, bool header) {
  if (header) std::cout << kTableCsvHeader << '\n';
  for (const auto& row : csv_rows(out)) std::cout << row << '\n';
}

int cmd_utility(const SpecArgs& spec_args, const std::string& format) {
  const auto spec = as_regulator(spec_args.resolve());
  const auto sol = solve(spec);
  std::vector<std::size_t> sizes;
  for (std::size_t k = 0; k <= sol.horizon(); ++k) sizes.push_back(sol.stage(k).size());
  if (format == "json") {
    json j = {{"spec", to_json(spec)},
              {"H", information_utility(sol)},
              {"g", to_decimal(sol.utility_weight())},
              {"stage_sizes", sizes}};
    std::cout << j.dump(2) << '\n';
  } else if (format == "csv") {
    std::cout << "N,r,B,H,g\n"
              << spec.horizon() << ',' << join(spec.increments(), " ") << ',' << join(spec.depths(), " ") << ','
              << fixed4(information_utility(sol)) << ',' << to_decimal(sol.utility_weight()) << '\n';
  } else {
    std::cout << "spec   N=" << spec.horizon() << " r=" << join(spec.increments(), ",")
              << " B=" << join(spec.depths(), ",") << '\n'
              << "H      " << fixed4(information_utility(sol)) << " bits\n"
              << "g      " << to_decimal(sol.utility_weight()) << '\n'
              << "stages";
    for (auto s : sizes) std::cout << ' ' << s;
    std::cout << '\n';
  }
  return 0;
}

int cmd_optimize(const SpecArgs& spec_args, const SearchArgs& search_args, const std::string& format) {
  const auto problem = search_args.problem(require_stbr(spec_args.resolve()));
  try {
    const auto out = search(problem);
    if (format == "json")
      std::cout << to_json(out).dump(2) << '\n';
    else
      print_search_csv(out, true);
    return 0;
  } catch (const SearchLimitReached& e) {
    std::cerr << "gtbr: " << e.what() << '\n';
    if (format == "json")
      std::cout << to_json(e.partial()).dump(2) << '\n';
    else
      print_search_csv(e.partial(), true);
    return kExitResource;
  }
}

int cmd_sweep(const std::string& axis, Tokens from, Tokens to, std::size_t horizon, std::optional<Tokens> rate,
              std::optional<Tokens> depth, const SearchArgs& search_args, const std::string& format) {
  if (from > to) throw InvalidSpec("--from must not exceed --to");
  if (axis == "B" && !rate) throw InvalidSpec("sweep over B needs --r");
  if (axis == "r" && !depth) throw InvalidSpec("sweep over r needs --B");
  json rows = json::array();
  if (format != "json") std::cout << "N,r,B,H_s,H_g,delta_H_g\n";
  std::optional<double> prev;
  for (Tokens x = from; x <= to; ++x) {
    const StbrSpec env = axis == "B" ? StbrSpec{horizon, *rate, x} : StbrSpec{horizon, x, *depth};
    const auto out = search(search_args.problem(env));
    std::optional<double> delta;
    if (prev) delta = out.best_utility - *prev;
    prev = out.best_utility;
    if (format == "json") {
      rows.push_back({{"N", env.horizon},
                      {"r", env.rate},
                      {"B", env.depth},
                      {"H_s", out.baseline_utility},
                      {"H_g", out.best_utility},
                      {"delta_H_g", delta ? json(*delta) : json(nullptr)}});
    } else {
      std::cout << env.horizon << ',' << env.rate << ',' << env.depth << ',' << fixed4(out.baseline_utility) << ','
                << fixed4(out.best_utility) << ',' << (delta ? fixed4(*delta) : "") << '\n';
    }
  }
  if (format == "json") std::cout << rows.dump(2) << '\n';
  return 0;
}

int cmd_reproduce(const SearchArgs& search_args, bool check, const std::string& format) {
  json all = json::array();
  if (format != "json") std::cout << kTableCsvHeader << '\n';
  std::size_t mismatches = 0;
  auto mismatch = [&](const StbrSpec& env, const std::string& what) {
    ++mismatches;
    std::cerr << "mismatch (" << env.horizon << ',' << env.rate << ',' << env.depth << "): " << what << '\n';
  };
  for (const auto& row : reference::table()) {
    auto problem = search_args.problem(row.envelope);
    problem.window = default_window(row.envelope.horizon);
    const auto out = search(problem);
    if (format == "json")
      all.push_back(to_json(out));
    else
      print_search_csv(out, false);
    if (!check) continue;

    std::vector<RegulatorSpec> expected;
    for (const auto& o : row.optima) expected.emplace_back(o.r, o.b);
    std::ranges::sort(expected, {}, [](const RegulatorSpec& s) {
      return std::pair(std::vector<Tokens>(s.increments().begin(), s.increments().end()),
                       std::vector<Tokens>(s.depths().begin(), s.depths().end()));
    });
    if (out.optima != expected) mismatch(row.envelope, "optimal (r*, B*) differ");
    if (std::abs(out.baseline_utility - row.h_s) > reference::kEntropyTolerance)
      mismatch(row.envelope, "H_s " + fixed4(out.baseline_utility) + " vs " + fixed4(row.h_s));
    if (std::abs(out.best_utility - row.h_g) > reference::kEntropyTolerance)
      mismatch(row.envelope, "H_g " + fixed4(out.best_utility) + " vs " + fixed4(row.h_g));
    if (std::abs(out.improvement_percent - row.inc_pct) > reference::kPercentTolerance + 1e-9)
      mismatch(row.envelope, "inc " + fixed4(out.improvement_percent) + " vs " + fixed4(row.inc_pct));
  }
  if (format == "json") std::cout << all.dump(2) << '\n';
  if (check && mismatches) {
    std::cerr << mismatches << " reference mismatch(es)\n";
    return kExitMismatch;
  }
  return 0;
}

int cmd_sample(const SpecArgs& spec_args, std::uint64_t n, std::uint64_t seed, const std::string& format) {
  if (n < 2) throw InvalidSpec("--n must be at least 2");
  const auto sol = solve(as_regulator(spec_args.resolve()));
  std::mt19937_64 rng(seed);
  double mean = 0, m2 = 0;
  for (std::uint64_t i = 1; i <= n; ++i) {
    const double x = per_schedule_information(sol, sample_schedule(sol, rng).lengths);
    const double d = x - mean;
    mean += d / static_cast<double>(i);
    m2 += d * (x - mean);
  }
  const double se = std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
  const double exact = information_utility(sol);
  if (format == "json") {
    std::cout << json{{"n", n},          {"seed", seed},           {"mean", mean},   {"stderr", se},
                      {"ci95_low", mean - 1.96 * se}, {"ci95_high", mean + 1.96 * se}, {"exact", exact}}
                     .dump(2)
              << '\n';
  } else {
    std::cout << "n,seed,mean,stderr,ci95_low,ci95_high,exact\n"
              << n << ',' << seed << ',' << fixed4(mean) << ',' << fixed4(se) << ',' << fixed4(mean - 1.96 * se)
              << ',' << fixed4(mean + 1.96 * se) << ',' << fixed4(exact) << '\n';
  }
  return 0;
}

std::vector<char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidSpec("cannot read " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int cmd_encode(const SpecArgs& spec_args, const std::string& in, const std::string& out, bool chained) {
  const auto spec = as_regulator(spec_args.resolve());
  const auto bytes = read_file(in);
  Bits payload;
  for (char c : bytes)
    for (int b = 7; b >= 0; --b) payload.push_back((static_cast<unsigned char>(c) >> b) & 1);
  const FrameCodec codec(solve(spec));
  const auto msg = encode_message(codec, payload, chained ? CodecMode::chained : CodecMode::single);
  std::ofstream os(out, std::ios::binary);
  if (!os) throw InvalidSpec("cannot write " + out);
  write_wire(os, msg);
  std::cerr << "frames " << msg.frames.size() << ", payload " << payload.size() << " bits, coded " << msg.coded_bits
            << " bits (" << msg.overt_bits << " overt, " << msg.covert_bits() << " covert)\n";
  return 0;
}

int cmd_decode(const SpecArgs& spec_args, const std::string& in, const std::string& out, bool chained) {
  const auto spec = as_regulator(spec_args.resolve());
  std::ifstream is(in, std::ios::binary);
  if (!is) throw InvalidSpec("cannot read " + in);
  const auto wire = read_wire(is, spec);
  const FrameCodec codec(solve(spec));
  const Bits payload =
      decode_message(codec, wire.frames, chained ? CodecMode::chained : CodecMode::single, wire.payload_bits);
  std::ofstream os(out, std::ios::binary);
  if (!os) throw InvalidSpec("cannot write " + out);
  for (std::size_t i = 0; i < payload.size(); i += 8) {
    unsigned byte = 0;
    for (std::size_t b = 0; b < 8; ++b) byte = (byte << 1) | (i + b < payload.size() && payload[i + b] ? 1u : 0u);
    os.put(static_cast<char>(byte));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Information utility of token bucket regulators"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string format = "text";
  app.add_option("--format", format, "text, json or csv")->check(CLI::IsMember({"text", "json", "csv"}));

  SpecArgs spec_args;
  SearchArgs search_args;
  if (const char* env = std::getenv("GTBR_CACHE_SIZE")) {
    try {
      search_args.cache_size = std::stoull(env);
    } catch (const std::exception&) {
      std::cerr << "gtbr: GTBR_CACHE_SIZE is not a number\n";
      return kExitInvalid;
    }
  }

  auto* utility = app.add_subcommand("utility", "exact information utility of a regulator");
  spec_args.add(utility);

  auto* optimize = app.add_subcommand("optimize", "entropy-maximizing GTBR under an STBR envelope");
  spec_args.add(optimize);
  search_args.add(optimize);

  std::string axis;
  Tokens from = 0, to = 0;
  std::size_t horizon = 4;
  std::optional<Tokens> sweep_rate, sweep_depth;
  auto* sweep = app.add_subcommand("sweep", "optimal utility along one envelope axis");
  sweep->add_option("--axis", axis)->required()->check(CLI::IsMember({"B", "r"}));
  sweep->add_option("--from", from)->required();
  sweep->add_option("--to", to)->required();
  sweep->add_option("--N", horizon)->check(CLI::PositiveNumber);
  sweep->add_option("--r", sweep_rate);
  sweep->add_option("--B", sweep_depth);
  search_args.add(sweep);

  bool check = false;
  auto* reproduce = app.add_subcommand("reproduce-table", "all reference envelopes");
  reproduce->add_flag("--check", check, "compare with the published values; exit 4 on mismatch");
  search_args.add(reproduce);

  std::uint64_t count = 100000, seed = 1;
  auto* sample = app.add_subcommand("sample", "Monte Carlo estimate of the utility");
  spec_args.add(sample);
  sample->add_option("--n", count);
  sample->add_option("--seed", seed);

  std::string in_path, out_path;
  bool chained = false;
  auto* encode = app.add_subcommand("encode", "payload file to frame wire file");
  auto* decode = app.add_subcommand("decode", "frame wire file to payload file");
  for (auto* sub : {encode, decode}) {
    spec_args.add(sub);
    sub->add_option("--in", in_path)->required();
    sub->add_option("--out", out_path)->required();
    sub->add_flag("--chained", chained, "one coded block across all frames");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (*utility) return cmd_utility(spec_args, format);
    if (*optimize) return cmd_optimize(spec_args, search_args, format);
    if (*sweep) return cmd_sweep(axis, from, to, horizon, sweep_rate, sweep_depth, search_args, format);
    if (*reproduce) return cmd_reproduce(search_args, check, format);
    if (*sample) return cmd_sample(spec_args, count, seed, format);
    if (*encode) return cmd_encode(spec_args, in_path, out_path, chained);
    if (*decode) return cmd_decode(spec_args, in_path, out_path, chained);
  } catch (const ResourceLimit& e) {
    std::cerr << "gtbr: " << e.what() << '\n';
    return kExitResource;
  } catch (const EnumerationTooLarge& e) {
    std::cerr << "gtbr: " << e.what() << '\n';
    return kExitResource;
  } catch (const Error& e) {
    std::cerr << "gtbr: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "gtbr: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
