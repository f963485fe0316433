#pragma once

// In-process front end behind the nwidths executable. A RunConfig is filled
// from flags and an optional JSON config file; run() produces the output
// text and the exit status without touching global state.

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nwidths/allocator.hpp"
#include "nwidths/error.hpp"
#include "nwidths/exponents.hpp"
#include "nwidths/finwidths.hpp"
#include "nwidths/params.hpp"
#include "nwidths/verify.hpp"

namespace nwidths::cli {

enum class Command { Classify, FiniteWidth, Bound, Plan, SlopeCheck, Scan };
enum class Format { Default, Json, Csv };
enum class StrategyChoice { Paper, Greedy };
enum class ScanGrid { All, Table, Axioms };

inline constexpr int kExitOk = 0;
inline constexpr int kExitViolations = 1;
inline constexpr int kExitUsage = 2;

struct RunConfig {
  Command command = Command::Classify;
  std::optional<EmbeddingParams> params;
  std::int64_t n_min = kDefaultSlopeMin;
  std::int64_t n_max = kDefaultSlopeMax;
  StrategyChoice strategy = StrategyChoice::Greedy;
  Format format = Format::Default;
  std::optional<std::string> out;

  // classify: restrict to one width kind
  std::optional<WidthKind> kind;
  // finite-width
  FiniteWidthQuery query;
  // plan
  std::int64_t n = 4096;
  std::optional<int> max_diagonal;
  // slope-check: read sequences from a CSV written by `bound`
  std::optional<std::string> input;
  // scan
  ScanGrid grid = ScanGrid::All;
  bool mutant = false;
};

struct RunResult {
  int exit_code = kExitOk;
  std::string output;
  std::string diagnostic;
};

inline std::optional<Command> parse_command(std::string_view s) {
  if (s == "classify") return Command::Classify;
  if (s == "finite-width") return Command::FiniteWidth;
  if (s == "bound") return Command::Bound;
  if (s == "plan") return Command::Plan;
  if (s == "slope-check") return Command::SlopeCheck;
  if (s == "scan") return Command::Scan;
  return std::nullopt;
}

inline Format parse_format(std::string_view s) {
  if (s == "json") return Format::Json;
  if (s == "csv") return Format::Csv;
  throw Error(ErrorCode::ParseError, "format must be json or csv, got '" + std::string(s) + "'");
}

inline StrategyChoice parse_strategy(std::string_view s) {
  if (s == "paper") return StrategyChoice::Paper;
  if (s == "greedy") return StrategyChoice::Greedy;
  throw Error(ErrorCode::ParseError, "strategy must be paper or greedy, got '" + std::string(s) + "'");
}

inline ScanGrid parse_scan_grid(std::string_view s) {
  if (s == "all") return ScanGrid::All;
  if (s == "table") return ScanGrid::Table;
  if (s == "axioms") return ScanGrid::Axioms;
  throw Error(ErrorCode::ParseError, "grid must be all, table or axioms, got '" + std::string(s) + "'");
}

inline WidthKind parse_kind(std::string_view s) {
  if (s == "kolmogorov") return WidthKind::Kolmogorov;
  if (s == "gelfand") return WidthKind::Gelfand;
  throw Error(ErrorCode::ParseError, "kind must be kolmogorov or gelfand, got '" + std::string(s) + "'");
}

/// Accepts 256, 2^8 or 2**8.
inline std::int64_t parse_dyadic(std::string_view s) {
  std::string t(s);
  std::int64_t v = 0;
  try {
    std::size_t pos = 0;
    if (const auto caret = t.find('^'); caret != std::string::npos) {
      const int e = std::stoi(t.substr(caret + 1), &pos);
      if (t.substr(0, caret) != "2" || pos != t.size() - caret - 1 || e < 0 || e > 62) throw std::invalid_argument(t);
      v = std::int64_t{1} << e;
    } else if (const auto stars = t.find("**"); stars != std::string::npos) {
      const int e = std::stoi(t.substr(stars + 2), &pos);
      if (t.substr(0, stars) != "2" || pos != t.size() - stars - 2 || e < 0 || e > 62) throw std::invalid_argument(t);
      v = std::int64_t{1} << e;
    } else {
      v = std::stoll(t, &pos);
      if (pos != t.size()) throw std::invalid_argument(t);
    }
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::ParseError, "cannot parse n bound '" + t + "'");
  }
  if (v < 1 || (v & (v - 1)) != 0) throw Error(ErrorCode::InvalidParams, "n bounds must be powers of two, got " + t);
  return v;
}

/// --params is inline text (key=value pairs or JSON) or the path of a file holding it.
inline EmbeddingParams load_params(const std::string& arg) {
  std::ifstream in(arg);
  if (in) {
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_params(ss.str());
  }
  return parse_params(arg);
}

/// Fills fields from a JSON config; keys absent from the object keep their values.
inline void apply_config(RunConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "config must be a JSON object");
  auto str = [&](const char* key) -> std::optional<std::string> {
    if (!j.contains(key)) return std::nullopt;
    const auto& v = j.at(key);
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    throw Error(ErrorCode::ParseError, std::string("config key '") + key + "' must be a string or integer");
  };
  if (auto c = str("command")) {
    const auto cmd = parse_command(*c);
    if (!cmd) throw Error(ErrorCode::ParseError, "unknown command '" + *c + "' in config");
    cfg.command = *cmd;
  }
  if (j.contains("params")) cfg.params = j.at("params").is_string() ? load_params(j.at("params").get<std::string>())
                                                                      : params_from_json(j.at("params"));
  if (auto v = str("n_min")) cfg.n_min = parse_dyadic(*v);
  if (auto v = str("n_max")) cfg.n_max = parse_dyadic(*v);
  if (auto v = str("strategy")) cfg.strategy = parse_strategy(*v);
  if (auto v = str("format")) cfg.format = parse_format(*v);
  if (auto v = str("out")) cfg.out = *v;
  if (auto v = str("kind")) cfg.kind = parse_kind(*v);
  if (auto v = str("grid")) cfg.grid = parse_scan_grid(*v);
  if (auto v = str("input")) cfg.input = *v;
  if (j.contains("mutant")) cfg.mutant = j.at("mutant").get<bool>();
  if (j.contains("n")) cfg.n = j.at("n").get<std::int64_t>();
  if (j.contains("max_diagonal")) cfg.max_diagonal = j.at("max_diagonal").get<int>();
  if (j.contains("query")) {
    const auto& q = j.at("query");
    if (q.contains("kind")) cfg.query.kind = parse_kind(q.at("kind").get<std::string>());
    if (q.contains("p1")) cfg.query.p1 = parse_ext_real(q.at("p1").is_string() ? q.at("p1").get<std::string>() : q.at("p1").dump());
    if (q.contains("p2")) cfg.query.p2 = parse_ext_real(q.at("p2").is_string() ? q.at("p2").get<std::string>() : q.at("p2").dump());
    if (q.contains("N")) cfg.query.N = q.at("N").get<std::uint64_t>();
    if (q.contains("n")) cfg.query.n = q.at("n").get<std::uint64_t>();
  }
}

inline void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open config file " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
    apply_config(cfg, j);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("config: ") + e.what());
  }
}

/// %.12g
inline std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string bound_kind_name(BoundKind k) { return k == BoundKind::UpperBound ? "upper" : "lower"; }

inline std::string to_csv(const std::vector<WidthSequence>& seqs) {
  std::string s = "n,value,kind,strategy\n";
  for (const auto& seq : seqs)
    for (const auto& pt : seq.points)
      s += std::to_string(pt.n) + "," + format_value(pt.value) + "," + bound_kind_name(seq.kind) + "," + seq.strategy + "\n";
  return s;
}

inline std::vector<WidthSequence> from_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("n,value,kind,strategy", 0) != 0)
    throw Error(ErrorCode::ParseError, "CSV header must be n,value,kind,strategy");
  std::vector<WidthSequence> out;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() != 4) throw Error(ErrorCode::ParseError, "CSV row " + std::to_string(row) + " needs 4 fields");
    BoundKind kind;
    if (f[2] == "upper") kind = BoundKind::UpperBound;
    else if (f[2] == "lower") kind = BoundKind::LowerBound;
    else throw Error(ErrorCode::ParseError, "CSV row " + std::to_string(row) + ": kind must be upper or lower");
    if (out.empty() || out.back().kind != kind || out.back().strategy != f[3]) out.push_back({{}, kind, f[3]});
    try {
      out.back().points.push_back({std::stoll(f[0]), std::stod(f[1])});
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::ParseError, "CSV row " + std::to_string(row) + ": bad number");
    }
  }
  return out;
}

namespace detail {

inline const EmbeddingParams& need_params(const RunConfig& cfg) {
  if (!cfg.params) throw Error(ErrorCode::ParseError, "--params is required for this command");
  return *cfg.params;
}

inline Strategy resolve_strategy(const RunConfig& cfg, const EmbeddingParams& p) {
  if (cfg.strategy == StrategyChoice::Greedy) return Strategy::Greedy;
  const auto ie = nwidths::detail::require_ideal_exponents(p);
  const double mu = to_double(min(p.alpha, delta_of(p)));
  return mu < p.d / ie.tau ? Strategy::PaperStep4 : Strategy::PaperStep3;
}

inline void require_json(const RunConfig& cfg, const char* what) {
  if (cfg.format == Format::Csv) throw Error(ErrorCode::InvalidParams, std::string(what) + " writes JSON only");
}

inline nlohmann::json decision_or_error(WidthKind kind, const EmbeddingParams& p, std::optional<ErrorCode>& first_error) {
  try {
    return to_json(exponent(kind, p));
  } catch (const Error& e) {
    if (!first_error) first_error = e.code();
    return {{"error", std::string(error_name(e.code()))}, {"message", e.what()}, {"exit_code", exit_code(e.code())}};
  }
}

inline RunResult classify(const RunConfig& cfg) {
  require_json(cfg, "classify");
  const auto& p = need_params(cfg);
  require_valid(p);
  nlohmann::json j{{"params", to_json(p)}, {"derived", to_json(derive(p))}};
  std::optional<ErrorCode> first_error;
  int fired = 0;
  for (const WidthKind k : {WidthKind::Kolmogorov, WidthKind::Gelfand}) {
    if (cfg.kind && *cfg.kind != k) continue;
    j[std::string(kind_name(k))] = decision_or_error(k, p, first_error);
    if (!j[std::string(kind_name(k))].contains("error")) ++fired;
  }
  j["comparison"] = to_json(compare_widths(p));
  RunResult r{kExitOk, j.dump(2) + "\n", {}};
  if (fired == 0 && first_error) {
    const auto& err = j[std::string(kind_name(cfg.kind.value_or(WidthKind::Kolmogorov)))];
    r.exit_code = exit_code(*first_error);
    r.diagnostic = err.at("message").get<std::string>();
  }
  return r;
}

inline RunResult finite_width_cmd(const RunConfig& cfg) {
  require_json(cfg, "finite-width");
  const auto w = finite_width(cfg.query);
  nlohmann::json j = to_json(w);
  j["query"] = to_json(cfg.query);
  return {kExitOk, j.dump(2) + "\n", {}};
}

inline void check_window(const RunConfig& cfg) {
  if (cfg.n_min > cfg.n_max) throw Error(ErrorCode::InvalidParams, "--n-min must not exceed --n-max");
}

inline std::vector<std::int64_t> grid_of(const RunConfig& cfg) {
  check_window(cfg);
  std::vector<std::int64_t> g;
  for (std::int64_t n = cfg.n_min; n <= cfg.n_max; n *= 2) g.push_back(n);
  return g;
}

inline RunResult bound(const RunConfig& cfg) {
  const auto& p = need_params(cfg);
  const auto g = grid_of(cfg);
  const std::vector<WidthSequence> seqs{upper_bound_sequence(p, g, resolve_strategy(cfg, p), cfg.max_diagonal),
                                        lower_bound_sequence(p, g)};
  if (cfg.format == Format::Json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : seqs) {
      nlohmann::json pts = nlohmann::json::array();
      for (const auto& pt : s.points) pts.push_back({{"n", pt.n}, {"value", pt.value}});
      arr.push_back({{"kind", bound_kind_name(s.kind)}, {"strategy", s.strategy}, {"points", pts}});
    }
    return {kExitOk, arr.dump(2) + "\n", {}};
  }
  return {kExitOk, to_csv(seqs), {}};
}

inline RunResult plan(const RunConfig& cfg) {
  require_json(cfg, "plan");
  const auto& p = need_params(cfg);
  (void)kolmogorov_exponent(p);
  const BlockProblem bp(p);
  const Strategy s = resolve_strategy(cfg, p);
  const int D = cfg.max_diagonal.value_or(default_max_diagonal(bp, cfg.n));
  return {kExitOk, to_json(make_plan(s, cfg.n, bp, D), bp).dump(2) + "\n", {}};
}

inline RunResult slope_check(const RunConfig& cfg) {
  require_json(cfg, "slope-check");
  const auto& p = need_params(cfg);
  check_window(cfg);
  const auto dec = kolmogorov_exponent(p);
  const double target = -to_double(dec.kappa);

  std::vector<WidthSequence> seqs;
  if (cfg.input) {
    std::ifstream in(*cfg.input);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open " + *cfg.input);
    seqs = from_csv(in);
  } else {
    const auto g = grid_of(cfg);
    seqs = {upper_bound_sequence(p, g, resolve_strategy(cfg, p), cfg.max_diagonal), lower_bound_sequence(p, g)};
  }

  nlohmann::json reports = nlohmann::json::array();
  bool ok = true;
  const WidthSequence* upper = nullptr;
  const WidthSequence* lower = nullptr;
  for (const auto& s : seqs) {
    SlopeReport rep = fit_slope(s, cfg.n_min, cfg.n_max);
    rep.target = target;
    const bool within = std::abs(rep.fitted_slope - target) <= kSlopeTolerance;
    ok = ok && within;
    auto j = to_json(rep);
    j["kind"] = bound_kind_name(s.kind);
    j["strategy"] = s.strategy;
    j["within_tolerance"] = within;
    reports.push_back(j);
    (s.kind == BoundKind::UpperBound ? upper : lower) = &s;
  }
  nlohmann::json out{{"case", std::string(case_name(dec.case_id))},
                     {"kappa", to_string(dec.kappa)},
                     {"tolerance", kSlopeTolerance},
                     {"reports", reports}};
  if (upper && lower) {
    bool le = true;
    for (const auto& lp : lower->points)
      for (const auto& up : upper->points)
        if (lp.n == up.n && lp.value > up.value) le = false;
    out["lower_le_upper"] = le;
    ok = ok && le;
  }
  out["pass"] = ok;
  RunResult r{ok ? kExitOk : kExitViolations, out.dump(2) + "\n", {}};
  if (!ok) r.diagnostic = "slope check failed";
  return r;
}

inline RunResult scan(const RunConfig& cfg) {
  require_json(cfg, "scan");
  nlohmann::json out = nlohmann::json::object();
  std::size_t violations = 0;
  if (cfg.grid != ScanGrid::Axioms) {
    const auto rep = cfg.mutant ? table_scan(TableGrid::standard(), conjugate_slip_mutant()) : table_scan();
    out["table"] = to_json(rep);
    violations += rep.violations.size();
  }
  if (cfg.grid != ScanGrid::Table) {
    const auto rep = cfg.mutant ? axiom_suite(AxiomGrid::standard(), inverted_theta_mutant()) : axiom_suite();
    out["axioms"] = to_json(rep);
    violations += rep.violations.size();
  }
  out["mutant"] = cfg.mutant;
  RunResult r{violations == 0 ? kExitOk : kExitViolations, out.dump(2) + "\n", {}};
  if (violations) r.diagnostic = std::to_string(violations) + " violations";
  return r;
}

}  // namespace detail

/// Runs one command. Module errors become their exit codes with a one-line
/// "Name: message" diagnostic; the output is written to cfg.out when set.
inline RunResult run(const RunConfig& cfg) {
  RunResult r;
  try {
    switch (cfg.command) {
      case Command::Classify: r = detail::classify(cfg); break;
      case Command::FiniteWidth: r = detail::finite_width_cmd(cfg); break;
      case Command::Bound: r = detail::bound(cfg); break;
      case Command::Plan: r = detail::plan(cfg); break;
      case Command::SlopeCheck: r = detail::slope_check(cfg); break;
      case Command::Scan: r = detail::scan(cfg); break;
    }
  } catch (const Error& e) {
    return {exit_code(e.code()), {}, e.what()};
  }
  if (cfg.out) {
    std::ofstream f(*cfg.out, std::ios::binary);
    if (!f) return {exit_code(ErrorCode::ParseError), {}, std::string(error_name(ErrorCode::ParseError)) + ": cannot write " + *cfg.out};
    f << r.output;
    r.output.clear();
  }
  return r;
}

}  // namespace nwidths::cli
