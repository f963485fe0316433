#pragma once

// Checks that turn asymptotic statements into assertions: log-log slope
// fits, an axiom suite for the finite width models, and an exhaustive scan
// of the exponent tables against independently written case predicates.

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nwidths/allocator.hpp"
#include "nwidths/error.hpp"
#include "nwidths/exponents.hpp"
#include "nwidths/finwidths.hpp"
#include "nwidths/params.hpp"

namespace nwidths {

// ---- slopes ---------------------------------------------------------------

struct SlopeReport {
  double fitted_slope = 0.0;
  double target = std::numeric_limits<double>::quiet_NaN();  // -kappa when known
  double residual_rms = 0.0;
  std::int64_t n_min = 1;
  std::int64_t n_max = 1;
  int point_count = 0;
};

inline constexpr std::int64_t kDefaultSlopeMin = std::int64_t{1} << 8;
inline constexpr std::int64_t kDefaultSlopeMax = std::int64_t{1} << 18;
inline constexpr double kSlopeTolerance = 0.05;

/// Least-squares slope of log2(value) against log2(n) over n_min <= n <= n_max.
inline SlopeReport fit_slope(const WidthSequence& seq, std::int64_t n_min = kDefaultSlopeMin,
                             std::int64_t n_max = kDefaultSlopeMax) {
  std::vector<double> xs, ys;
  for (const auto& pt : seq.points) {
    if (pt.n < n_min || pt.n > n_max) continue;
    if (!(pt.value > 0.0))
      throw Error(ErrorCode::NonPositiveValue, "value at n = " + std::to_string(pt.n) + " is not positive");
    xs.push_back(std::log2(static_cast<double>(pt.n)));
    ys.push_back(std::log2(pt.value));
  }
  if (xs.size() < 5)
    throw Error(ErrorCode::InsufficientPoints, "slope fit needs >= 5 points in the window, got " + std::to_string(xs.size()));
  const double k = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t t = 0; t < xs.size(); ++t) {
    mx += xs[t];
    my += ys[t];
  }
  mx /= k;
  my /= k;
  double sxx = 0, sxy = 0;
  for (std::size_t t = 0; t < xs.size(); ++t) {
    sxx += (xs[t] - mx) * (xs[t] - mx);
    sxy += (xs[t] - mx) * (ys[t] - my);
  }
  SlopeReport r;
  r.fitted_slope = sxy / sxx;
  double ss = 0;
  for (std::size_t t = 0; t < xs.size(); ++t) {
    const double e = ys[t] - (my + r.fitted_slope * (xs[t] - mx));
    ss += e * e;
  }
  r.residual_rms = std::sqrt(ss / k);
  r.n_min = n_min;
  r.n_max = n_max;
  r.point_count = static_cast<int>(xs.size());
  return r;
}

/// max/min over dyadic sub-windows of sup n^kappa * value; bounded when the
/// L_{1/kappa, inf} quasi-norm stays finite along the sequence.
inline double ideal_norm_spread(const WidthSequence& seq, double kappa, std::int64_t n_min = kDefaultSlopeMin,
                                std::int64_t n_max = kDefaultSlopeMax, int octaves_per_window = 2) {
  std::map<int, double> window_sup;
  for (const auto& pt : seq.points) {
    if (pt.n < n_min || pt.n > n_max) continue;
    const int w = static_cast<int>(std::floor(std::log2(static_cast<double>(pt.n) / static_cast<double>(n_min)) /
                                              octaves_per_window + 1e-9));
    const double g = std::pow(static_cast<double>(pt.n), kappa) * pt.value;
    auto [it, fresh] = window_sup.try_emplace(w, g);
    if (!fresh) it->second = std::max(it->second, g);
  }
  if (window_sup.empty()) throw Error(ErrorCode::InsufficientPoints, "no points in the window");
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (const auto& [w, g] : window_sup) {
    lo = std::min(lo, g);
    hi = std::max(hi, g);
  }
  return hi / lo;
}

// ---- scan reports ---------------------------------------------------------

struct Violation {
  std::string cell;
  std::string check;
};

struct GridScanReport {
  std::size_t cells_tested = 0;
  std::vector<Violation> violations;
  /// Declared errors (not violations), counted by name.
  std::map<std::string, std::size_t> declared_errors;

  bool ok() const { return violations.empty(); }
};

// ---- axiom suite for finite width models -----------------------------------

using ModelSource = std::function<ModelWidth(const FiniteWidthQuery&)>;

inline ModelSource default_model_source() { return [](const FiniteWidthQuery& q) { return finite_width(q); }; }

/// The width models with theta replaced by 1/theta (and theta1 by 1/theta1).
inline ModelSource inverted_theta_mutant() {
  return [](const FiniteWidthQuery& q) {
    ModelWidth w = finite_width(q);
    if (w.formula_tag != "iv") return w;
    const double gap = to_double(q.p1.reciprocal() - q.p2.reciprocal());
    const double base = q.kind == WidthKind::Kolmogorov ? to_double(q.p2.reciprocal()) : 1.0 - to_double(q.p1.reciprocal());
    const double denom = q.kind == WidthKind::Kolmogorov ? 0.5 - to_double(q.p2.reciprocal())
                                                         : to_double(q.p1.reciprocal()) - 0.5;
    const double theta = gap / denom;
    const double xi = std::min(1.0, std::pow(static_cast<double>(q.N), base) / std::sqrt(static_cast<double>(q.n)));
    w.value = std::pow(xi, 1.0 / theta);
    return w;
  };
}

struct AxiomGrid {
  std::vector<ExtReal> exponents;
  std::uint64_t n_lo = 4;
  std::uint64_t n_hi = 64;

  static AxiomGrid standard() {
    return {{ExtReal(1), Rational(4, 3), Rational(3, 2), ExtReal(2), ExtReal(3), ExtReal(4), ExtReal::infinity()}, 4, 64};
  }
};

namespace detail {

inline std::string query_label(const FiniteWidthQuery& q) {
  return std::string(kind_name(q.kind)) + " p1=" + to_string(q.p1) + " p2=" + to_string(q.p2) +
         " N=" + std::to_string(q.N) + " n=" + std::to_string(q.n);
}

inline bool close_rel(double a, double b, double tol = 1e-12) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace detail

/// PS1 (nonincreasing, s_1 = ||id||), PS4 (zero exactly beyond rank N),
/// monotonicity under the contractive identities l_p -> l_r (r >= p), the
/// duality involution, and equality of dual values on exact clauses.
inline GridScanReport axiom_suite(const AxiomGrid& grid = AxiomGrid::standard(),
                                  const ModelSource& source = default_model_source()) {
  GridScanReport rep;
  auto flag = [&](const FiniteWidthQuery& q, const char* check) { rep.violations.push_back({detail::query_label(q), check}); };
  auto supported = [&](const FiniteWidthQuery& q) -> std::optional<ModelWidth> {
    try {
      return source(q);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::UnsupportedRegion) throw;
      ++rep.declared_errors[std::string(error_name(e.code()))];
      return std::nullopt;
    }
  };

  for (const WidthKind kind : {WidthKind::Kolmogorov, WidthKind::Gelfand})
    for (const auto& p1 : grid.exponents)
      for (const auto& p2 : grid.exponents)
        for (std::uint64_t N = grid.n_lo; N <= grid.n_hi; ++N) {
          ++rep.cells_tested;
          FiniteWidthQuery q{kind, p1, p2, N, 1};
          const auto first = supported(q);
          if (!first) continue;

          const double norm = std::max(1.0, std::pow(static_cast<double>(N), to_double(p2.reciprocal() - p1.reciprocal())));
          if (!detail::close_rel(first->value, norm)) flag(q, "PS1: s_1 equals the operator norm");

          double prev = first->value;
          for (std::uint64_t n = 2; n <= N + 1; ++n) {
            q.n = n;
            const auto w = source(q);
            if (w.value > prev * (1 + 1e-12)) flag(q, "PS1: nonincreasing in n");
            if ((n > N) != (w.value == 0.0)) flag(q, "PS4: zero exactly when n > N");
            prev = w.value;
          }

          // Enlarging p1 or shrinking p2 composes id with a contraction on
          // the other side, which can only increase the width.
          for (const std::uint64_t n : {std::uint64_t{1}, N / 4, N / 2, N}) {
            if (n < 1) continue;
            q.n = n;
            const double here = source(q).value;
            for (const auto& r : grid.exponents) {
              if (p1 < r) {
                const auto bigger = supported({kind, r, p2, N, n});
                if (bigger && bigger->value < here * (1 - 1e-12)) flag(q, "PS3: nondecreasing in p1");
              }
              if (r < p2) {
                const auto bigger = supported({kind, p1, r, N, n});
                if (bigger && bigger->value < here * (1 - 1e-12)) flag(q, "PS3: nonincreasing in p2");
              }
            }
            const auto dual = dualize(q);
            if (!(dualize(dual) == q)) flag(q, "duality: dualize is an involution");
            const auto here_w = source(q);
            if (here_w.fidelity == Fidelity::Exact) {
              const auto there = supported(dual);
              if (!there || !detail::close_rel(there->value, here_w.value)) flag(q, "duality: exact values preserved");
            }
          }
        }
  return rep;
}

// ---- exponent table scan ----------------------------------------------------

struct ExponentTables {
  std::function<RegimeDecision(const EmbeddingParams&)> kolmogorov_params;
  std::function<RegimeDecision(const EmbeddingParams&)> gelfand_params;
  std::function<RegimeDecision(const ExponentPoint&)> kolmogorov_point;
  std::function<RegimeDecision(const ExponentPoint&)> gelfand_point;
  std::function<ComparisonVerdict(const EmbeddingParams&)> compare;

  static ExponentTables standard() {
    return {[](const EmbeddingParams& p) { return kolmogorov_exponent(p); },
            [](const EmbeddingParams& p) { return gelfand_exponent(p); },
            [](const ExponentPoint& x) { return kolmogorov_exponent(x); },
            [](const ExponentPoint& x) { return gelfand_exponent(x); },
            [](const EmbeddingParams& p) { return compare_widths(p); }};
  }
};

/// Gelfand case (iv) with p1 written where p1' belongs.
inline ExponentTables conjugate_slip_mutant() {
  auto t = ExponentTables::standard();
  auto slip = [](RegimeDecision r, const ExtReal& p1, const Rational& mu_over_d) {
    if (r.case_id == CaseId::iv) r.kappa = mu_over_d * p1.value() / 2;
    return r;
  };
  t.gelfand_params = [slip](const EmbeddingParams& p) { return slip(gelfand_exponent(p), p.p1, exponent_point(p).mu_over_d); };
  t.gelfand_point = [slip](const ExponentPoint& x) { return slip(gelfand_exponent(x), x.p1, x.mu_over_d); };
  return t;
}

struct TableGrid {
  std::vector<int> dims;
  std::vector<ExtReal> exponents;
  std::vector<Rational> alphas;
  std::vector<Rational> deltas;

  std::size_t size() const { return dims.size() * exponents.size() * exponents.size() * alphas.size() * deltas.size(); }

  static TableGrid standard() {
    return {{1, 2, 3},
            {ExtReal(1), Rational(4, 3), Rational(3, 2), ExtReal(2), Rational(5, 2), ExtReal(3), ExtReal(4), ExtReal(6),
             ExtReal::infinity()},
            {Rational(1, 10), Rational(1, 4), Rational(1, 3), Rational(1, 2), Rational(1), Rational(3, 2), Rational(2)},
            {Rational(-1, 2), Rational(1, 10), Rational(1, 4), Rational(1, 2), Rational(1), Rational(3, 2), Rational(3)}};
  }
};

namespace detail {

struct CaseRule {
  CaseId id;
  std::function<bool(const ExponentPoint&)> region;
  std::function<Rational(const ExponentPoint&)> kappa;
};

// The case lists, transcribed one clause per entry, independent of the
// if-chains in exponents.hpp.
inline std::vector<CaseRule> kolmogorov_rules() {
  const ExtReal one(1), two(2), inf = ExtReal::infinity();
  auto inv = [](const ExtReal& p) { return p.reciprocal(); };
  auto theta = [inv](const ExponentPoint& x) {
    return Rational((inv(x.p1) - inv(x.p2)) / (Rational(1, 2) - inv(x.p2)));
  };
  auto tilde_below = [inv](const ExponentPoint& x) { return inv(x.p2) < x.mu_over_d + inv(x.p1); };
  return {
      {CaseId::i, [=](const ExponentPoint& x) { return (one <= x.p1 && x.p1 <= x.p2 && x.p2 <= two) ||
                                                       (two < x.p1 && x.p1 == x.p2 && x.p2 <= inf); },
       [](const ExponentPoint& x) { return x.mu_over_d; }},
      {CaseId::ii, [=](const ExponentPoint& x) { return tilde_below(x) && x.p2 < x.p1 && x.p1 <= inf; },
       [=](const ExponentPoint& x) { return Rational(x.mu_over_d + inv(x.p1) - inv(x.p2)); }},
      {CaseId::iii, [=](const ExponentPoint& x) { return one <= x.p1 && x.p1 < two && two < x.p2 && x.p2 < inf &&
                                                         x.mu_over_d > inv(x.p2); },
       [=](const ExponentPoint& x) { return Rational(x.mu_over_d + Rational(1, 2) - inv(x.p2)); }},
      {CaseId::iv, [=](const ExponentPoint& x) { return one <= x.p1 && x.p1 < two && two < x.p2 && x.p2 < inf &&
                                                        x.mu_over_d < inv(x.p2); },
       [](const ExponentPoint& x) { return Rational(x.mu_over_d * x.p2.value() / 2); }},
      {CaseId::v, [=](const ExponentPoint& x) { return two <= x.p1 && x.p1 < x.p2 && x.p2 < inf &&
                                                       x.mu_over_d > inv(x.p2) * theta(x); },
       [=](const ExponentPoint& x) { return Rational(x.mu_over_d + inv(x.p1) - inv(x.p2)); }},
      {CaseId::vi, [=](const ExponentPoint& x) { return two <= x.p1 && x.p1 < x.p2 && x.p2 < inf &&
                                                        x.mu_over_d < inv(x.p2) * theta(x); },
       [](const ExponentPoint& x) { return Rational(x.mu_over_d * x.p2.value() / 2); }},
  };
}

inline std::vector<CaseRule> gelfand_rules() {
  const ExtReal one(1), two(2), inf = ExtReal::infinity();
  auto inv = [](const ExtReal& p) { return p.reciprocal(); };
  auto inv_conj = [](const ExtReal& p) { return p.conjugate().reciprocal(); };
  auto theta1 = [inv](const ExponentPoint& x) {
    return Rational((inv(x.p1) - inv(x.p2)) / (inv(x.p1) - Rational(1, 2)));
  };
  auto tilde_below = [inv](const ExponentPoint& x) { return inv(x.p2) < x.mu_over_d + inv(x.p1); };
  return {
      {CaseId::i, [=](const ExponentPoint& x) { return (two <= x.p1 && x.p1 <= x.p2 && x.p2 <= inf) ||
                                                       (one <= x.p1 && x.p1 == x.p2 && x.p2 < two); },
       [](const ExponentPoint& x) { return x.mu_over_d; }},
      {CaseId::ii, [=](const ExponentPoint& x) { return tilde_below(x) && x.p2 < x.p1 && x.p1 <= inf; },
       [=](const ExponentPoint& x) { return Rational(x.mu_over_d + inv(x.p1) - inv(x.p2)); }},
      {CaseId::iii, [=](const ExponentPoint& x) { return one < x.p1 && x.p1 < two && two < x.p2 && x.p2 <= inf &&
                                                         x.mu_over_d > inv_conj(x.p1); },
       [=](const ExponentPoint& x) { return Rational(x.mu_over_d + inv(x.p1) - Rational(1, 2)); }},
      {CaseId::iv, [=](const ExponentPoint& x) { return one < x.p1 && x.p1 < two && two < x.p2 && x.p2 <= inf &&
                                                        x.mu_over_d < inv_conj(x.p1); },
       [](const ExponentPoint& x) { return Rational(x.mu_over_d * x.p1.conjugate().value() / 2); }},
      {CaseId::v, [=](const ExponentPoint& x) { return one < x.p1 && x.p1 < x.p2 && x.p2 <= two &&
                                                       x.mu_over_d > inv_conj(x.p1) * theta1(x); },
       [=](const ExponentPoint& x) { return Rational(x.mu_over_d + inv(x.p1) - inv(x.p2)); }},
      {CaseId::vi, [=](const ExponentPoint& x) { return one < x.p1 && x.p1 < x.p2 && x.p2 <= two &&
                                                        x.mu_over_d < inv_conj(x.p1) * theta1(x); },
       [](const ExponentPoint& x) { return Rational(x.mu_over_d * x.p1.conjugate().value() / 2); }},
  };
}

inline bool hypotheses_hold(WidthKind kind, const ExponentPoint& x) {
  const bool a = x.p1 <= x.p2 || (x.p2.reciprocal() < x.mu_over_d + x.p1.reciprocal() && x.p2 < x.p1);
  const bool c = kind == WidthKind::Kolmogorov ? (!(x.p1 < x.p2) || !x.p2.is_inf()) : (!(x.p1 < x.p2) || ExtReal(1) < x.p1);
  return a && c;
}

inline std::string params_label(const EmbeddingParams& p) {
  return "d=" + std::to_string(p.d) + " p1=" + to_string(p.p1) + " p2=" + to_string(p.p2) + " alpha=" + to_string(p.alpha) +
         " delta=" + to_string(delta_of(p));
}

}  // namespace detail

/// Runs the four table checks over every cell of the grid.
inline GridScanReport table_scan(const TableGrid& grid = TableGrid::standard(),
                                 const ExponentTables& tables = ExponentTables::standard()) {
  GridScanReport rep;
  const auto k_rules = detail::kolmogorov_rules();
  const auto g_rules = detail::gelfand_rules();

  for (int d : grid.dims)
    for (const auto& p1 : grid.exponents)
      for (const auto& p2 : grid.exponents)
        for (const auto& alpha : grid.alphas)
          for (const auto& delta : grid.deltas) {
            ++rep.cells_tested;
            const EmbeddingParams p = make_params(d, p1, p2, alpha, delta);
            const std::string label = detail::params_label(p);
            auto flag = [&](const std::string& check) { rep.violations.push_back({label, check}); };
            const bool valid = validate(p).empty();
            const bool compact = valid && is_compact(p);

            for (const WidthKind kind : {WidthKind::Kolmogorov, WidthKind::Gelfand}) {
              const auto& rules = kind == WidthKind::Kolmogorov ? k_rules : g_rules;
              const auto& engine = kind == WidthKind::Kolmogorov ? tables.kolmogorov_params : tables.gelfand_params;
              const std::string kname(kind_name(kind));
              const ExponentPoint x = exponent_point(p);
              std::vector<const detail::CaseRule*> hits;
              for (const auto& r : rules)
                if (r.region(x)) hits.push_back(&r);
              try {
                const RegimeDecision dec = engine(p);
                if (!compact) flag(kname + ": compactness gate (case returned for non-compact cell)");
                if (!detail::hypotheses_hold(kind, x)) flag(kname + ": case returned although a hypothesis fails");
                if (hits.size() != 1) {
                  flag(kname + ": one-case coverage (" + std::to_string(hits.size()) + " regions match)");
                } else {
                  if (hits.front()->id != dec.case_id) flag(kname + ": case id disagrees with its region");
                  if (hits.front()->kappa(x) != dec.kappa) flag(kname + ": kappa disagrees with the case formula");
                }
                if (!(dec.kappa > 0)) flag(kname + ": kappa must be positive");
              } catch (const Error& e) {
                ++rep.declared_errors[std::string(error_name(e.code()))];
                switch (e.code()) {
                  case ErrorCode::InvalidParams:
                    if (valid) flag(kname + ": InvalidParams on a valid cell");
                    break;
                  case ErrorCode::NotCompact:
                    if (compact) flag(kname + ": compactness gate (NotCompact on a compact cell)");
                    break;
                  case ErrorCode::LimitingCase:
                    if (!compact || delta != alpha) flag(kname + ": LimitingCase off the delta == alpha line");
                    break;
                  case ErrorCode::HypothesisFailure:
                    if (!compact || delta == alpha || detail::hypotheses_hold(kind, x))
                      flag(kname + ": HypothesisFailure with hypotheses satisfied");
                    break;
                  case ErrorCode::BoundaryCase:
                    if (!compact || delta == alpha || !detail::hypotheses_hold(kind, x) || !hits.empty())
                      flag(kname + ": BoundaryCase off a boundary");
                    break;
                  default: flag(kname + ": undeclared error " + std::string(error_name(e.code())));
                }
                if (compact && delta != alpha && detail::hypotheses_hold(kind, x) && hits.size() == 1)
                  flag(kname + ": one-case coverage (engine refused a covered cell)");
              }
            }

            // Duality at the (p1, p2, mu/d) level, both directions.
            if (compact && delta != alpha) {
              const ExponentPoint x = exponent_point(p);
              const ExponentPoint dual{p2.conjugate(), p1.conjugate(), x.mu_over_d};
              auto fired = [](const auto& f, const ExponentPoint& pt) -> std::optional<Rational> {
                try {
                  return f(pt).kappa;
                } catch (const Error&) {
                  return std::nullopt;
                }
              };
              const auto kg = fired(tables.gelfand_point, x), kd = fired(tables.kolmogorov_point, dual);
              if (kg && kd && *kg != *kd) flag("duality: gelfand(p1,p2) != kolmogorov(p2',p1')");
              const auto kk = fired(tables.kolmogorov_point, x), gd = fired(tables.gelfand_point, dual);
              if (kk && gd && *kk != *gd) flag("duality: kolmogorov(p1,p2) != gelfand(p2',p1')");
            }

            const ComparisonVerdict v = tables.compare(p);
            if (v.a_sim_c && v.a_sim_d && !v.c_sim_d) flag("classifier: a~c and a~d but not c~d");
            if ((v.a_sim_c || v.a_sim_d || v.c_sim_d) && v.matched_clauses.empty()) flag("classifier: flag without clause");
          }
  return rep;
}

inline nlohmann::json to_json(const SlopeReport& r) {
  return {{"fitted_slope", r.fitted_slope},
          {"target", std::isnan(r.target) ? nlohmann::json(nullptr) : nlohmann::json(r.target)},
          {"residual_rms", r.residual_rms},
          {"window", {r.n_min, r.n_max}},
          {"point_count", r.point_count}};
}

inline nlohmann::json to_json(const GridScanReport& r) {
  nlohmann::json v = nlohmann::json::array();
  for (const auto& x : r.violations) v.push_back({{"cell", x.cell}, {"check", x.check}});
  return {{"cells_tested", r.cells_tested}, {"violations", v}, {"declared_errors", r.declared_errors}};
}

}  // namespace nwidths
