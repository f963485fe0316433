#pragma once

// Decay exponents kappa of Kolmogorov numbers d_n ~ n^{-kappa} and Gelfand
// numbers c_n ~ n^{-kappa} of the weighted embedding, and the classifier
// telling when approximation, Gelfand and Kolmogorov numbers share an order.
//
// Every decision is exact. The engine works at the level of the triple
// (p1, p2, mu/d); the EmbeddingParams overloads add the compactness and
// non-limiting gates that need alpha and delta separately.

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>
#include <vector>

#include "nwidths/error.hpp"
#include "nwidths/params.hpp"
#include "nwidths/rational.hpp"

namespace nwidths {

enum class WidthKind { Kolmogorov, Gelfand };

inline std::string_view kind_name(WidthKind k) { return k == WidthKind::Kolmogorov ? "kolmogorov" : "gelfand"; }

enum class CaseId { i = 1, ii, iii, iv, v, vi };

inline std::string_view case_name(CaseId c) {
  switch (c) {
    case CaseId::i: return "i";
    case CaseId::ii: return "ii";
    case CaseId::iii: return "iii";
    case CaseId::iv: return "iv";
    case CaseId::v: return "v";
    case CaseId::vi: return "vi";
  }
  return "?";
}

struct RegimeDecision {
  WidthKind width_kind = WidthKind::Kolmogorov;
  CaseId case_id = CaseId::i;
  Rational kappa;
  /// Hypothesis tags "a", "b", "c" that were checked, then "region:..." tags
  /// naming each sub-region of the case that matched.
  std::vector<std::string> assumptions_used;
};

/// The point (p1, p2, mu/d) the case tables are stated on.
struct ExponentPoint {
  ExtReal p1;
  ExtReal p2;
  Rational mu_over_d;
};

inline ExponentPoint exponent_point(const EmbeddingParams& p) {
  return {p.p1, p.p2, Rational(min(p.alpha, delta_of(p)) / p.d)};
}

namespace detail {

inline const ExtReal& two() {
  static const ExtReal t(2);
  return t;
}

inline void require_point_compact(const ExponentPoint& x) {
  const Rational rhs = max(x.p2.reciprocal() - x.p1.reciprocal(), Rational(0));
  if (!(x.mu_over_d > rhs))
    throw Error(ErrorCode::NotCompact, "min(alpha,delta)/d = " + to_string(x.mu_over_d) +
                                           " must exceed max(1/p2-1/p1,0) = " + to_string(rhs));
}

// (a): p1 <= p2, or p~ < p2 < p1.
inline void require_hypothesis_a(const ExponentPoint& x) {
  if (x.p1 <= x.p2) return;
  const Rational p_tilde_inv = x.mu_over_d + x.p1.reciprocal();
  if (!(x.p2.reciprocal() < p_tilde_inv))
    throw Error(ErrorCode::HypothesisFailure, "hypothesis (a): p2 < p1 requires p~ < p2 (1/p~ = " +
                                                  to_string(p_tilde_inv) + ")");
}

inline void boundary(std::string_view what) {
  throw Error(ErrorCode::BoundaryCase, std::string(what) + " lies on a boundary the exponent tables exclude");
}

}  // namespace detail

/// Kolmogorov exponent at (p1, p2, mu/d).
inline RegimeDecision kolmogorov_exponent(const ExponentPoint& x) {
  using detail::two;
  detail::require_point_compact(x);
  detail::require_hypothesis_a(x);
  if (x.p1 < x.p2 && x.p2.is_inf())
    throw Error(ErrorCode::HypothesisFailure, "hypothesis (c): p2 < inf required when p1 < p2");

  RegimeDecision r;
  r.width_kind = WidthKind::Kolmogorov;
  r.assumptions_used = {"a", "c"};
  const Rational& k = x.mu_over_d;
  const Rational i1 = x.p1.reciprocal();
  const Rational i2 = x.p2.reciprocal();
  const Rational half(1, 2);

  if (x.p2 < x.p1) {
    r.case_id = CaseId::ii;
    r.kappa = k + i1 - i2;
    r.assumptions_used.emplace_back("region:p~<p2<p1<=inf");
    return r;
  }
  const bool low = x.p2 <= two();                 // 1 <= p1 <= p2 <= 2
  const bool high_equal = two() < x.p1 && x.p1 == x.p2;  // 2 < p1 = p2 <= inf
  if (low || high_equal) {
    r.case_id = CaseId::i;
    r.kappa = k;
    if (low) r.assumptions_used.emplace_back("region:1<=p1<=p2<=2");
    if (high_equal) r.assumptions_used.emplace_back("region:2<p1=p2<=inf");
    return r;
  }
  // Now p1 < p2 < inf and p2 > 2.
  if (x.p1 < two()) {
    r.assumptions_used.emplace_back("region:1<=p1<2<p2<inf");
    if (k == i2) detail::boundary("mu = d/p2");
    if (k > i2) {
      r.case_id = CaseId::iii;
      r.kappa = k + half - i2;
    } else {
      r.case_id = CaseId::iv;
      r.kappa = k * x.p2.value() / 2;
    }
    return r;
  }
  r.assumptions_used.emplace_back("region:2<=p1<p2<inf");
  const Rational theta = (i1 - i2) / (half - i2);
  const Rational gate = i2 * theta;
  if (k == gate) detail::boundary("mu = (d/p2)*theta");
  if (k > gate) {
    r.case_id = CaseId::v;
    r.kappa = k + i1 - i2;
  } else {
    r.case_id = CaseId::vi;
    r.kappa = k * x.p2.value() / 2;
  }
  return r;
}

/// Gelfand exponent at (p1, p2, mu/d).
inline RegimeDecision gelfand_exponent(const ExponentPoint& x) {
  using detail::two;
  detail::require_point_compact(x);
  detail::require_hypothesis_a(x);
  if (x.p1 < x.p2 && x.p1 == ExtReal(1))
    throw Error(ErrorCode::HypothesisFailure, "hypothesis (c): p1 > 1 required when p1 < p2");

  RegimeDecision r;
  r.width_kind = WidthKind::Gelfand;
  r.assumptions_used = {"a", "c"};
  const Rational& k = x.mu_over_d;
  const Rational i1 = x.p1.reciprocal();
  const Rational i2 = x.p2.reciprocal();
  const Rational half(1, 2);

  if (x.p2 < x.p1) {
    r.case_id = CaseId::ii;
    r.kappa = k + i1 - i2;
    r.assumptions_used.emplace_back("region:p~<p2<p1<=inf");
    return r;
  }
  const bool high = two() <= x.p1;                       // 2 <= p1 <= p2 <= inf
  const bool low_equal = x.p1 == x.p2 && x.p1 < two();   // 1 <= p1 = p2 < 2
  if (high || low_equal) {
    r.case_id = CaseId::i;
    r.kappa = k;
    if (high) r.assumptions_used.emplace_back("region:2<=p1<=p2<=inf");
    if (low_equal) r.assumptions_used.emplace_back("region:1<=p1=p2<2");
    return r;
  }
  // Now 1 < p1 < 2 and p1 < p2.
  const ExtReal p1c = x.p1.conjugate();
  const Rational i1c = p1c.reciprocal();  // 1/p1' = 1 - 1/p1
  if (two() < x.p2) {
    r.assumptions_used.emplace_back("region:1<p1<2<p2<=inf");
    if (k == i1c) detail::boundary("mu = d/p1'");
    if (k > i1c) {
      r.case_id = CaseId::iii;
      r.kappa = k + i1 - half;
    } else {
      r.case_id = CaseId::iv;
      r.kappa = k * p1c.value() / 2;
    }
    return r;
  }
  r.assumptions_used.emplace_back("region:1<p1<p2<=2");
  const Rational theta1 = (i1 - i2) / (i1 - half);
  const Rational gate = i1c * theta1;
  if (k == gate) detail::boundary("mu = (d/p1')*theta1");
  if (k > gate) {
    r.case_id = CaseId::v;
    r.kappa = k + i1 - i2;
  } else {
    r.case_id = CaseId::vi;
    r.kappa = k * p1c.value() / 2;
  }
  return r;
}

namespace detail {

inline ExponentPoint gated_point(const EmbeddingParams& p) {
  require_valid(p);
  if (!is_compact(p)) {
    const auto q = derive(p);
    throw Error(ErrorCode::NotCompact, "min(alpha,delta) = " + to_string(q.mu) + " must exceed d*max(1/p2-1/p1,0) = " +
                                           to_string(p.d * max(p.p2.reciprocal() - p.p1.reciprocal(), Rational(0))));
  }
  if (delta_of(p) == p.alpha)
    throw Error(ErrorCode::LimitingCase, "delta == alpha excluded by hypothesis (b)");
  return exponent_point(p);
}

inline RegimeDecision with_b(RegimeDecision r) {
  r.assumptions_used.insert(r.assumptions_used.begin() + 1, "b");
  return r;
}

}  // namespace detail

inline RegimeDecision kolmogorov_exponent(const EmbeddingParams& p) {
  return detail::with_b(kolmogorov_exponent(detail::gated_point(p)));
}

inline RegimeDecision gelfand_exponent(const EmbeddingParams& p) {
  return detail::with_b(gelfand_exponent(detail::gated_point(p)));
}

inline RegimeDecision exponent(WidthKind kind, const EmbeddingParams& p) {
  return kind == WidthKind::Kolmogorov ? kolmogorov_exponent(p) : gelfand_exponent(p);
}

// ---- a_n / c_n / d_n comparison ------------------------------------------

struct ComparisonVerdict {
  bool a_sim_c = false;
  bool a_sim_d = false;
  bool c_sim_d = false;
  std::vector<std::string> matched_clauses;
};

/// Evaluates the comparison clauses at (p1, p2, mu/d). Clauses that fail simply do not match.
inline ComparisonVerdict compare_widths(const ExponentPoint& x) {
  ComparisonVerdict v;
  const ExtReal& p1 = x.p1;
  const ExtReal& p2 = x.p2;
  const ExtReal one(1), two(2);
  const ExtReal p1c = p1.conjugate();
  const ExtReal inf = ExtReal::infinity();
  const bool tilde_below_p2 = p2.reciprocal() < x.mu_over_d + p1.reciprocal();  // p~ < p2
  const bool mu_ne_d_over_p1c = x.mu_over_d != p1c.reciprocal();
  const bool mu_ne_d_over_p2 = x.mu_over_d != p2.reciprocal();
  auto match = [&](bool ok, bool& flag, const char* tag) {
    if (!ok) return;
    flag = true;
    v.matched_clauses.emplace_back(tag);
  };

  match(two <= p1 && p1 < p2, v.a_sim_c, "(i)(a)");
  match(tilde_below_p2 && p2 <= p1, v.a_sim_c, "(i)(b)");
  match(one < p1 && p1 < p1c && p1c <= p2 && mu_ne_d_over_p1c, v.a_sim_c, "(i)(c)");

  match(p1 < p2 && p2 <= two, v.a_sim_d, "(ii)(a)");
  match(tilde_below_p2 && p2 <= p1, v.a_sim_d, "(ii)(b)");
  match(p1 < two && two < p2 && p2 <= p1c && p2 < inf && mu_ne_d_over_p2, v.a_sim_d, "(ii)(c)");

  match(tilde_below_p2 && p2 <= p1, v.c_sim_d, "(iii)(a)");
  match(one < p1 && p1 < p1c && p1c == p2 && p2 < inf && mu_ne_d_over_p2, v.c_sim_d, "(iii)(b)");
  return v;
}

/// Requires delta > 0 and delta != alpha; otherwise no clause applies.
inline ComparisonVerdict compare_widths(const EmbeddingParams& p) {
  const Rational delta = delta_of(p);
  if (!(delta > 0) || delta == p.alpha || !validate(p).empty()) return {};
  return compare_widths(exponent_point(p));
}

inline nlohmann::json to_json(const RegimeDecision& r) {
  return {{"width_kind", std::string(kind_name(r.width_kind))},
          {"case", std::string(case_name(r.case_id))},
          {"kappa", to_string(r.kappa)},
          {"assumptions_used", r.assumptions_used}};
}

inline nlohmann::json to_json(const ComparisonVerdict& v) {
  return {{"a_sim_c", v.a_sim_c}, {"a_sim_d", v.a_sim_d}, {"c_sim_d", v.c_sim_d}, {"matched_clauses", v.matched_clauses}};
}

}  // namespace nwidths
