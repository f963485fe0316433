#pragma once

// Kolmogorov and Gelfand numbers of id : l_{p1}^N -> l_{p2}^N.
//
// The p2 < p1 formula (N-n+1)^{1/p2-1/p1}, the rank-zero case n > N and the
// p1 = p2 case are exact. Everything else is an order model with the
// implicit constants set to 1.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nwidths/error.hpp"
#include "nwidths/exponents.hpp"
#include "nwidths/rational.hpp"

namespace nwidths {

enum class Fidelity { Exact, OrderModel };

inline std::string_view fidelity_name(Fidelity f) { return f == Fidelity::Exact ? "exact" : "order-model"; }

struct ModelWidth {
  double value = 0.0;
  Fidelity fidelity = Fidelity::Exact;
  /// "rank" (n > N), "exact" (p2 < p1), or the small-n clause "i".."iv";
  /// an "-ext" suffix marks use beyond the clause's stated range of n.
  std::string formula_tag;
};

struct FiniteWidthQuery {
  WidthKind kind = WidthKind::Kolmogorov;
  ExtReal p1{2};
  ExtReal p2{2};
  std::uint64_t N = 1;
  std::uint64_t n = 1;

  friend bool operator==(const FiniteWidthQuery&, const FiniteWidthQuery&) = default;
};

/// Kolmogorov <-> Gelfand through the adjoint: (p1, p2) -> (p2', p1').
inline FiniteWidthQuery dualize(const FiniteWidthQuery& q) {
  FiniteWidthQuery r = q;
  r.kind = q.kind == WidthKind::Kolmogorov ? WidthKind::Gelfand : WidthKind::Kolmogorov;
  r.p1 = q.p2.conjugate();
  r.p2 = q.p1.conjugate();
  return r;
}

/// The clause table for one (kind, p1, p2), classified once and then
/// evaluated cheaply for many (N, n). N and n are doubles so the allocator
/// can use surrogate block sizes 2^{d(j+i)} beyond 64 bits.
class FiniteWidthModel {
 public:
  enum class Clause { Equal, Exact, I, II, IV };

  FiniteWidthModel(WidthKind kind, const ExtReal& p1, const ExtReal& p2) : kind_(kind) {
    if (p1 < ExtReal(1) || p2 < ExtReal(1))
      throw Error(ErrorCode::InvalidParams, "finite widths need p1, p2 in [1,inf]");
    inv1_ = to_double(p1.reciprocal());
    inv2_ = to_double(p2.reciprocal());
    const ExtReal two(2);
    if (p1 == p2) {
      clause_ = Clause::Equal;
      const bool clause_i = kind == WidthKind::Kolmogorov ? p1 <= two : two <= p1;
      equal_tag_ = clause_i ? "i" : "iii";
      return;
    }
    if (p2 < p1) {
      clause_ = Clause::Exact;
      return;
    }
    if (kind == WidthKind::Kolmogorov) {
      if (p2 <= two) {
        clause_ = Clause::I;
      } else if (p2.is_inf()) {
        throw Error(ErrorCode::UnsupportedRegion, "Kolmogorov widths with p1 < p2 = inf have no clause");
      } else if (p1 < two) {
        clause_ = Clause::II;
        rate_ = inv2_;
      } else {
        clause_ = Clause::IV;
        rate_ = inv2_;
        power_ = to_double((p1.reciprocal() - p2.reciprocal()) / (Rational(1, 2) - p2.reciprocal()));
      }
    } else {
      if (two <= p1) {
        clause_ = Clause::I;
      } else if (p1 == ExtReal(1)) {
        throw Error(ErrorCode::UnsupportedRegion, "Gelfand widths with 1 = p1 < p2 have no clause");
      } else if (two < p2) {
        clause_ = Clause::II;
        rate_ = 1.0 - inv1_;
      } else {
        clause_ = Clause::IV;
        rate_ = 1.0 - inv1_;
        power_ = to_double((p1.reciprocal() - p2.reciprocal()) / (p1.reciprocal() - Rational(1, 2)));
      }
    }
  }

  WidthKind kind() const { return kind_; }
  Clause clause() const { return clause_; }

  /// Value only; the hot path of the allocator.
  double value(double N, double n) const {
    if (n > N) return 0.0;
    switch (clause_) {
      case Clause::Equal:
      case Clause::I: return 1.0;
      case Clause::Exact: return std::pow(N - n + 1.0, inv2_ - inv1_);
      case Clause::II: return xi(N, n);
      case Clause::IV: return std::pow(xi(N, n), power_);
    }
    return 0.0;
  }

  ModelWidth evaluate(double N, double n) const {
    ModelWidth w;
    w.value = value(N, n);
    if (n > N) {
      w.formula_tag = "rank";
      return w;
    }
    switch (clause_) {
      case Clause::Equal: w.formula_tag = equal_tag_; return w;
      case Clause::Exact: w.formula_tag = "exact"; return w;
      case Clause::I: w.formula_tag = n <= N / 4 ? "i" : "i-ext"; break;
      case Clause::II: w.formula_tag = n <= N / 4 ? "ii" : "ii-ext"; break;
      case Clause::IV: w.formula_tag = "iv"; break;
    }
    w.fidelity = Fidelity::OrderModel;
    return w;
  }

 private:
  // min{1, N^{rate} n^{-1/2}}
  double xi(double N, double n) const { return std::min(1.0, std::pow(N, rate_) / std::sqrt(n)); }

  WidthKind kind_;
  Clause clause_ = Clause::Equal;
  double inv1_ = 0.0;
  double inv2_ = 0.0;
  double rate_ = 0.0;
  double power_ = 1.0;
  const char* equal_tag_ = "i";
};

namespace detail {

inline void require_query(std::uint64_t N, std::uint64_t n) {
  if (N < 1 || n < 1) throw Error(ErrorCode::InvalidParams, "finite widths need N >= 1 and n >= 1");
}

}  // namespace detail

inline ModelWidth kolmogorov_model(const ExtReal& p1, const ExtReal& p2, std::uint64_t N, std::uint64_t n) {
  detail::require_query(N, n);
  return FiniteWidthModel(WidthKind::Kolmogorov, p1, p2).evaluate(static_cast<double>(N), static_cast<double>(n));
}

inline ModelWidth gelfand_model(const ExtReal& p1, const ExtReal& p2, std::uint64_t N, std::uint64_t n) {
  detail::require_query(N, n);
  return FiniteWidthModel(WidthKind::Gelfand, p1, p2).evaluate(static_cast<double>(N), static_cast<double>(n));
}

inline ModelWidth finite_width(const FiniteWidthQuery& q) {
  return q.kind == WidthKind::Kolmogorov ? kolmogorov_model(q.p1, q.p2, q.N, q.n) : gelfand_model(q.p1, q.p2, q.N, q.n);
}

/// ||x||_p, with p = inf the max norm.
inline double lp_norm(std::span<const double> x, const ExtReal& p) {
  if (p.is_inf()) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
  }
  const double pd = p.to_double();
  double s = 0.0;
  for (double v : x) s += std::pow(std::abs(v), pd);
  return std::pow(s, 1.0 / pd);
}

inline constexpr std::uint64_t kOracleMaxN = 12;

/// Brute-force Kolmogorov number over coordinate subspaces, for p2 < p1.
///
/// For every coordinate subspace spanned by n-1 unit vectors, the quotient
/// norm of id is the norm of id restricted to the remaining coordinates; that
/// norm is taken as the largest l_{p2} norm over flat unit vectors of l_{p1}
/// supported on subsets of the remaining coordinates. The result is the
/// minimum over subspaces.
inline double coordinate_oracle(const ExtReal& p1, const ExtReal& p2, std::uint64_t N, std::uint64_t n) {
  detail::require_query(N, n);
  if (N > kOracleMaxN)
    throw Error(ErrorCode::OracleTooLarge, "coordinate oracle enumerates subsets; N <= 12 required");
  if (!(p2 < p1)) throw Error(ErrorCode::UnsupportedRegion, "coordinate oracle is defined for p2 < p1 only");
  if (n > N) return 0.0;

  const unsigned full = (1u << N) - 1u;
  std::vector<double> x(N);
  // Both norms are symmetric, so a flat vector's image norm depends only on
  // the size of its support; cache it per size.
  std::vector<double> by_size(N + 1, -1.0);
  auto flat_norm = [&](unsigned t) {
    const auto k = static_cast<std::size_t>(std::popcount(t));
    if (by_size[k] < 0) {
      const double height = 1.0 / lp_norm(std::vector<double>(k, 1.0), p1);
      for (std::uint64_t c = 0; c < N; ++c) x[c] = (t >> c) & 1u ? height : 0.0;
      by_size[k] = lp_norm(x, p2);
    }
    return by_size[k];
  };
  double best = std::numeric_limits<double>::infinity();
  for (unsigned kernel = 0; kernel <= full; ++kernel) {
    if (static_cast<std::uint64_t>(std::popcount(kernel)) != n - 1) continue;
    const unsigned rest = full & ~kernel;
    double residual = 0.0;
    for (unsigned t = rest; t != 0; t = (t - 1) & rest) residual = std::max(residual, flat_norm(t));
    best = std::min(best, residual);
  }
  return best;
}

inline nlohmann::json to_json(const ModelWidth& w) {
  return {{"value", w.value}, {"fidelity", std::string(fidelity_name(w.fidelity))}, {"formula_tag", w.formula_tag}};
}

inline nlohmann::json to_json(const FiniteWidthQuery& q) {
  return {{"kind", std::string(kind_name(q.kind))}, {"p1", to_string(q.p1)}, {"p2", to_string(q.p2)}, {"N", q.N}, {"n", q.n}};
}

}  // namespace nwidths
