#pragma once

// Weighted mixed sequence spaces l_q(2^{js} l_p(alpha)) over (j, k) in
// N_0 x Z^d, the dyadic block decomposition I_{j,i} used to split the
// identity, and the per-block operator scales 2^{-j delta - i alpha}.
//
// |k| is the Euclidean norm throughout.

#include <nlohmann/json.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "nwidths/error.hpp"
#include "nwidths/rational.hpp"

namespace nwidths {

enum class CountMode { Exact, Surrogate };

inline constexpr std::uint64_t kDefaultEnumerationCap = std::uint64_t{1} << 24;

struct SequenceSpaceSpec {
  Rational s{0};
  ExtReal p{2};
  ExtReal q{2};
  Rational alpha{0};
  int d = 1;
};

struct BlockCell {
  int j = 0;
  int i = 0;
  double cardinality = 1.0;  // M_{j,i}; a double so surrogate sizes can exceed 2^64
  double scale = 1.0;        // 2^{-j delta - i alpha}
};

struct SeqIndex {
  int j = 0;
  std::vector<std::int64_t> k;

  friend auto operator<=>(const SeqIndex&, const SeqIndex&) = default;
};

using SparseSequence = std::map<SeqIndex, std::complex<double>>;

namespace detail {

inline std::uint64_t isqrt(std::uint64_t v) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(v)));
  while (r * r > v) --r;
  while ((r + 1) * (r + 1) <= v) ++r;
  return r;
}

// #{k in Z^dim : |k|^2 <= r2}
inline std::uint64_t ball_count(int dim, std::uint64_t r2) {
  if (dim == 0) return 1;
  const std::uint64_t r = isqrt(r2);
  if (dim == 1) return 2 * r + 1;
  std::uint64_t total = ball_count(dim - 1, r2);
  for (std::uint64_t x = 1; x <= r; ++x) total += 2 * ball_count(dim - 1, r2 - x * x);
  return total;
}

inline void require_block(int j, int i, int d) {
  if (j < 0 || i < 0) throw Error(ErrorCode::InvalidParams, "block indices j, i must be nonnegative");
  if (d < 1) throw Error(ErrorCode::InvalidParams, "dimension d must be positive");
}

}  // namespace detail

/// M_{j,i} = |I_{j,i}| where I_{j,0} = {|k| <= 2^j} and
/// I_{j,i} = {2^{j+i-1} < |k| <= 2^{j+i}} for i >= 1. Surrogate mode returns 2^{d(j+i)}.
inline std::uint64_t block_cardinality(int j, int i, int d, CountMode mode = CountMode::Exact,
                                       std::uint64_t cap = kDefaultEnumerationCap) {
  detail::require_block(j, i, d);
  const int m = j + i;
  if (d * m >= 63) throw Error(ErrorCode::EnumerationTooLarge, "2^{d(j+i)} exceeds 64-bit range");
  const std::uint64_t surrogate = std::uint64_t{1} << (d * m);
  if (mode == CountMode::Surrogate) return surrogate;
  if (surrogate > cap || 2 * m >= 63)
    throw Error(ErrorCode::EnumerationTooLarge,
                "exact count of block (" + std::to_string(j) + "," + std::to_string(i) + ") exceeds the enumeration cap");
  const std::uint64_t outer = detail::ball_count(d, std::uint64_t{1} << (2 * m));
  if (i == 0) return outer;
  return outer - detail::ball_count(d, std::uint64_t{1} << (2 * (m - 1)));
}

/// Calls f(k) for every lattice point k of I_{j,i}, in lexicographic order.
inline void for_each_index(int j, int i, int d, const std::function<void(std::span<const std::int64_t>)>& f) {
  detail::require_block(j, i, d);
  const int m = j + i;
  const auto hi2 = std::uint64_t{1} << (2 * m);
  const std::uint64_t lo2 = i == 0 ? 0 : std::uint64_t{1} << (2 * (m - 1));
  const auto r = static_cast<std::int64_t>(std::uint64_t{1} << m);
  std::vector<std::int64_t> k(static_cast<std::size_t>(d), -r);
  while (true) {
    std::uint64_t n2 = 0;
    for (auto c : k) n2 += static_cast<std::uint64_t>(c * c);
    if (n2 <= hi2 && (i == 0 || n2 > lo2)) f(k);
    int axis = d - 1;
    while (axis >= 0 && k[axis] == r) k[axis--] = -r;
    if (axis < 0) break;
    ++k[axis];
  }
}

/// w_alpha(2^{-j} k) = (1 + |2^{-j} k|^2)^{alpha/2}.
inline double weight_at(int j, std::span<const std::int64_t> k, double alpha) {
  double n2 = 0.0;
  const double s = std::ldexp(1.0, -j);
  for (auto c : k) n2 += (s * c) * (s * c);
  return std::pow(1.0 + n2, alpha / 2.0);
}

inline double block_scale(int j, int i, double delta, double alpha) { return std::exp2(-j * delta - i * alpha); }

inline BlockCell make_cell(int j, int i, int d, double delta, double alpha) {
  return {j, i, std::exp2(static_cast<double>(d) * (j + i)), block_scale(j, i, delta, alpha)};
}

/// ||lambda | l_q(2^{js} l_p(alpha))||, sums replaced by sup at infinite exponents.
inline double norm(const SparseSequence& lambda, const SequenceSpaceSpec& spec) {
  const double alpha = to_double(spec.alpha);
  const double s = to_double(spec.s);
  // inner l_p norms per level j
  std::map<int, std::vector<double>> levels;
  for (const auto& [idx, v] : lambda) {
    if (static_cast<int>(idx.k.size()) != spec.d)
      throw Error(ErrorCode::InvalidParams, "sequence index dimension does not match d");
    levels[idx.j].push_back(std::abs(v) * weight_at(idx.j, idx.k, alpha));
  }
  std::vector<double> outer;
  outer.reserve(levels.size());
  for (const auto& [j, entries] : levels) {
    double inner = 0.0;
    if (spec.p.is_inf()) {
      for (double e : entries) inner = std::max(inner, e);
    } else {
      const double p = spec.p.to_double();
      for (double e : entries) inner += std::pow(e, p);
      inner = std::pow(inner, 1.0 / p);
    }
    outer.push_back(std::exp2(j * s) * inner);
  }
  if (spec.q.is_inf()) {
    double m = 0.0;
    for (double e : outer) m = std::max(m, e);
    return m;
  }
  const double q = spec.q.to_double();
  double total = 0.0;
  for (double e : outer) total += std::pow(e, q);
  return std::pow(total, 1.0 / q);
}

/// [[j, [k...], value], ...]; value is a number, or [re, im] when complex.
inline nlohmann::json to_json(const SparseSequence& lambda) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [idx, v] : lambda) {
    nlohmann::json value = v.imag() == 0.0 ? nlohmann::json(v.real()) : nlohmann::json::array({v.real(), v.imag()});
    out.push_back(nlohmann::json::array({idx.j, idx.k, value}));
  }
  return out;
}

inline SparseSequence sequence_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "sequence must be a JSON array");
  SparseSequence out;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 3) throw Error(ErrorCode::ParseError, "sequence entries are [j, k, value]");
    SeqIndex idx{e[0].get<int>(), e[1].get<std::vector<std::int64_t>>()};
    const auto& v = e[2];
    out[idx] = v.is_array() ? std::complex<double>(v.at(0).get<double>(), v.at(1).get<double>())
                            : std::complex<double>(v.get<double>(), 0.0);
  }
  return out;
}

}  // namespace nwidths
