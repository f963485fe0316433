#pragma once

// Embedding parameters (s1, s2, p1, p2, q1, q2, d, alpha) of the weighted
// embedding A^{s1}_{p1,q1}(R^d, w_alpha) -> A^{s2}_{p2,q2}(R^d), and the
// quantities every exponent formula reads from them.

#include <nlohmann/json.hpp>

#include <array>
#include <charconv>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nwidths/error.hpp"
#include "nwidths/rational.hpp"

namespace nwidths {

struct EmbeddingParams {
  Rational s1{1};
  Rational s2{0};
  ExtReal p1{2};
  ExtReal p2{2};
  ExtReal q1{2};
  ExtReal q2{2};
  int d = 1;
  Rational alpha{1};

  friend bool operator==(const EmbeddingParams&, const EmbeddingParams&) = default;
};

/// Builds parameters with a prescribed smoothness surplus delta (s2 = 0).
inline EmbeddingParams make_params(int d, ExtReal p1, ExtReal p2, Rational alpha, Rational delta,
                                   ExtReal q1 = ExtReal(2), ExtReal q2 = ExtReal(2)) {
  EmbeddingParams p;
  p.d = d;
  p.s1 = delta + d * (p1.reciprocal() - p2.reciprocal());
  p.s2 = 0;
  p.p1 = std::move(p1);
  p.p2 = std::move(p2);
  p.q1 = std::move(q1);
  p.q2 = std::move(q2);
  p.alpha = std::move(alpha);
  return p;
}

struct DerivedQuantities {
  Rational delta;        // s1 - s2 - d(1/p1 - 1/p2)
  Rational mu;           // min(alpha, delta)
  Rational p_tilde_inv;  // mu/d + 1/p1
  std::optional<Rational> theta;   // (1/p1 - 1/p2)/(1/2 - 1/p2), absent at p2 = 2
  std::optional<Rational> theta1;  // (1/p1 - 1/p2)/(1/p1 - 1/2), absent at p1 = 2
  ExtReal p1_conj;
  ExtReal p2_conj;

  friend bool operator==(const DerivedQuantities&, const DerivedQuantities&) = default;
};

inline Rational delta_of(const EmbeddingParams& p) {
  return p.s1 - p.s2 - p.d * (p.p1.reciprocal() - p.p2.reciprocal());
}

inline DerivedQuantities derive(const EmbeddingParams& p) {
  DerivedQuantities q;
  q.delta = delta_of(p);
  q.mu = min(p.alpha, q.delta);
  q.p_tilde_inv = q.mu / p.d + p.p1.reciprocal();
  const Rational gap = p.p1.reciprocal() - p.p2.reciprocal();
  const Rational half(1, 2);
  if (p.p2 != ExtReal(2)) q.theta = gap / (half - p.p2.reciprocal());
  if (p.p1 != ExtReal(2)) q.theta1 = gap / (p.p1.reciprocal() - half);
  q.p1_conj = p.p1.conjugate();
  q.p2_conj = p.p2.conjugate();
  return q;
}

/// min(alpha, delta) > d * max(1/p2 - 1/p1, 0), decided exactly.
inline bool is_compact(const EmbeddingParams& p) {
  const Rational mu = min(p.alpha, delta_of(p));
  return mu > p.d * max(p.p2.reciprocal() - p.p1.reciprocal(), Rational(0));
}

/// Every structural violation, in field order. Empty means valid.
inline std::vector<std::string> validate(const EmbeddingParams& p) {
  std::vector<std::string> out;
  if (!(p.s2 < p.s1)) out.emplace_back("s2<s1 required");
  const std::array<std::pair<const char*, const ExtReal*>, 4> exps{
      {{"p1", &p.p1}, {"p2", &p.p2}, {"q1", &p.q1}, {"q2", &p.q2}}};
  for (const auto& [name, v] : exps)
    if (*v < ExtReal(1)) out.emplace_back(std::string(name) + " in [1,inf] required");
  if (p.d < 1) out.emplace_back("d>=1 required");
  if (!(p.alpha > 0)) out.emplace_back("alpha>0 required");
  return out;
}

inline void require_valid(const EmbeddingParams& p) {
  const auto v = validate(p);
  if (v.empty()) return;
  std::string msg;
  for (const auto& s : v) msg += (msg.empty() ? "" : "; ") + s;
  throw Error(ErrorCode::InvalidParams, msg);
}

// ---- text / JSON forms -----------------------------------------------------

namespace detail {

inline void assign_field(EmbeddingParams& p, const std::string& key, const std::string& value) {
  if (key == "s1") p.s1 = parse_rational(value);
  else if (key == "s2") p.s2 = parse_rational(value);
  else if (key == "p1") p.p1 = parse_ext_real(value);
  else if (key == "p2") p.p2 = parse_ext_real(value);
  else if (key == "q1") p.q1 = parse_ext_real(value);
  else if (key == "q2") p.q2 = parse_ext_real(value);
  else if (key == "alpha") p.alpha = parse_rational(value);
  else if (key == "d") {
    const Rational d = parse_rational(value);
    if (boost::multiprecision::denominator(d) != 1 || d < 1 || d > 64)
      throw Error(ErrorCode::ParseError, "d must be an integer in [1,64], got '" + value + "'");
    p.d = boost::multiprecision::numerator(d).convert_to<int>();
  } else {
    throw Error(ErrorCode::ParseError, "unknown parameter '" + key + "'");
  }
}

inline const std::array<const char*, 6> kRequiredKeys{"s1", "s2", "p1", "p2", "d", "alpha"};

inline void check_required(const std::map<std::string, std::string>& fields) {
  for (const char* k : kRequiredKeys)
    if (!fields.count(k)) throw Error(ErrorCode::ParseError, std::string("missing parameter '") + k + "'");
}

inline EmbeddingParams from_fields(const std::map<std::string, std::string>& fields) {
  check_required(fields);
  EmbeddingParams p;
  for (const auto& [k, v] : fields) assign_field(p, k, v);
  return p;
}

// Shortest round-trip spelling of a JSON float, so 0.3 stays 3/10.
inline std::string json_scalar_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_float()) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v.get<double>());
    if (ec != std::errc()) throw Error(ErrorCode::ParseError, "unprintable number");
    return std::string(buf.data(), end);
  }
  throw Error(ErrorCode::ParseError, "parameter values must be strings or numbers");
}

}  // namespace detail

/// Flat "key=value" text; pairs separated by whitespace, commas, semicolons or newlines.
inline EmbeddingParams parse_params_kv(const std::string& text) {
  std::string norm = text;
  for (auto& c : norm)
    if (c == ',' || c == ';') c = ' ';
  std::istringstream in(norm);
  std::map<std::string, std::string> fields;
  std::string tok;
  while (in >> tok) {
    if (tok.front() == '#') {
      std::getline(in, tok);
      continue;
    }
    const auto eq = tok.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == tok.size())
      throw Error(ErrorCode::ParseError, "expected key=value, got '" + tok + "'");
    fields[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return detail::from_fields(fields);
}

inline EmbeddingParams params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "parameters must be a JSON object");
  std::map<std::string, std::string> fields;
  for (const auto& [k, v] : j.items()) fields[k] = detail::json_scalar_text(v);
  return detail::from_fields(fields);
}

/// JSON object if the text starts with '{', key=value text otherwise.
inline EmbeddingParams parse_params(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::ParseError, e.what());
    }
    return params_from_json(j);
  }
  return parse_params_kv(text);
}

inline nlohmann::json to_json(const EmbeddingParams& p) {
  return {{"s1", to_string(p.s1)}, {"s2", to_string(p.s2)}, {"p1", to_string(p.p1)},
          {"p2", to_string(p.p2)}, {"q1", to_string(p.q1)}, {"q2", to_string(p.q2)},
          {"d", p.d},              {"alpha", to_string(p.alpha)}};
}

inline nlohmann::json to_json(const DerivedQuantities& q) {
  nlohmann::json j{{"delta", to_string(q.delta)},
                   {"mu", to_string(q.mu)},
                   {"p_tilde_inv", to_string(q.p_tilde_inv)},
                   {"p1_conj", to_string(q.p1_conj)},
                   {"p2_conj", to_string(q.p2_conj)}};
  j["theta"] = q.theta ? nlohmann::json(to_string(*q.theta)) : nlohmann::json(nullptr);
  j["theta1"] = q.theta1 ? nlohmann::json(to_string(*q.theta1)) : nlohmann::json(nullptr);
  return j;
}

}  // namespace nwidths
