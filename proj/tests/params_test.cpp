#include <gtest/gtest.h>

#include "nwidths/params.hpp"

namespace nwidths {
namespace {

Rational q(long a, long b = 1) { return Rational(a, b); }

const std::vector<ExtReal>& exponent_grid() {
  static const std::vector<ExtReal> g{ExtReal(1), q(6, 5), q(4, 3), q(3, 2), ExtReal(2), q(5, 2),
                                      ExtReal(3), ExtReal(4), ExtReal(8), ExtReal::infinity()};
  return g;
}

TEST(Rational, ParsesFractionsAndDecimalsExactly) {
  EXPECT_EQ(parse_rational("3/4"), q(3, 4));
  EXPECT_EQ(parse_rational(" -6/8 "), q(-3, 4));
  EXPECT_EQ(parse_rational("0.1"), q(1, 10));
  EXPECT_EQ(parse_rational("1e-3"), q(1, 1000));
  EXPECT_EQ(parse_rational("-2.5E1"), q(-25));
  EXPECT_EQ(parse_rational("7"), q(7));
  EXPECT_EQ(parse_rational("010"), q(10));
  EXPECT_EQ(parse_rational("0.0625"), q(1, 16));
  EXPECT_EQ(parse_rational("0"), q(0));
}

TEST(Rational, RejectsMalformedInput) {
  for (const char* bad : {"", "1/0", "abc", "1.2.3", "1/2/3", "e5", "--1"}) {
    try {
      (void)parse_rational(bad);
      ADD_FAILURE() << "accepted '" << bad << "'";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ParseError) << bad;
    }
  }
}

TEST(Rational, SerializesAsFractionString) {
  EXPECT_EQ(to_string(q(9, 4)), "9/4");
  EXPECT_EQ(to_string(q(-2)), "-2");
  EXPECT_EQ(to_string(ExtReal::infinity()), "inf");
}

TEST(ExtReal, InfinityOrdersAboveEveryRational) {
  const auto inf = ExtReal::infinity();
  EXPECT_LT(ExtReal(1000000), inf);
  EXPECT_EQ(inf, parse_ext_real("inf"));
  EXPECT_EQ(inf, parse_ext_real("Infinity"));
  EXPECT_EQ(inf.reciprocal(), 0);
  EXPECT_EQ(ExtReal(4).reciprocal(), q(1, 4));
}

TEST(ExtReal, ConjugationIsAnInvolution) {
  for (const auto& p : exponent_grid()) {
    EXPECT_EQ(p.conjugate().conjugate(), p) << p;
    EXPECT_EQ(p.reciprocal() + p.conjugate().reciprocal(), 1) << p;
  }
  EXPECT_EQ(ExtReal(1).conjugate(), ExtReal::infinity());
  EXPECT_EQ(ExtReal::infinity().conjugate(), ExtReal(1));
  EXPECT_EQ(ExtReal(q(4, 3)).conjugate(), ExtReal(4));
}

TEST(Derive, WorkedExamples) {
  EmbeddingParams a;
  a.s1 = 2;
  a.s2 = 0;
  a.p1 = 1;
  a.p2 = 2;
  a.d = 1;
  a.alpha = 1;
  const auto da = derive(a);
  EXPECT_EQ(da.delta, q(3, 2));
  EXPECT_EQ(da.mu, 1);
  EXPECT_EQ(da.p_tilde_inv, 2);
  EXPECT_FALSE(da.theta.has_value());
  ASSERT_TRUE(da.theta1.has_value());
  EXPECT_EQ(*da.theta1, 1);

  EmbeddingParams b = a;
  b.s1 = 1;
  b.p1 = 4;
  b.p2 = 2;
  const auto db = derive(b);
  EXPECT_EQ(db.delta, q(5, 4));
  EXPECT_EQ(db.mu, 1);
  EXPECT_EQ(db.p_tilde_inv, q(5, 4));

  EmbeddingParams c = a;
  c.s1 = 1;
  c.p1 = ExtReal::infinity();
  c.p2 = ExtReal::infinity();
  c.d = 2;
  c.alpha = 3;
  const auto dc = derive(c);
  EXPECT_EQ(dc.delta, 1);
  EXPECT_EQ(dc.mu, 1);
  EXPECT_EQ(dc.p1_conj, ExtReal(1));
}

TEST(Derive, IsPure) {
  const auto p = make_params(3, q(3, 2), 5, q(2, 7), q(9, 4));
  EXPECT_EQ(derive(p), derive(p));
}

TEST(Derive, ThetaPresenceFollowsItsDenominators) {
  for (const auto& p1 : exponent_grid())
    for (const auto& p2 : exponent_grid()) {
      const auto dq = derive(make_params(1, p1, p2, 1, 2));
      EXPECT_EQ(dq.theta.has_value(), p2 != ExtReal(2));
      EXPECT_EQ(dq.theta1.has_value(), p1 != ExtReal(2));
      if (dq.theta)
        EXPECT_EQ(*dq.theta, (p1.reciprocal() - p2.reciprocal()) / (q(1, 2) - p2.reciprocal()));
    }
}

// For p1 < p2 < inf, theta lies in (0,1] exactly when p1 >= 2.
TEST(Derive, ThetaInUnitIntervalExactlyAboveTwo) {
  for (const auto& p1 : exponent_grid())
    for (const auto& p2 : exponent_grid()) {
      if (!(p1 < p2) || p2.is_inf() || p2 == ExtReal(2)) continue;
      const auto t = *derive(make_params(1, p1, p2, 1, 2)).theta;
      EXPECT_EQ(t > 0 && t <= 1, ExtReal(2) <= p1) << p1 << " " << p2;
    }
}

TEST(Compactness, WorkedExamples) {
  EmbeddingParams a;
  a.d = 1;
  a.alpha = q(3, 10);
  a.s1 = q(3, 2);
  a.s2 = 0;
  a.p1 = 2;
  a.p2 = 1;
  EXPECT_EQ(delta_of(a), 2);
  EXPECT_FALSE(is_compact(a));  // 3/10 <= 1/2

  EXPECT_TRUE(is_compact(make_params(1, 1, 2, 1, q(3, 2))));

  // delta = 1/4 forces s1 < s2 here; the predicate is still defined.
  const auto c = make_params(2, 4, 2, 1, q(1, 4));
  EXPECT_FALSE(is_compact(c));
  EXPECT_EQ(validate(c), std::vector<std::string>{"s2<s1 required"});
}

TEST(Compactness, ReducesToPositiveMuWhenP1AtMostP2) {
  for (const auto& p1 : exponent_grid())
    for (const auto& p2 : exponent_grid()) {
      if (!(p1 <= p2)) continue;
      for (const auto& delta : {q(-1, 2), q(0), q(1, 3), q(2)}) {
        const auto p = make_params(2, p1, p2, q(1, 2), delta);
        EXPECT_EQ(is_compact(p), derive(p).mu > 0);
      }
    }
}

TEST(Validate, ReportsEveryViolation) {
  EmbeddingParams p;
  EXPECT_TRUE(validate(p).empty());
  p.s1 = 0;
  p.s2 = 1;
  EXPECT_EQ(validate(p), std::vector<std::string>{"s2<s1 required"});
  p.s1 = 2;
  p.p1 = q(1, 2);
  EXPECT_EQ(validate(p), std::vector<std::string>{"p1 in [1,inf] required"});
  p.alpha = 0;
  p.d = 0;
  EXPECT_EQ(validate(p).size(), 3u);
  EXPECT_THROW(require_valid(p), Error);
}

TEST(ParseParams, KeyValueText) {
  const auto p = parse_params("s1=2 s2=0, p1=1; p2=inf d=3 alpha=0.25 # comment");
  EXPECT_EQ(p.s1, 2);
  EXPECT_EQ(p.p2, ExtReal::infinity());
  EXPECT_EQ(p.d, 3);
  EXPECT_EQ(p.alpha, q(1, 4));
  EXPECT_EQ(p.q1, ExtReal(2));
}

TEST(ParseParams, JsonObjectWithNumbersAndStrings) {
  const auto p = parse_params(R"({"s1": "3/2", "s2": 0, "p1": 4, "p2": "2", "q1": "inf", "d": 1, "alpha": 0.1})");
  EXPECT_EQ(p.s1, q(3, 2));
  EXPECT_EQ(p.p1, ExtReal(4));
  EXPECT_EQ(p.q1, ExtReal::infinity());
  EXPECT_EQ(p.alpha, q(1, 10));
}

TEST(ParseParams, MissingOrMalformedFields) {
  auto code_of = [](const std::string& text) {
    try {
      (void)parse_params(text);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::NonPositiveValue;  // sentinel: nothing thrown
  };
  EXPECT_EQ(code_of("s1=1 s2=0 p1=2 p2=2 d=1"), ErrorCode::ParseError);
  EXPECT_EQ(code_of("s1=1 s2=0 p1=2 p2=2 d=1.5 alpha=1"), ErrorCode::ParseError);
  EXPECT_EQ(code_of("s1=1 s2=0 p1=2 p2=2 d=1 alpha=1 zeta=3"), ErrorCode::ParseError);
  EXPECT_EQ(code_of("{\"s1\": 1"), ErrorCode::ParseError);
  EXPECT_EQ(code_of("s1=1 s2=0 p1=2 p2=2 d=1 alpha=1"), ErrorCode::NonPositiveValue);
}

TEST(ParseParams, JsonRoundTrip) {
  const auto p = make_params(2, q(4, 3), ExtReal::infinity(), q(5, 7), q(11, 3), 1, ExtReal::infinity());
  EXPECT_EQ(params_from_json(to_json(p)), p);
}

}  // namespace
}  // namespace nwidths
