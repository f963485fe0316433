#include <gtest/gtest.h>

#include <cmath>

#include "nwidths/allocator.hpp"

namespace nwidths {
namespace {

Rational q(long a, long b = 1) { return Rational(a, b); }

// d = 1, p1 = 1, p2 = 4: theta = 1, tau = 4, h = 2, mu = 1/8 < d/tau.
EmbeddingParams step4_params() { return make_params(1, 1, 4, q(1, 8), 9); }
// d = 1, p1 = 1, p2 = 4 with mu = 1 > d/tau.
EmbeddingParams step3_params() { return make_params(1, 1, 4, 1, 3); }

ErrorCode error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "nothing thrown";
  return ErrorCode::ParseError;
}

std::int64_t spent(const AllocationPlan& p) {
  std::int64_t s = 0;
  for (const auto& [cell, n] : p.budgets) s += n - 1;
  return s;
}

void expect_covers(const AllocationPlan& p) {
  for (int m = 0; m <= p.M2; ++m)
    for (int j = 0; j <= m; ++j) EXPECT_TRUE(p.budgets.count({j, m - j})) << j << "," << m - j;
}

TEST(Step4, DiagonalsUseStrictFloor) {
  const BlockProblem bp(step4_params());
  const auto plan = paper_allocation_step4(4096, bp);
  EXPECT_EQ(plan.M1, 8);
  EXPECT_EQ(plan.M2, 23);
  EXPECT_GT(plan.epsilon, 0.0);
  EXPECT_LT(plan.epsilon, 1.0);
  EXPECT_EQ(plan.strategy, Strategy::PaperStep4);
  EXPECT_LE(spent(plan), plan.n_total - 1);
  expect_covers(plan);
  EXPECT_EQ(evaluate_plan(plan, bp).delta1, 0.0);
}

TEST(Step4, StrictFloorAtIntegers) {
  EXPECT_EQ(detail::strict_floor(24.0), 23);
  EXPECT_EQ(detail::strict_floor(23.5), 23);
  EXPECT_EQ(detail::strict_floor(0.0), -1);
}

TEST(Step4, ConstraintRegionHoldsOnBothSides) {
  // delta > alpha and delta < alpha, both with mu < d/tau
  for (const auto& p : {make_params(1, 1, 4, q(1, 8), 9), make_params(1, 1, 4, 2, q(1, 8)),
                        make_params(2, 1, 3, q(1, 3), 5), make_params(1, 3, 4, q(1, 20), 2)}) {
    const BlockProblem bp(p);
    const auto ie = *detail::ideal_exponents(p);
    for (std::int64_t n : {16, 256, 4096, 65536}) {
      AllocationPlan plan;
      try {
        plan = paper_allocation_step4(n, bp);
      } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InfeasibleConstraints) << "only M1 >= M2 may refuse";
        continue;
      }
      const double h = ie.h, tau = ie.tau, d = p.d;
      const double a = bp.alpha(), dl = bp.delta();
      EXPECT_GT(plan.epsilon, 0.0);
      EXPECT_LT(plan.epsilon, 1.0);
      if (dl > a) {
        EXPECT_LT(a + plan.z1 / h, d / tau);
        EXPECT_GT(plan.z1 - plan.z2, 0.0);
        EXPECT_LT((plan.z1 - plan.z2) / h, dl - a);
        EXPECT_GT(plan.z2, 0.0);
      } else {
        EXPECT_LT(dl + plan.z2 / h, d / tau);
        EXPECT_GT(plan.z2 - plan.z1, 0.0);
        EXPECT_LT((plan.z2 - plan.z1) / h, a - dl);
        EXPECT_GT(plan.z1, 0.0);
      }
      EXPECT_EQ(evaluate_plan(plan, bp).delta1, 0.0);
      // full rank on the first M1 diagonals costs about M1 2^{M1 d} <= n
      double full = 0;
      for (int m = 0; m <= plan.M1; ++m) full += (m + 1) * std::exp2(d * m);
      EXPECT_LE(full, 4.0 * static_cast<double>(n));
    }
  }
}

TEST(Step4, RegimeChecks) {
  EXPECT_EQ(error_of([] { (void)paper_allocation_step4(4096, BlockProblem(step3_params())); }),
            ErrorCode::RegimeMismatch);
  EXPECT_EQ(error_of([] { (void)paper_allocation_step4(4096, BlockProblem(make_params(1, 1, 2, 1, 3))); }),
            ErrorCode::RegimeMismatch);
  EXPECT_EQ(error_of([] { (void)paper_allocation_step4(2, BlockProblem(step4_params())); }), ErrorCode::InvalidParams);
}

TEST(Step3, GammaSolvesHalfMuRule) {
  const auto p = step3_params();
  const BlockProblem bp(p);
  const auto plan = paper_allocation_step3(4096, bp, 40);
  ASSERT_TRUE(plan.gamma.has_value());
  const double tau = detail::ideal_exponents(p)->tau;
  EXPECT_NEAR(p.d * (1 / tau + 1 / *plan.gamma) - bp.mu(), bp.mu() / 2, 1e-12);
  EXPECT_EQ(plan.M1, 12);
  EXPECT_LE(spent(plan), plan.n_total - 1);
  EXPECT_LE(plan.n_total, 2 * 4096 + 1);
  expect_covers(plan);
  EXPECT_EQ(error_of([] { (void)paper_allocation_step3(4096, BlockProblem(step4_params()), 40); }),
            ErrorCode::RegimeMismatch);
}

TEST(Greedy, UnitBudgetKeepsEveryCellAtOne) {
  const BlockProblem bp(step3_params());
  const auto plan = greedy_allocation(1, bp, 10);
  double expect = 0;
  for (int m = 0; m <= 10; ++m)
    for (int j = 0; j <= m; ++j) {
      EXPECT_EQ(plan.budgets.at({j, m - j}), 1);
      expect += bp.scale(j, m - j) * bp.model().value(bp.cardinality(j, m - j), 1);
    }
  EXPECT_NEAR(evaluate_plan(plan, bp).total(), expect + bp.tail(10), 1e-12);
  EXPECT_EQ(plan.n_total, 1);
}

TEST(Greedy, FullRankLeavesOnlyTheTail) {
  const BlockProblem bp(step3_params());
  const int D = 6;
  std::int64_t n = 1;
  for (int m = 0; m <= D; ++m) n += (m + 1) * static_cast<std::int64_t>(std::exp2(m));
  const auto plan = greedy_allocation(n, bp, D);
  const auto b = evaluate_plan(plan, bp);
  EXPECT_EQ(b.delta1 + b.delta2, 0.0);
  EXPECT_DOUBLE_EQ(b.total(), bp.tail(D));
  EXPECT_EQ(plan.n_total, n);
}

TEST(Greedy, NeverWorseThanPaperPlans) {
  for (const auto& p : {step4_params(), make_params(2, 1, 3, q(1, 3), 5)})
    for (std::int64_t n : {256, 4096}) {
      const BlockProblem bp(p);
      const auto paper = paper_allocation_step4(n, bp);
      const auto greedy = greedy_allocation(paper.n_total, bp, paper.M2);
      EXPECT_LE(evaluate_plan(greedy, bp).total(), evaluate_plan(paper, bp).total() * (1 + 1e-12));
    }
  const BlockProblem bp(step3_params());
  for (std::int64_t n : {256, 4096}) {
    const auto paper = paper_allocation_step3(n, bp, 40);
    const auto greedy = greedy_allocation(paper.n_total, bp, 40);
    EXPECT_LE(evaluate_plan(greedy, bp).total(), evaluate_plan(paper, bp).total() * (1 + 1e-12));
  }
}

TEST(Tail, ClosedFormMatchesDirectSum) {
  for (const auto& p : {step3_params(), step4_params(), make_params(1, 4, 2, 1, q(5, 4)), make_params(2, 1, 3, q(1, 3), 5)}) {
    const BlockProblem bp(p);
    for (int D : {0, 3, 10, 23}) {
      double scale = 0, width = 0;
      for (int m = D + 1; m <= D + 600; ++m)
        for (int j = 0; j <= m; ++j) {
          scale += bp.scale(j, m - j);
          width += bp.cell_width(j, m - j, 1);
        }
      EXPECT_NEAR(bp.scale_tail(D) / scale, 1.0, 1e-9);
      EXPECT_NEAR(bp.tail(D) / width, 1.0, 1e-9);
    }
  }
}

TEST(BlockProblem, Gates) {
  EXPECT_EQ(error_of([] { BlockProblem bp(make_params(1, 2, 2, 1, 1)); }), ErrorCode::LimitingCase);
  EXPECT_EQ(error_of([] { BlockProblem bp(make_params(1, 2, 1, q(1, 4), 3)); }), ErrorCode::NotCompact);
  EXPECT_EQ(error_of([] { BlockProblem bp(make_params(1, 2, 2, 0, 3)); }), ErrorCode::InvalidParams);
}

TEST(Sequences, UpperNonincreasingAndAboveLower) {
  const auto grid = dyadic_grid(4, 14);
  for (const auto& p : {step3_params(), make_params(1, q(3, 2), 2, 1, 3), make_params(1, 4, 2, 1, 3),
                        make_params(1, 3, 32, 1, 9)}) {
    const auto up = upper_bound_sequence(p, grid, Strategy::Greedy);
    const auto lo = lower_bound_sequence(p, grid);
    ASSERT_EQ(up.points.size(), grid.size());
    ASSERT_EQ(lo.points.size(), grid.size());
    for (std::size_t t = 0; t < grid.size(); ++t) {
      EXPECT_EQ(up.points[t].n, grid[t]);
      EXPECT_GT(lo.points[t].value, 0.0);
      EXPECT_LE(lo.points[t].value, up.points[t].value);
      if (t) EXPECT_LE(up.points[t].value, up.points[t - 1].value);
    }
    EXPECT_EQ(up.kind, BoundKind::UpperBound);
    EXPECT_EQ(lo.strategy, "step5");
  }
}

TEST(Sequences, PaperStrategiesReportConsumedBudget) {
  const auto grid = dyadic_grid(6, 12);
  const auto up = upper_bound_sequence(step4_params(), grid, Strategy::PaperStep4);
  for (std::size_t t = 1; t < up.points.size(); ++t) {
    EXPECT_GT(up.points[t].n, up.points[t - 1].n);
    EXPECT_LE(up.points[t].value, up.points[t - 1].value);
  }
  EXPECT_EQ(error_of([&] { (void)upper_bound_sequence(step4_params(), grid, Strategy::PaperStep3); }),
            ErrorCode::RegimeMismatch);
}

TEST(Sequences, ValueAtOneIsTheFullDoubleSum) {
  const auto p = step3_params();
  const BlockProblem bp(p);
  const auto up = upper_bound_sequence(p, {1}, Strategy::Greedy, 30);
  EXPECT_NEAR(up.points[0].value, bp.tail(-1), 1e-12);
}

TEST(LowerBound, SamplesFollowTheRegime) {
  EXPECT_EQ(lower_bound_rule(step3_params()), SampleRule::Quarter);
  EXPECT_EQ(lower_bound_rule(step4_params()), SampleRule::Power);
  EXPECT_EQ(lower_bound_rule(make_params(1, 4, 2, 1, 3)), SampleRule::Quarter);
  const BlockProblem bp(step4_params());
  for (const auto& s : lower_bound_samples(bp, SampleRule::Power, 1 << 12)) {
    const double N = std::exp2(std::max(s.cell.j, s.cell.i));
    EXPECT_EQ(s.m, detail::strict_floor(std::sqrt(N)));
  }
}

TEST(IdealNorm, ConstantSequence) {
  WidthSequence s;
  for (std::int64_t n = 1; n <= 16; ++n) s.points.push_back({n, 0.5});
  EXPECT_DOUBLE_EQ(ideal_norm(s, 2.0), 4.0 * 0.5);
  // n^{1/r} is monotone in 1/r for n >= 1
  EXPECT_GE(ideal_norm(s, 1.0), ideal_norm(s, 2.0));
  EXPECT_THROW((void)ideal_norm(WidthSequence{}, 1.0), Error);
}

TEST(PlanJson, CarriesBreakdown) {
  const BlockProblem bp(step4_params());
  const auto j = to_json(paper_allocation_step4(4096, bp), bp);
  EXPECT_EQ(j.at("M1"), 8);
  EXPECT_EQ(j.at("M2"), 23);
  EXPECT_EQ(j.at("delta1"), 0.0);
  EXPECT_EQ(j.at("strategy"), "paper-step4");
  EXPECT_TRUE(j.at("gamma").is_null());
}

}  // namespace
}  // namespace nwidths
