// Acceptance run: one PASS/FAIL line per criterion, details indented below.
// Exit status is the number of failing criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "nwidths/cli.hpp"
#include "nwidths/nwidths.hpp"

namespace {

using namespace nwidths;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Rational q(long a, long b = 1) { return Rational(a, b); }

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;
  void note(const std::string& s) { notes.push_back(s); }
  void fail(const std::string& s) {
    pass = false;
    notes.push_back("  x " + s);
  }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// ---- 1: exponent table -------------------------------------------------------

struct TableCase {
  WidthKind kind;
  int d;
  ExtReal p1, p2;
  Rational alpha, delta;
  CaseId expect_case;
  Rational expect_kappa;
};

std::vector<TableCase> table_cases() {
  const auto K = WidthKind::Kolmogorov, G = WidthKind::Gelfand;
  const auto inf = ExtReal::infinity();
  return {
      {K, 1, 1, 2, 1, q(3, 2), CaseId::i, 1},
      {K, 2, q(3, 2), 2, q(1, 2), 3, CaseId::i, q(1, 4)},
      {K, 1, 4, 2, 1, q(5, 4), CaseId::ii, q(3, 4)},
      {K, 2, inf, 2, 3, 2, CaseId::ii, q(1, 2)},
      {K, 1, 1, 4, 2, 3, CaseId::iii, q(9, 4)},
      {K, 3, q(3, 2), 6, 1, 2, CaseId::iii, q(2, 3)},
      {K, 2, 1, 4, q(1, 4), 3, CaseId::iv, q(1, 4)},
      {K, 1, q(4, 3), 3, q(1, 5), 2, CaseId::iv, q(3, 10)},
      {K, 1, 3, 4, 1, 3, CaseId::v, q(13, 12)},
      {K, 2, 2, 4, 1, 3, CaseId::v, q(3, 4)},
      {K, 1, 2, 4, q(1, 5), q(5, 4), CaseId::vi, q(2, 5)},
      {K, 1, 3, 6, q(1, 20), 2, CaseId::vi, q(3, 20)},
      {G, 1, 3, 4, 1, 3, CaseId::i, 1},
      {G, 2, 2, inf, 1, 3, CaseId::i, q(1, 2)},
      {G, 1, 4, 2, 1, q(5, 4), CaseId::ii, q(3, 4)},
      {G, 2, inf, 2, 3, 2, CaseId::ii, q(1, 2)},
      {G, 1, q(3, 2), 4, 1, 3, CaseId::iii, q(7, 6)},
      {G, 2, q(4, 3), inf, 2, 3, CaseId::iii, q(5, 4)},
      {G, 1, q(4, 3), 3, q(1, 5), q(7, 12), CaseId::iv, q(2, 5)},
      {G, 2, q(3, 2), 6, q(1, 2), 3, CaseId::iv, q(3, 8)},
      {G, 1, q(3, 2), 2, 1, 3, CaseId::v, q(7, 6)},
      {G, 1, q(4, 3), q(3, 2), 1, 2, CaseId::v, q(13, 12)},
      {G, 1, q(3, 2), 2, q(1, 4), 3, CaseId::vi, q(3, 8)},
      {G, 1, q(4, 3), q(3, 2), q(1, 20), 2, CaseId::vi, q(1, 10)},
  };
}

Outcome criterion1() {
  Outcome o;
  const auto t0 = Clock::now();
  int mismatches = 0;
  for (const auto& c : table_cases()) {
    cli::RunConfig cfg;
    cfg.command = cli::Command::Classify;
    cfg.kind = c.kind;
    cfg.params = make_params(c.d, c.p1, c.p2, c.alpha, c.delta);
    const auto r = cli::run(cfg);
    const std::string kname(kind_name(c.kind));
    const std::string label = kname + " " + detail::params_label(*cfg.params);
    if (r.exit_code != 0) {
      ++mismatches;
      o.fail(label + ": " + r.diagnostic);
      continue;
    }
    const auto j = nlohmann::json::parse(r.output)[kname];
    const std::string got_case = j.at("case"), got_kappa = j.at("kappa");
    if (got_case != case_name(c.expect_case) || got_kappa != to_string(c.expect_kappa)) {
      ++mismatches;
      o.fail(label + ": got (" + got_case + ", " + got_kappa + "), expected (" + std::string(case_name(c.expect_case)) +
             ", " + to_string(c.expect_kappa) + ")");
    }
  }
  const double secs = seconds_since(t0);
  o.note("24 sets (12 kolmogorov, 12 gelfand), " + std::to_string(mismatches) + " mismatches, " + fmt("%.3f s", secs));
  if (secs >= 1.0) o.fail("runtime >= 1 s");
  return o;
}

// ---- 2: oracle vs closed form ------------------------------------------------

Outcome criterion2() {
  Outcome o;
  const auto t0 = Clock::now();
  const std::vector<ExtReal> grid{ExtReal(1), q(4, 3), q(3, 2), ExtReal(2), ExtReal(3), ExtReal(4), ExtReal::infinity()};
  double worst = 0;
  int checked = 0;
  for (const auto& p1 : grid)
    for (const auto& p2 : grid) {
      if (!(p2 < p1)) continue;
      const double e = to_double(p2.reciprocal() - p1.reciprocal());
      for (std::uint64_t N = 1; N <= kOracleMaxN; ++N)
        for (std::uint64_t n = 1; n <= N; ++n) {
          const double expect = std::pow(static_cast<double>(N - n + 1), e);
          const double got = coordinate_oracle(p1, p2, N, n);
          const double rel = std::abs(got - expect) / expect;
          worst = std::max(worst, rel);
          ++checked;
          if (rel > 1e-12)
            o.fail("p1=" + to_string(p1) + " p2=" + to_string(p2) + " N=" + std::to_string(N) + " n=" + std::to_string(n));
        }
    }
  const double secs = seconds_since(t0);
  o.note(std::to_string(checked) + " (p1,p2,N,n) points, worst relative error " + fmt("%.2e", worst) + ", " +
         fmt("%.2f s", secs));
  if (secs >= 30.0) o.fail("runtime >= 30 s");
  return o;
}

// ---- 3, 4: slopes and ideal norms ----------------------------------------------

struct SlopeSet {
  int d;
  ExtReal p1, p2;
  Rational alpha, delta;
};

std::vector<SlopeSet> slope_sets() {
  return {
      {1, q(3, 2), 2, 1, 3},        // i
      {1, 4, 2, 1, 3},              // ii
      {1, 1, 32, 1, 9},             // iii
      {6, 1, 3, q(3, 5), 9},        // iv
      {1, 3, 32, 1, 9},             // v
      {12, 3, 4, q(3, 5), 9},       // vi
  };
}

// d = 1, p2 = 4, theta = 1: tau/h = 2 and mu = 1/8 < d/tau.
EmbeddingParams step4_set() { return make_params(1, 1, 4, q(1, 8), 9); }

void slope_criteria(Outcome& c3, Outcome& c4) {
  const auto t0 = Clock::now();
  const auto grid = dyadic_grid(8, 18);
  std::vector<bool> seen(7, false);  // indexed by case number
  for (const auto& s : slope_sets()) {
    const auto p = make_params(s.d, s.p1, s.p2, s.alpha, s.delta);
    const auto dec = kolmogorov_exponent(p);
    seen[static_cast<int>(dec.case_id)] = true;
    const double kappa = to_double(dec.kappa);
    const auto t1 = Clock::now();
    const auto up = upper_bound_sequence(p, grid, Strategy::Greedy);
    const auto lo = lower_bound_sequence(p, grid);
    const auto ru = fit_slope(up), rl = fit_slope(lo);
    bool le = true;
    for (std::size_t t = 0; t < grid.size(); ++t) le = le && lo.points[t].value <= up.points[t].value;
    const bool ok_u = std::abs(ru.fitted_slope + kappa) <= kSlopeTolerance;
    const bool ok_l = std::abs(rl.fitted_slope + kappa) <= kSlopeTolerance;
    const std::string label = "case " + std::string(case_name(dec.case_id)) + " " + detail::params_label(p);
    c3.note(label + ": -kappa=" + fmt("%.4f", -kappa) + " upper " + fmt("%.4f", ru.fitted_slope) + " lower " +
            fmt("%.4f", rl.fitted_slope) + (le ? " lower<=upper" : " lower>upper") + fmt(" (%.2f s)", seconds_since(t1)));
    if (!ok_u) c3.fail(label + ": upper slope outside tolerance");
    if (!ok_l) c3.fail(label + ": lower slope outside tolerance");
    if (!le) c3.fail(label + ": lower exceeds upper");

    const double spread = ideal_norm_spread(up, kappa);
    c4.note(label + ": spread " + fmt("%.3f", spread));
    if (!(spread <= 10.0)) c4.fail(label + ": spread above 10");
  }
  for (int k = 1; k <= 6; ++k)
    if (!seen[k]) c3.fail("no slope set for case " + std::string(case_name(static_cast<CaseId>(k))));
  const double secs = seconds_since(t0);
  c3.note(fmt("total %.1f s", secs));
  if (secs >= 300.0) c3.fail("runtime >= 5 min");
}

// ---- 5: table scan -------------------------------------------------------------

Outcome criterion5() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto rep = table_scan();
  o.note(std::to_string(rep.cells_tested) + " cells, " + std::to_string(rep.violations.size()) + " violations");
  std::string declared;
  for (const auto& [name, n] : rep.declared_errors) declared += " " + name + "=" + std::to_string(n);
  o.note("declared errors:" + declared);
  if (rep.cells_tested < 10000) o.fail("fewer than 10^4 cells");
  for (std::size_t t = 0; t < rep.violations.size() && t < 10; ++t)
    o.fail(rep.violations[t].cell + ": " + rep.violations[t].check);
  const auto mutant = table_scan(TableGrid::standard(), conjugate_slip_mutant());
  o.note("conjugate-slip mutant: " + std::to_string(mutant.violations.size()) + " violations");
  if (mutant.ok()) o.fail("mutant not flagged");
  const double secs = seconds_since(t0);
  o.note(fmt("%.1f s", secs));
  if (secs >= 120.0) o.fail("runtime >= 2 min");
  return o;
}

// ---- 6: Step-4 plan --------------------------------------------------------------

Outcome criterion6() {
  Outcome o;
  const auto p = step4_set();
  const BlockProblem bp(p);
  const auto plan = paper_allocation_step4(4096, bp);
  const auto b = evaluate_plan(plan, bp);
  std::int64_t spent = 0;
  for (const auto& [cell, n] : plan.budgets) spent += n - 1;
  o.note(detail::params_label(p) + ": M1=" + std::to_string(plan.M1) + " M2=" + std::to_string(plan.M2) +
         " delta1=" + fmt("%g", b.delta1) + " epsilon=" + fmt("%.4f", plan.epsilon) + " spent=" + std::to_string(spent) +
         " n'=" + std::to_string(plan.n_total) + fmt(" (n'/n = %.1f)", static_cast<double>(plan.n_total) / 4096.0));
  if (plan.M1 != 8) o.fail("M1 != 8");
  if (plan.M2 != 23) o.fail("M2 != 23");
  if (b.delta1 != 0.0) o.fail("delta1 != 0");
  if (!(plan.epsilon > 0 && plan.epsilon < 1)) o.fail("epsilon outside (0,1)");
  if (spent > plan.n_total - 1) o.fail("budget not conserved");

  std::vector<EmbeddingParams> sets{p};
  for (const auto& s : slope_sets()) sets.push_back(make_params(s.d, s.p1, s.p2, s.alpha, s.delta));
  for (const auto& q : sets) {
    const BlockProblem sp(q);
    double worst = 0;
    int worst_m = 0;
    for (int M2 = 0; M2 <= 40; ++M2) {
      const double ratio = sp.scale_tail(M2) / std::exp2(-M2 * sp.mu());
      if (ratio > worst) {
        worst = ratio;
        worst_m = M2;
      }
    }
    const std::string label = detail::params_label(q);
    o.note(label + ": max over M2<=40 of tail/2^{-M2 mu} = " + fmt("%.3f", worst) + " at M2=" + std::to_string(worst_m));
    if (worst > 2.0) o.fail(label + ": tail exceeds 2 * 2^{-M2 mu}");
  }
  return o;
}

void report(int id, const char* title, const Outcome& o, int& failures) {
  std::printf("[%s] criterion %d: %s\n", o.pass ? "PASS" : "FAIL", id, title);
  for (const auto& n : o.notes) std::printf("    %s\n", n.c_str());
  if (!o.pass) ++failures;
  std::fflush(stdout);
}

}  // namespace

int main() {
  int failures = 0;
  report(1, "exponent table fidelity", criterion1(), failures);
  report(2, "exact-formula oracle equivalence", criterion2(), failures);
  Outcome c3, c4;
  slope_criteria(c3, c4);
  report(3, "slope reproduction", c3, failures);
  report(4, "ideal-norm boundedness", c4, failures);
  report(5, "table scan", criterion5(), failures);
  report(6, "step-4 plan fidelity", criterion6(), failures);
  std::printf("%d of 6 criteria failed\n", failures);
  return failures;
}
