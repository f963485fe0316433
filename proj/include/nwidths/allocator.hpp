#pragma once

// Upper and lower bounds for the Kolmogorov numbers of
//   id : l_{q1}(2^{j delta} l_{p1}(alpha)) -> l_{q2}(l_{p2}).
//
// The identity splits into blocks P_{j,i} (see seqmodel.hpp) with
//   d_n(P_{j,i}) <= 2^{-j delta - i alpha} d_n(id, l_{p1}^M, l_{p2}^M),  M = 2^{d(j+i)},
// and subadditivity turns a budget assignment n_{j,i} into
//   d_{n'}(id) <= sum_{j,i} 2^{-j delta - i alpha} d_{n_{j,i}}(id_M),
//   n' - 1 = sum (n_{j,i} - 1).
// Three assignments are provided: the explicit Step-4 division for
// mu < d/tau, a Step-3 P/Q division weighted by ideal quasi-norms for
// mu > d/tau, and a greedy water-filling over the same objective.
// Lower bounds come from factoring a single finite block through id.
//
// All order constants are 1 and block sizes are the surrogates 2^{d(j+i)}.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <vector>

#include "nwidths/error.hpp"
#include "nwidths/exponents.hpp"
#include "nwidths/finwidths.hpp"
#include "nwidths/params.hpp"
#include "nwidths/seqmodel.hpp"

namespace nwidths {

enum class Strategy { PaperStep4, PaperStep3, Greedy };

inline std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::PaperStep4: return "paper-step4";
    case Strategy::PaperStep3: return "paper-step3";
    case Strategy::Greedy: return "greedy";
  }
  return "?";
}

struct CellKey {
  int j = 0;
  int i = 0;
  friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

struct AllocationPlan {
  std::int64_t n_requested = 1;
  /// n' with n' - 1 = sum over budgets of (n_{j,i} - 1).
  std::int64_t n_total = 1;
  int M1 = -1;  // last fully resolved diagonal (Step 4); P/Q split diagonal (Step 3)
  int M2 = 0;   // last diagonal carrying an explicit budget
  double epsilon = 0.0;
  double z1 = 0.0;
  double z2 = 0.0;
  std::optional<double> gamma;  // Step 3 only
  std::map<CellKey, std::int64_t> budgets;
  Strategy strategy = Strategy::Greedy;
};

struct BoundBreakdown {
  double delta1 = 0.0;  // diagonals 0..M1
  double delta2 = 0.0;  // diagonals M1+1..M2
  double delta3 = 0.0;  // diagonals beyond M2, every n_{j,i} = 1
  double total() const { return delta1 + delta2 + delta3; }
};

enum class BoundKind { UpperBound, LowerBound };

struct WidthPoint {
  std::int64_t n = 1;
  double value = 0.0;
};

struct WidthSequence {
  std::vector<WidthPoint> points;
  BoundKind kind = BoundKind::UpperBound;
  std::string strategy;  // strategy name, or "step5" for lower bounds
};

/// Parameters of the L_{r,inf} quasi-norm and its rho-triangle inequality.
/// The numeric pipeline sums block bounds directly and never needs rho.
struct IdealNormParams {
  double r = 1.0;
  double rho = 1.0;
};

/// Doubles derived once from EmbeddingParams for the hot loops.
class BlockProblem {
 public:
  explicit BlockProblem(const EmbeddingParams& p)
      : params_(p), model_(WidthKind::Kolmogorov, p.p1, p.p2) {
    require_valid(p);
    d_ = p.d;
    delta_ = to_double(delta_of(p));
    alpha_ = to_double(p.alpha);
    mu_ = std::min(delta_, alpha_);
    gap_ = std::max(to_double(p.p2.reciprocal() - p.p1.reciprocal()), 0.0);
    if (!(delta_ > 0)) throw Error(ErrorCode::NotCompact, "delta must be positive");
    if (!(mu_ > d_ * gap_)) throw Error(ErrorCode::NotCompact, "block norms are not summable");
    if (delta_of(p) == p.alpha) throw Error(ErrorCode::LimitingCase, "delta == alpha excluded by hypothesis (b)");
  }

  const EmbeddingParams& params() const { return params_; }
  const FiniteWidthModel& model() const { return model_; }
  int d() const { return d_; }
  double delta() const { return delta_; }
  double alpha() const { return alpha_; }
  double mu() const { return mu_; }

  double scale(int j, int i) const { return block_scale(j, i, delta_, alpha_); }
  double cardinality(int j, int i) const { return std::exp2(static_cast<double>(d_) * (j + i)); }

  /// 2^{-j delta - i alpha} d_n(id_M), the bound on d_n(P_{j,i}).
  double cell_width(int j, int i, double n) const { return scale(j, i) * model_.value(cardinality(j, i), n); }

  /// sum_{j+i > D} 2^{-j delta - i alpha} d_1(id_M), in closed form.
  double tail(int D) const { return tail_sum(D, d_ * gap_); }

  /// sum_{j+i > D} 2^{-j delta - i alpha}, the block-norm tail for p1 <= p2.
  double scale_tail(int D) const { return tail_sum(D, 0.0); }

  /// Decay rate per diagonal of the d_1 tail.
  double tail_rate() const { return mu_ - d_ * gap_; }

 private:
  // sum_{m > D} 2^{m g} sum_{j=0}^m 2^{-j delta - (m-j) alpha}
  double tail_sum(int D, double g) const {
    const double a = std::exp2(-alpha_), b = std::exp2(-delta_);
    const double A = std::exp2(g - alpha_), B = std::exp2(g - delta_);
    const double n = D + 1;
    return (a * std::pow(A, n) / (1 - A) - b * std::pow(B, n) / (1 - B)) / (a - b);
  }

  EmbeddingParams params_;
  FiniteWidthModel model_;
  int d_ = 1;
  double delta_ = 1, alpha_ = 1, mu_ = 1, gap_ = 0;
};

namespace detail {

/// Largest integer strictly smaller than a.
inline long strict_floor(double a) { return static_cast<long>(std::ceil(a)) - 1; }

struct IdealExponents {
  double tau;  // p2/theta
  double h;    // 2/theta
};

// tau and h exist when the finite widths decay like (N^{1/p2} n^{-1/2})^theta,
// i.e. p1 < p2 < inf with p2 > 2; theta = 1 when p1 < 2.
inline std::optional<IdealExponents> ideal_exponents(const EmbeddingParams& p) {
  if (!(p.p1 < p.p2) || p.p2.is_inf() || p.p2 <= ExtReal(2)) return std::nullopt;
  double theta = 1.0;
  if (ExtReal(2) <= p.p1) theta = to_double(*derive(p).theta);
  const double p2 = p.p2.to_double();
  return IdealExponents{p2 / theta, 2.0 / theta};
}

inline IdealExponents require_ideal_exponents(const EmbeddingParams& p) {
  auto e = ideal_exponents(p);
  if (!e) throw Error(ErrorCode::RegimeMismatch, "the P/Q and Step-4 divisions need p1 < p2 < inf with p2 > 2");
  return *e;
}

inline void finish_plan(AllocationPlan& plan) {
  std::int64_t spent = 0;
  for (const auto& [cell, n] : plan.budgets) spent += n - 1;
  plan.n_total = spent + 1;
}

inline std::int64_t full_rank(const BlockProblem& bp, int j, int i) {
  return static_cast<std::int64_t>(bp.cardinality(j, i)) + 1;
}

}  // namespace detail

/// Diagonal cut-off D so the d_1 tail beyond D is far below n_max^{-kappa}.
inline int default_max_diagonal(const BlockProblem& bp, std::int64_t n_max) {
  double kappa = bp.mu() / bp.d();
  try {
    kappa = to_double(kolmogorov_exponent(bp.params()).kappa);
  } catch (const Error&) {
  }
  const double need = kappa * std::log2(static_cast<double>(std::max<std::int64_t>(n_max, 2))) + 24.0;
  const int D = static_cast<int>(std::ceil(need / bp.tail_rate()));
  return std::clamp(D, 4, 600);
}

/// Step 4: full rank on diagonals <= M1, n_{j,i} = [n^{1-eps} 2^{i z1} 2^{j z2}] up to M2.
inline AllocationPlan paper_allocation_step4(std::int64_t n, const BlockProblem& bp) {
  const auto& p = bp.params();
  const auto ie = detail::require_ideal_exponents(p);
  const double d = bp.d(), alpha = bp.alpha(), delta = bp.delta(), mu = bp.mu();
  if (!(mu < d / ie.tau))
    throw Error(ErrorCode::RegimeMismatch, "Step-4 division needs mu < d/tau (mu = " + std::to_string(mu) +
                                               ", d/tau = " + std::to_string(d / ie.tau) + ")");
  if (n < 4) throw Error(ErrorCode::InvalidParams, "Step-4 division needs n >= 4");

  AllocationPlan plan;
  plan.strategy = Strategy::PaperStep4;
  plan.n_requested = n;
  const double lg = std::log2(static_cast<double>(n));
  plan.M1 = static_cast<int>(std::max(0L, detail::strict_floor(lg / d - std::log2(lg) / d)));
  plan.M2 = static_cast<int>(detail::strict_floor(ie.tau / ie.h * lg / d));
  if (plan.M2 <= plan.M1) throw Error(ErrorCode::InfeasibleConstraints, "Step-4 division needs M1 < M2");

  // Representative of the constraint region: z1 at the midpoint of its range,
  // z2 pulled below it by min(gap/2, z1/(2h)) so that 0 < (z1-z2)/h < gap.
  const double h = ie.h, tau = ie.tau;
  double lead, trail;
  if (delta > alpha) {
    lead = h / 2 * (d / tau - alpha);
    trail = lead - h * std::min((delta - alpha) / 2, lead / (2 * h));
    plan.z1 = lead;
    plan.z2 = trail;
  } else {
    lead = h / 2 * (d / tau - delta);
    trail = lead - h * std::min((alpha - delta) / 2, lead / (2 * h));
    plan.z2 = lead;
    plan.z1 = trail;
  }
  plan.epsilon = lead * tau / (h * d);
  const bool ok = delta > alpha ? (alpha + plan.z1 / h < d / tau && 0 < (plan.z1 - plan.z2) / h &&
                                   (plan.z1 - plan.z2) / h < delta - alpha && plan.z2 > 0)
                                : (delta + plan.z2 / h < d / tau && 0 < (plan.z2 - plan.z1) / h &&
                                   (plan.z2 - plan.z1) / h < alpha - delta && plan.z1 > 0);
  if (!ok || !(plan.epsilon > 0 && plan.epsilon < 1))
    throw Error(ErrorCode::InfeasibleConstraints, "no (epsilon, z1, z2) in the Step-4 constraint region");

  const double base = std::pow(static_cast<double>(n), 1 - plan.epsilon);
  for (int m = 0; m <= plan.M2; ++m)
    for (int j = 0; j <= m; ++j) {
      const int i = m - j;
      std::int64_t b;
      if (m <= plan.M1) {
        b = detail::full_rank(bp, j, i);
      } else {
        const double raw = base * std::exp2(i * plan.z1 + j * plan.z2);
        b = std::max<std::int64_t>(1, detail::strict_floor(raw));
        b = std::min(b, detail::full_rank(bp, j, i));
      }
      plan.budgets[{j, i}] = b;
    }
  detail::finish_plan(plan);
  return plan;
}

/// Step 3: P = diagonals <= M, Q = diagonals M+1..D, each receiving about n
/// units split in proportion to lambda^{r/(1+r)}, where lambda bounds the
/// block's L_{r,inf} quasi-norm (r = s for P with 1/s = 1/gamma + 1/h, r = h for Q).
/// gamma makes d(1/tau + 1/gamma) - mu = mu/2.
inline AllocationPlan paper_allocation_step3(std::int64_t n, const BlockProblem& bp, int max_diagonal) {
  const auto ie = detail::require_ideal_exponents(bp.params());
  const double d = bp.d(), mu = bp.mu();
  if (!(mu > d / ie.tau)) throw Error(ErrorCode::RegimeMismatch, "Step-3 division needs mu > d/tau");
  if (n < 2) throw Error(ErrorCode::InvalidParams, "Step-3 division needs n >= 2");

  AllocationPlan plan;
  plan.strategy = Strategy::PaperStep3;
  plan.n_requested = n;
  plan.M1 = static_cast<int>(std::floor(std::log2(static_cast<double>(n)) / d + 1e-12));
  plan.M2 = std::max(max_diagonal, plan.M1 + 1);
  const double inv_gamma = 1.5 * mu / d - 1.0 / ie.tau;
  plan.gamma = 1.0 / inv_gamma;
  const double inv_s = inv_gamma + 1.0 / ie.h;

  auto split = [&](int m_lo, int m_hi, double inv_r, double ideal_exp) {
    const double rho = 1.0 / (1.0 + inv_r);  // r/(1+r)
    std::vector<std::pair<CellKey, double>> w;
    double total = 0.0;
    for (int m = m_lo; m <= m_hi; ++m)
      for (int j = 0; j <= m; ++j) {
        const double lam = bp.scale(j, m - j) * std::exp2(m * d * ideal_exp);
        const double v = std::pow(lam, rho);
        w.push_back({{j, m - j}, v});
        total += v;
      }
    for (const auto& [cell, v] : w) {
      const auto units = static_cast<std::int64_t>(std::floor(static_cast<double>(n) * v / total));
      plan.budgets[cell] = std::min<std::int64_t>(units + 1, detail::full_rank(bp, cell.j, cell.i));
    }
  };
  split(0, plan.M1, inv_s, 1.0 / ie.tau + inv_gamma);
  split(plan.M1 + 1, plan.M2, 1.0 / ie.h, 1.0 / ie.tau);
  detail::finish_plan(plan);
  return plan;
}

namespace detail {

struct GreedyMove {
  double rate = 0.0;  // decrease of the bound per budget unit
  std::int64_t step = 0;
};

inline GreedyMove best_move(const BlockProblem& bp, int j, int i, std::int64_t have, std::int64_t remaining) {
  const double M = bp.cardinality(j, i);
  const double w0 = bp.cell_width(j, i, static_cast<double>(have));
  GreedyMove best;
  if (w0 <= 0.0 || remaining <= 0) return best;
  auto consider = [&](std::int64_t step) {
    if (step <= 0 || step > remaining) return;
    const double gain = w0 - bp.cell_width(j, i, static_cast<double>(have + step));
    const double rate = gain / static_cast<double>(step);
    if (rate > best.rate) best = {rate, step};
  };
  for (std::int64_t s = 1; s <= remaining; s *= 2) consider(s);
  if (M + 1.0 - have <= static_cast<double>(remaining)) consider(static_cast<std::int64_t>(M) + 1 - have);
  return best;
}

}  // namespace detail

/// Water-filling: repeatedly grant budget to the cell whose bound drops most
/// per unit, looking ahead over steps 1, 2, 4, ... and the jump to full rank
/// so that cells on a flat stretch of their width curve are not stranded.
/// Ties go to the smaller j+i, then the smaller j.
inline AllocationPlan greedy_allocation(std::int64_t n, const BlockProblem& bp, int max_diagonal) {
  if (n < 1) throw Error(ErrorCode::InvalidParams, "greedy allocation needs n >= 1");
  AllocationPlan plan;
  plan.strategy = Strategy::Greedy;
  plan.n_requested = n;
  plan.M1 = -1;
  plan.M2 = max_diagonal;

  struct Entry {
    double rate;
    int m, j;
    std::int64_t step;
    std::uint64_t version;
  };
  auto worse = [](const Entry& a, const Entry& b) {
    if (a.rate != b.rate) return a.rate < b.rate;
    if (a.m != b.m) return a.m > b.m;
    return a.j > b.j;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> heap(worse);

  const int D = max_diagonal;
  std::vector<std::vector<std::int64_t>> have(D + 1);
  std::vector<std::vector<std::uint64_t>> version(D + 1);
  std::int64_t remaining = n - 1;
  for (int m = 0; m <= D; ++m) {
    have[m].assign(m + 1, 1);
    version[m].assign(m + 1, 0);
    for (int j = 0; j <= m; ++j) {
      const auto mv = detail::best_move(bp, j, m - j, 1, remaining);
      if (mv.step > 0) heap.push({mv.rate, m, j, mv.step, 0});
    }
  }
  while (remaining > 0 && !heap.empty()) {
    const Entry e = heap.top();
    heap.pop();
    if (e.version != version[e.m][e.j]) continue;
    if (e.step > remaining) {
      const auto mv = detail::best_move(bp, e.j, e.m - e.j, have[e.m][e.j], remaining);
      if (mv.step > 0) heap.push({mv.rate, e.m, e.j, mv.step, ++version[e.m][e.j]});
      continue;
    }
    have[e.m][e.j] += e.step;
    remaining -= e.step;
    const auto mv = detail::best_move(bp, e.j, e.m - e.j, have[e.m][e.j], remaining);
    ++version[e.m][e.j];
    if (mv.step > 0) heap.push({mv.rate, e.m, e.j, mv.step, version[e.m][e.j]});
  }
  for (int m = 0; m <= D; ++m)
    for (int j = 0; j <= m; ++j) plan.budgets[{j, m - j}] = have[m][j];
  detail::finish_plan(plan);
  return plan;
}

/// Delta_1 + Delta_2 + Delta_3 for a plan; cells without a budget count with n_{j,i} = 1.
inline BoundBreakdown evaluate_plan(const AllocationPlan& plan, const BlockProblem& bp) {
  BoundBreakdown b;
  for (int m = 0; m <= plan.M2; ++m)
    for (int j = 0; j <= m; ++j) {
      const auto it = plan.budgets.find({j, m - j});
      const double n = it == plan.budgets.end() ? 1.0 : static_cast<double>(it->second);
      const double w = bp.cell_width(j, m - j, n);
      (m <= plan.M1 ? b.delta1 : b.delta2) += w;
    }
  b.delta3 = bp.tail(plan.M2);
  return b;
}

inline AllocationPlan make_plan(Strategy s, std::int64_t n, const BlockProblem& bp, int max_diagonal) {
  switch (s) {
    case Strategy::PaperStep4: return paper_allocation_step4(n, bp);
    case Strategy::PaperStep3: return paper_allocation_step3(n, bp, max_diagonal);
    case Strategy::Greedy: return greedy_allocation(n, bp, max_diagonal);
  }
  throw Error(ErrorCode::InvalidParams, "unknown strategy");
}

namespace detail {

// Points (n', bound) sorted by n'; an upper bound at n' also holds for every
// larger index, so values are replaced by their running minimum.
inline WidthSequence finish_upper(std::vector<WidthPoint> pts, std::string_view strategy) {
  std::sort(pts.begin(), pts.end(), [](const WidthPoint& a, const WidthPoint& b) { return a.n < b.n; });
  WidthSequence seq;
  seq.kind = BoundKind::UpperBound;
  seq.strategy = std::string(strategy);
  for (const auto& pt : pts) {
    WidthPoint q = pt;
    if (!seq.points.empty()) q.value = std::min(q.value, seq.points.back().value);
    if (!seq.points.empty() && seq.points.back().n == q.n) {
      seq.points.back().value = q.value;
      continue;
    }
    seq.points.push_back(q);
  }
  return seq;
}

}  // namespace detail

/// Upper bounds at each n of the grid. Paper strategies report the budget n'
/// their plan actually consumes; greedy reports n itself.
inline WidthSequence upper_bound_sequence(const EmbeddingParams& params, const std::vector<std::int64_t>& n_grid,
                                          Strategy strategy, std::optional<int> max_diagonal = std::nullopt) {
  (void)kolmogorov_exponent(params);
  const BlockProblem bp(params);
  std::int64_t n_max = 1;
  for (auto n : n_grid) n_max = std::max(n_max, n);
  const int D = max_diagonal.value_or(default_max_diagonal(bp, n_max));
  std::vector<WidthPoint> pts;
  for (auto n : n_grid) {
    const auto plan = make_plan(strategy, n, bp, D);
    pts.push_back({strategy == Strategy::Greedy ? n : plan.n_total, evaluate_plan(plan, bp).total()});
  }
  return detail::finish_upper(std::move(pts), strategy_name(strategy));
}

/// Sample size used by the single-block lower bound on a block of size N.
enum class SampleRule { Quarter, Power };

inline SampleRule lower_bound_rule(const EmbeddingParams& params) {
  const auto ie = detail::ideal_exponents(params);
  if (!ie) return SampleRule::Quarter;
  const double mu = to_double(min(params.alpha, delta_of(params)));
  return mu > params.d / ie->tau ? SampleRule::Quarter : SampleRule::Power;
}

/// One (block, sample size, value) candidate of the lower bound.
struct LowerBoundSample {
  CellKey cell;
  std::int64_t m = 1;
  double value = 0.0;
};

inline std::vector<LowerBoundSample> lower_bound_samples(const BlockProblem& bp, SampleRule rule, std::int64_t n_max) {
  std::vector<LowerBoundSample> out;
  const double p2 = bp.params().p2.to_double();
  // Blocks grow until some sample size reaches 4 n_max.
  for (int b = 0;; ++b) {
    const double N = std::exp2(static_cast<double>(bp.d()) * b);
    double m = 0.0;
    if (rule == SampleRule::Quarter) m = N / 4;
    else m = static_cast<double>(detail::strict_floor(std::pow(N, 2.0 / p2)));
    if (m > 9.0e15) break;
    if (m < 1.0) continue;
    const auto mi = static_cast<std::int64_t>(m);
    for (const CellKey cell : {CellKey{b, 0}, CellKey{0, b}}) {
      out.push_back({cell, mi, bp.cell_width(cell.j, cell.i, static_cast<double>(mi))});
      if (b == 0) break;
    }
    if (m >= 4.0 * static_cast<double>(n_max)) break;
  }
  return out;
}

/// d_n(id) >= 2^{-j delta - i alpha} d_m(id_N) for every block and every m >= n,
/// maximized over blocks (j,0) and (0,i) at their sample sizes.
inline WidthSequence lower_bound_sequence(const EmbeddingParams& params, const std::vector<std::int64_t>& n_grid) {
  (void)kolmogorov_exponent(params);
  const BlockProblem bp(params);
  std::int64_t n_max = 1;
  for (auto n : n_grid) n_max = std::max(n_max, n);
  const auto samples = lower_bound_samples(bp, lower_bound_rule(params), n_max);
  WidthSequence seq;
  seq.kind = BoundKind::LowerBound;
  seq.strategy = "step5";
  std::vector<std::int64_t> grid = n_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  for (auto n : grid) {
    double v = 0.0;
    for (const auto& s : samples)
      if (s.m >= n) v = std::max(v, s.value);
    seq.points.push_back({n, v});
  }
  return seq;
}

/// sup_n n^{1/r} s_n over the points of the sequence.
inline double ideal_norm(const WidthSequence& seq, double r) {
  if (seq.points.empty()) throw Error(ErrorCode::InsufficientPoints, "ideal norm of an empty sequence");
  double best = 0.0;
  for (const auto& pt : seq.points) best = std::max(best, std::pow(static_cast<double>(pt.n), 1.0 / r) * pt.value);
  return best;
}

inline std::vector<std::int64_t> dyadic_grid(int log_min, int log_max) {
  std::vector<std::int64_t> g;
  for (int k = log_min; k <= log_max; ++k) g.push_back(std::int64_t{1} << k);
  return g;
}

inline nlohmann::json to_json(const AllocationPlan& plan, const BlockProblem& bp) {
  const auto b = evaluate_plan(plan, bp);
  nlohmann::json budgets = nlohmann::json::array();
  for (const auto& [cell, n] : plan.budgets) budgets.push_back({{"j", cell.j}, {"i", cell.i}, {"n", n}});
  nlohmann::json j{{"strategy", std::string(strategy_name(plan.strategy))},
                   {"n_requested", plan.n_requested},
                   {"n_total", plan.n_total},
                   {"M1", plan.M1},
                   {"M2", plan.M2},
                   {"epsilon", plan.epsilon},
                   {"z1", plan.z1},
                   {"z2", plan.z2},
                   {"delta1", b.delta1},
                   {"delta2", b.delta2},
                   {"delta3", b.delta3},
                   {"bound", b.total()},
                   {"budgets", budgets}};
  j["gamma"] = plan.gamma ? nlohmann::json(*plan.gamma) : nlohmann::json(nullptr);
  return j;
}

}  // namespace nwidths
