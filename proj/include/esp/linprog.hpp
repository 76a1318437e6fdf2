#pragma once

#include <limits>
#include <vector>

namespace esp {

// Dense linear program: maximize objective . x subject to
//   eq_lhs  x  = eq_rhs
//   le_lhs  x <= le_rhs
//   0 <= x <= upper_bounds (when given; +inf entries mean unbounded above)
struct LpProblem {
  int num_vars = 0;
  std::vector<double> objective;
  std::vector<std::vector<double>> eq_lhs;
  std::vector<double> eq_rhs;
  std::vector<std::vector<double>> le_lhs;
  std::vector<double> le_rhs;
  std::vector<double> upper_bounds;  // empty, or one entry per variable

  static constexpr double kInfinity = std::numeric_limits<double>::infinity();
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
  long pivots = 0;
};

// Two-phase primal simplex on a dense tableau. Deterministic: identical
// inputs produce identical pivot sequences. Throws std::invalid_argument on
// dimension mismatches.
LpResult solve_lp(const LpProblem& problem);

// Phase-1 only: returns some point satisfying all constraints (status
// Optimal, objective evaluated at that point) or Infeasible. The objective
// vector is not optimized over.
LpResult find_feasible(const LpProblem& problem);

}  // namespace esp
