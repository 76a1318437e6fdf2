#include "esp/linprog.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace esp {
namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kOptTol = 1e-7;
constexpr int kStallLimit = 100;

void check_shape(const LpProblem& p) {
  if (p.num_vars < 0) throw std::invalid_argument("lp: negative variable count");
  if (static_cast<int>(p.objective.size()) != p.num_vars)
    throw std::invalid_argument("lp: objective length does not match variable count");
  if (p.eq_lhs.size() != p.eq_rhs.size())
    throw std::invalid_argument("lp: equality lhs/rhs row counts differ");
  if (p.le_lhs.size() != p.le_rhs.size())
    throw std::invalid_argument("lp: inequality lhs/rhs row counts differ");
  for (const auto& row : p.eq_lhs)
    if (static_cast<int>(row.size()) != p.num_vars)
      throw std::invalid_argument("lp: equality row width does not match variable count");
  for (const auto& row : p.le_lhs)
    if (static_cast<int>(row.size()) != p.num_vars)
      throw std::invalid_argument("lp: inequality row width does not match variable count");
  if (!p.upper_bounds.empty() && static_cast<int>(p.upper_bounds.size()) != p.num_vars)
    throw std::invalid_argument("lp: upper bound vector length does not match variable count");
  auto check_finite = [](const std::vector<double>& v, const char* what) {
    for (double x : v)
      if (!std::isfinite(x)) throw std::invalid_argument(std::string("lp: non-finite ") + what);
  };
  check_finite(p.objective, "objective entry");
  check_finite(p.eq_rhs, "equality rhs");
  check_finite(p.le_rhs, "inequality rhs");
  for (const auto& row : p.eq_lhs) check_finite(row, "equality coefficient");
  for (const auto& row : p.le_lhs) check_finite(row, "inequality coefficient");
}

// Dense tableau for the two-phase primal simplex. The z-row carries phase-2
// reduced costs (maximization: optimal when all entries >= -tol), the w-row
// carries phase-1 reduced costs while artificials remain.
struct Tableau {
  int rows = 0;
  int cols = 0;  // variable columns, rhs kept separately
  std::vector<std::vector<double>> a;
  std::vector<double> rhs;
  std::vector<double> zrow;
  double zval = 0.0;
  std::vector<double> wrow;
  double wval = 0.0;
  std::vector<int> basis;      // basic column per row
  std::vector<char> allowed;   // column may enter the basis
  long pivots = 0;

  void pivot(int pr, int pc) {
    const double inv = 1.0 / a[pr][pc];
    for (int j = 0; j < cols; ++j) a[pr][j] *= inv;
    rhs[pr] *= inv;
    a[pr][pc] = 1.0;  // kill roundoff on the pivot element
    for (int i = 0; i < rows; ++i) {
      if (i == pr) continue;
      const double f = a[i][pc];
      if (f == 0.0) continue;
      for (int j = 0; j < cols; ++j) a[i][j] -= f * a[pr][j];
      a[i][pc] = 0.0;
      rhs[i] -= f * rhs[pr];
    }
    const double fz = zrow[pc];
    if (fz != 0.0) {
      for (int j = 0; j < cols; ++j) zrow[j] -= fz * a[pr][j];
      zrow[pc] = 0.0;
      zval -= fz * rhs[pr];
    }
    const double fw = wrow[pc];
    if (fw != 0.0) {
      for (int j = 0; j < cols; ++j) wrow[j] -= fw * a[pr][j];
      wrow[pc] = 0.0;
      wval -= fw * rhs[pr];
    }
    basis[pr] = pc;
    ++pivots;
  }

  // Entering column under Dantzig (most negative reduced cost, lowest index
  // on ties) or Bland (lowest index with negative reduced cost). -1 = optimal.
  int entering(const std::vector<double>& cost, bool bland) const {
    int best = -1;
    double best_val = -kOptTol;
    for (int j = 0; j < cols; ++j) {
      if (!allowed[j]) continue;
      if (cost[j] < best_val) {
        if (bland) return j;
        best_val = cost[j];
        best = j;
      }
    }
    return best;
  }

  // Min-ratio row for column pc; ties broken by the smallest basic variable
  // index (Bland-compatible). -1 = no positive pivot coefficient.
  int leaving(int pc) const {
    int best = -1;
    double best_ratio = 0.0;
    for (int i = 0; i < rows; ++i) {
      const double coef = a[i][pc];
      if (coef <= kPivotTol) continue;
      const double ratio = rhs[i] / coef;
      if (best < 0 || ratio < best_ratio - 1e-12 ||
          (ratio < best_ratio + 1e-12 && basis[i] < basis[best])) {
        best = i;
        best_ratio = ratio;
      }
    }
    return best;
  }

  void drop_row(int r) {
    a.erase(a.begin() + r);
    rhs.erase(rhs.begin() + r);
    basis.erase(basis.begin() + r);
    --rows;
  }
};

enum class Phase1Outcome { Feasible, Infeasible };

struct Solver {
  const LpProblem& p;
  Tableau t;
  int num_struct = 0;     // structural variable columns
  int num_slack = 0;      // slack columns (one per <= row, incl. folded bounds)
  int first_artificial = 0;
  std::vector<double> col_scale;  // x_j = col_scale[j] * xhat_j
  long max_pivots = 0;

  explicit Solver(const LpProblem& problem) : p(problem) { build(); }

  void build() {
    // Fold finite upper bounds into plain <= rows, then equilibrate.
    std::vector<std::vector<double>> le = p.le_lhs;
    std::vector<double> le_rhs = p.le_rhs;
    if (!p.upper_bounds.empty()) {
      for (int j = 0; j < p.num_vars; ++j) {
        const double ub = p.upper_bounds[j];
        if (std::isfinite(ub)) {
          std::vector<double> row(p.num_vars, 0.0);
          row[j] = 1.0;
          le.push_back(std::move(row));
          le_rhs.push_back(ub);
        }
      }
    }
    const int m_eq = static_cast<int>(p.eq_lhs.size());
    const int m_le = static_cast<int>(le.size());
    const int m = m_eq + m_le;
    num_struct = p.num_vars;
    num_slack = m_le;

    col_scale.assign(num_struct, 1.0);
    for (int j = 0; j < num_struct; ++j) {
      double mx = 0.0;
      for (const auto& row : p.eq_lhs) mx = std::max(mx, std::abs(row[j]));
      for (const auto& row : le) mx = std::max(mx, std::abs(row[j]));
      if (mx > 0.0) col_scale[j] = 1.0 / mx;
    }
    std::vector<double> row_scale(m, 1.0);
    auto scaled_row_max = [&](const std::vector<double>& row) {
      double mx = 0.0;
      for (int j = 0; j < num_struct; ++j) mx = std::max(mx, std::abs(row[j]) * col_scale[j]);
      return mx;
    };
    for (int i = 0; i < m_eq; ++i) {
      const double mx = scaled_row_max(p.eq_lhs[i]);
      if (mx > 0.0) row_scale[i] = 1.0 / mx;
    }
    for (int i = 0; i < m_le; ++i) {
      const double mx = scaled_row_max(le[i]);
      if (mx > 0.0) row_scale[m_eq + i] = 1.0 / mx;
    }

    // Columns: structural | slacks | artificials. Artificials are created for
    // every equality row and for <= rows whose rhs had to be negated.
    t.rows = m;
    t.a.assign(m, {});
    t.rhs.assign(m, 0.0);
    t.basis.assign(m, -1);

    std::vector<int> needs_artificial;
    for (int i = 0; i < m; ++i) {
      const bool is_eq = i < m_eq;
      const std::vector<double>& src = is_eq ? p.eq_lhs[i] : le[i - m_eq];
      double b = (is_eq ? p.eq_rhs[i] : le_rhs[i - m_eq]) * row_scale[i];
      std::vector<double> row(num_struct + num_slack, 0.0);
      for (int j = 0; j < num_struct; ++j) row[j] = src[j] * col_scale[j] * row_scale[i];
      if (!is_eq) row[num_struct + (i - m_eq)] = row_scale[i];
      double sign = 1.0;
      if (b < 0.0) {
        sign = -1.0;
        b = -b;
        for (double& v : row) v = -v;
      }
      t.a[i] = std::move(row);
      t.rhs[i] = b;
      if (is_eq || sign < 0.0) {
        needs_artificial.push_back(i);
      } else {
        t.basis[i] = num_struct + (i - m_eq);
      }
    }

    first_artificial = num_struct + num_slack;
    t.cols = first_artificial + static_cast<int>(needs_artificial.size());
    for (auto& row : t.a) row.resize(t.cols, 0.0);
    for (int idx = 0; idx < static_cast<int>(needs_artificial.size()); ++idx) {
      const int i = needs_artificial[idx];
      t.a[i][first_artificial + idx] = 1.0;
      t.basis[i] = first_artificial + idx;
    }

    t.allowed.assign(t.cols, 1);
    t.zrow.assign(t.cols, 0.0);
    for (int j = 0; j < num_struct; ++j) t.zrow[j] = -p.objective[j] * col_scale[j];
    t.zval = 0.0;

    // Phase-1 costs: maximize -(sum of artificials), priced out for the
    // initial all-artificial/slack basis.
    t.wrow.assign(t.cols, 0.0);
    t.wval = 0.0;
    for (int i : needs_artificial) {
      for (int j = 0; j < first_artificial; ++j) t.wrow[j] -= t.a[i][j];
      t.wval -= t.rhs[i];
    }

    max_pivots = 2000 + 200L * (t.rows + t.cols);
  }

  // Runs simplex on the given cost row. Returns false when the problem is
  // unbounded in that direction. Dantzig pricing with a permanent switch to
  // Bland's rule once the objective stalls.
  bool optimize(std::vector<double>& cost, double& value, bool phase1) {
    bool bland = false;
    int stall = 0;
    double last = value;
    while (true) {
      if (t.pivots > max_pivots) throw std::runtime_error("lp: pivot limit exceeded");
      const int pc = t.entering(cost, bland);
      if (pc < 0) return true;
      const int pr = t.leaving(pc);
      if (pr < 0) {
        if (!phase1) return false;  // genuinely unbounded
        // Numerically a phase-1 unbounded direction cannot exist; ban the
        // column and keep going.
        t.allowed[pc] = 0;
        continue;
      }
      t.pivot(pr, pc);
      if (value > last + 1e-12) {
        stall = 0;
        last = value;
      } else if (++stall >= kStallLimit) {
        bland = true;
      }
    }
  }

  Phase1Outcome phase1() {
    if (t.cols == first_artificial) return Phase1Outcome::Feasible;  // no artificials
    optimize(t.wrow, t.wval, /*phase1=*/true);
    if (t.wval < -kOptTol) return Phase1Outcome::Infeasible;
    // Pivot leftover artificials out of the basis; rows where that is
    // impossible are redundant and dropped.
    for (int i = t.rows - 1; i >= 0; --i) {
      if (t.basis[i] < first_artificial) continue;
      int pc = -1;
      for (int j = 0; j < first_artificial; ++j) {
        if (std::abs(t.a[i][j]) > kPivotTol) {
          pc = j;
          break;
        }
      }
      if (pc >= 0)
        t.pivot(i, pc);
      else
        t.drop_row(i);
    }
    for (int j = first_artificial; j < t.cols; ++j) t.allowed[j] = 0;
    return Phase1Outcome::Feasible;
  }

  LpResult extract(LpStatus status) const {
    LpResult result;
    result.status = status;
    result.pivots = t.pivots;
    if (status != LpStatus::Optimal) return result;
    result.x.assign(num_struct, 0.0);
    for (int i = 0; i < t.rows; ++i) {
      const int j = t.basis[i];
      if (j < num_struct) result.x[j] = std::max(0.0, t.rhs[i]) * col_scale[j];
    }
    result.objective = 0.0;
    for (int j = 0; j < num_struct; ++j) result.objective += p.objective[j] * result.x[j];
    return result;
  }
};

}  // namespace

LpResult solve_lp(const LpProblem& problem) {
  check_shape(problem);
  Solver solver(problem);
  if (solver.phase1() == Phase1Outcome::Infeasible)
    return solver.extract(LpStatus::Infeasible);
  if (!solver.optimize(solver.t.zrow, solver.t.zval, /*phase1=*/false))
    return solver.extract(LpStatus::Unbounded);
  return solver.extract(LpStatus::Optimal);
}

LpResult find_feasible(const LpProblem& problem) {
  check_shape(problem);
  Solver solver(problem);
  if (solver.phase1() == Phase1Outcome::Infeasible)
    return solver.extract(LpStatus::Infeasible);
  return solver.extract(LpStatus::Optimal);
}

}  // namespace esp
