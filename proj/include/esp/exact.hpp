#pragma once

#include <map>
#include <utility>
#include <vector>

#include "esp/linprog.hpp"
#include "esp/model.hpp"

namespace esp {

// Objective mode: Profit maximizes the total value of admitted requests,
// Count maximizes how many are admitted (every value reset to 1).
enum class ValueMode { Profit, Count };

std::string to_string(ValueMode mode);
ValueMode value_mode_from_string(const std::string& token);

// The admission/allocation MILP over one infrastructure and request batch.
// Columns: one y per request, then one sigma per (request, node) pair where
// the node's cluster has positive demand for that request. Rows: one demand
// equality per (request, cluster with positive demand), one capacity row per
// (node, type), plus y <= 1 bounds. The LP relaxation stored here is exactly
// the problem with integrality dropped.
struct EspInstance {
  Infrastructure infra;
  std::vector<SliceRequest> requests;
  ValueMode value_mode = ValueMode::Profit;
  std::vector<double> values;  // effective per-request objective coefficients

  int num_y = 0;
  std::vector<std::pair<int, int>> sigma_cols;           // (request index, node id)
  std::map<std::pair<int, int>, int> sigma_col_index;    // -> absolute column
  LpProblem relaxation;

  int total_columns() const { return num_y + static_cast<int>(sigma_cols.size()); }
};

EspInstance build_esp(const Infrastructure& infra, const std::vector<SliceRequest>& requests,
                      ValueMode mode);

struct ExactConfig {
  double integrality_tol = 1e-6;
  long max_nodes = 500000;       // safety valve; optimality requires exhausting the queue
  bool greedy_incumbent = true;  // value-density warm start
};

// Branch-and-bound over the binary admission variables with LP-relaxation
// bounds: most-fractional branching (ties: larger value, then smaller id) and
// best-bound node selection. Solves to proven optimality; deterministic.
SlicingSolution solve_exact(const EspInstance& inst, const ExactConfig& cfg = {});

// Exhaustive test oracle: tries all 2^R admission vectors, checking each with
// a phase-1 LP. Throws std::invalid_argument beyond 15 requests.
SlicingSolution brute_force(const EspInstance& inst);

struct AdmissionAllocation {
  bool feasible = false;
  std::map<std::pair<int, int>, double> allocation;  // (request id, node id)
  long pivots = 0;
};

// Phase-1 solve for the allocation of a fixed admission vector (one entry per
// request position). Used by warm starts, brute force, and repair loops.
AdmissionAllocation solve_admission_allocation(const EspInstance& inst,
                                               const std::vector<char>& admitted);

}  // namespace esp
