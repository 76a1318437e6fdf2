#include "esp/exact.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>
#include <set>
#include <stdexcept>

namespace esp {

std::string to_string(ValueMode mode) {
  return mode == ValueMode::Profit ? "profit" : "count";
}

ValueMode value_mode_from_string(const std::string& token) {
  if (token == "profit") return ValueMode::Profit;
  if (token == "count") return ValueMode::Count;
  throw std::invalid_argument("unknown value mode '" + token + "'");
}

EspInstance build_esp(const Infrastructure& infra, const std::vector<SliceRequest>& requests,
                      ValueMode mode) {
  const int num_clusters = infra.cluster_count();
  std::set<int> ids;
  for (const SliceRequest& r : requests) {
    r.validate(num_clusters);
    if (!ids.insert(r.id).second)
      throw std::invalid_argument("duplicate request id " + std::to_string(r.id));
  }

  EspInstance inst;
  inst.infra = infra;
  inst.requests = requests;
  inst.value_mode = mode;
  inst.num_y = static_cast<int>(requests.size());
  for (const SliceRequest& r : requests)
    inst.values.push_back(mode == ValueMode::Profit ? r.value : 1.0);

  // Sigma columns exist only where the request demands the node's cluster;
  // demand rows force the omitted ones to zero anyway.
  for (int ri = 0; ri < inst.num_y; ++ri) {
    for (int k = 0; k < num_clusters; ++k) {
      if (requests[ri].demand[k] <= 0.0) continue;
      for (int node_id : infra.cluster(k)) {
        inst.sigma_col_index[{ri, node_id}] = inst.total_columns();
        inst.sigma_cols.emplace_back(ri, node_id);
      }
    }
  }

  LpProblem& lp = inst.relaxation;
  lp.num_vars = inst.total_columns();
  lp.objective.assign(lp.num_vars, 0.0);
  for (int ri = 0; ri < inst.num_y; ++ri) lp.objective[ri] = inst.values[ri];
  lp.upper_bounds.assign(lp.num_vars, LpProblem::kInfinity);
  for (int ri = 0; ri < inst.num_y; ++ri) lp.upper_bounds[ri] = 1.0;

  // Demand satisfaction: sum_{d in D_k} sigma_{r,d} - tau_{r,k} y_r = 0.
  for (int ri = 0; ri < inst.num_y; ++ri) {
    for (int k = 0; k < num_clusters; ++k) {
      const double tau = requests[ri].demand[k];
      if (tau <= 0.0) continue;
      std::vector<double> row(lp.num_vars, 0.0);
      row[ri] = -tau;
      for (int node_id : infra.cluster(k)) row[inst.sigma_col_index.at({ri, node_id})] = 1.0;
      lp.eq_lhs.push_back(std::move(row));
      lp.eq_rhs.push_back(0.0);
    }
  }

  // Capacity: per (node, type), total consumption with collateral stays
  // within the node's capacity.
  for (int k = 0; k < num_clusters; ++k) {
    for (int node_id : infra.cluster(k)) {
      const EdgeNode& node = infra.node(node_id);
      for (ResourceType z : kAllResourceTypes) {
        std::vector<double> row(lp.num_vars, 0.0);
        for (int ri = 0; ri < inst.num_y; ++ri) {
          auto it = inst.sigma_col_index.find({ri, node_id});
          if (it == inst.sigma_col_index.end()) continue;
          row[it->second] = node.collateral.rate(requests[ri].rtype, z);
        }
        lp.le_lhs.push_back(std::move(row));
        lp.le_rhs.push_back(node.capacity.get(z));
      }
    }
  }
  return inst;
}

namespace {

constexpr double kBoundTol = 1e-7;

// Feasibility LP for a fixed admission set: sigma columns of admitted
// requests only, demand equalities at full tau, capacity rows.
LpProblem admission_feasibility_lp(const EspInstance& inst, const std::vector<char>& admitted) {
  const Infrastructure& infra = inst.infra;
  LpProblem lp;
  std::map<std::pair<int, int>, int> col_of;
  for (int ci = 0; ci < static_cast<int>(inst.sigma_cols.size()); ++ci) {
    const auto& [ri, node_id] = inst.sigma_cols[ci];
    if (!admitted[ri]) continue;
    col_of[{ri, node_id}] = lp.num_vars++;
  }
  lp.objective.assign(lp.num_vars, 0.0);
  for (int ri = 0; ri < inst.num_y; ++ri) {
    if (!admitted[ri]) continue;
    for (int k = 0; k < infra.cluster_count(); ++k) {
      const double tau = inst.requests[ri].demand[k];
      if (tau <= 0.0) continue;
      std::vector<double> row(lp.num_vars, 0.0);
      for (int node_id : infra.cluster(k)) row[col_of.at({ri, node_id})] = 1.0;
      lp.eq_lhs.push_back(std::move(row));
      lp.eq_rhs.push_back(tau);
    }
  }
  for (const auto& [node_id, node] : infra.nodes()) {
    for (ResourceType z : kAllResourceTypes) {
      std::vector<double> row(lp.num_vars, 0.0);
      bool any = false;
      for (const auto& [key, col] : col_of) {
        if (key.second != node_id) continue;
        row[col] = node.collateral.rate(inst.requests[key.first].rtype, z);
        any = true;
      }
      if (!any) continue;
      lp.le_lhs.push_back(std::move(row));
      lp.le_rhs.push_back(node.capacity.get(z));
    }
  }
  return lp;
}

SlicingSolution assemble_solution(const EspInstance& inst, const std::vector<char>& admitted,
                                  const std::map<std::pair<int, int>, double>& allocation) {
  SlicingSolution sol;
  for (int ri = 0; ri < inst.num_y; ++ri) {
    sol.admission[inst.requests[ri].id] = admitted[ri] ? 1 : 0;
    if (admitted[ri]) sol.objective += inst.values[ri];
  }
  sol.allocation = allocation;
  return sol;
}

std::map<std::pair<int, int>, double> allocation_from_columns(
    const EspInstance& inst, const std::map<std::pair<int, int>, int>& col_of,
    const std::vector<double>& x) {
  std::map<std::pair<int, int>, double> alloc;
  for (const auto& [key, col] : col_of) {
    if (x[col] > 1e-9)
      alloc[{inst.requests[key.first].id, key.second}] = x[col];
  }
  return alloc;
}

// Cheap necessary condition: per (cluster, type), demands priced at each
// node's cheapest collateral rate must fit in the cluster's total capacity.
bool passes_aggregate_check(const EspInstance& inst, const std::vector<char>& admitted) {
  const Infrastructure& infra = inst.infra;
  for (int k = 0; k < infra.cluster_count(); ++k) {
    for (ResourceType z : kAllResourceTypes) {
      double need = 0.0;
      for (int ri = 0; ri < inst.num_y; ++ri) {
        if (!admitted[ri]) continue;
        const double tau = inst.requests[ri].demand[k];
        if (tau <= 0.0) continue;
        double min_rate = LpProblem::kInfinity;
        for (int node_id : infra.cluster(k))
          min_rate = std::min(min_rate, infra.node(node_id).collateral.rate(inst.requests[ri].rtype, z));
        need += min_rate * tau;
      }
      if (need > inst.infra.cluster_capacity(k).get(z) + 1e-9) return false;
    }
  }
  return true;
}

struct BnbNode {
  std::vector<signed char> fixed;  // -1 free, 0/1 fixed
  double bound = 0.0;
  long id = 0;
};

struct BnbNodeOrder {
  bool operator()(const BnbNode& a, const BnbNode& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;  // max-heap on bound
    return a.id > b.id;                                // then FIFO
  }
};

LpProblem lp_with_fixes(const EspInstance& inst, const std::vector<signed char>& fixed) {
  LpProblem lp = inst.relaxation;
  for (int ri = 0; ri < inst.num_y; ++ri) {
    if (fixed[ri] == 0) {
      lp.upper_bounds[ri] = 0.0;
    } else if (fixed[ri] == 1) {
      std::vector<double> row(lp.num_vars, 0.0);
      row[ri] = 1.0;
      lp.eq_lhs.push_back(std::move(row));
      lp.eq_rhs.push_back(1.0);
    }
  }
  return lp;
}

}  // namespace

AdmissionAllocation solve_admission_allocation(const EspInstance& inst,
                                               const std::vector<char>& admitted) {
  AdmissionAllocation out;
  LpProblem lp = admission_feasibility_lp(inst, admitted);
  LpResult res = find_feasible(lp);
  out.pivots = res.pivots;
  if (res.status != LpStatus::Optimal) return out;
  out.feasible = true;
  std::map<std::pair<int, int>, int> col_of;
  int next = 0;
  for (const auto& [ri, node_id] : inst.sigma_cols)
    if (admitted[ri]) col_of[{ri, node_id}] = next++;
  out.allocation = allocation_from_columns(inst, col_of, res.x);
  return out;
}

SlicingSolution solve_exact(const EspInstance& inst, const ExactConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  SolverStats stats;

  std::vector<char> best_admitted(inst.num_y, 0);
  std::map<std::pair<int, int>, double> best_alloc;
  double best_obj = 0.0;

  if (inst.num_y > 0) {
    if (cfg.greedy_incumbent) {
      // Warm start: admit by value density while a feasibility LP keeps passing.
      std::vector<int> order(inst.num_y);
      for (int i = 0; i < inst.num_y; ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        double ta = 0.0, tb = 0.0;
        for (double d : inst.requests[a].demand) ta += d;
        for (double d : inst.requests[b].demand) tb += d;
        const double da = inst.values[a] / ta, db = inst.values[b] / tb;
        if (da != db) return da > db;
        return inst.requests[a].id < inst.requests[b].id;
      });
      std::vector<char> admitted(inst.num_y, 0);
      std::map<std::pair<int, int>, double> alloc;
      double obj = 0.0;
      for (int ri : order) {
        admitted[ri] = 1;
        if (!passes_aggregate_check(inst, admitted)) {
          admitted[ri] = 0;
          continue;
        }
        AdmissionAllocation attempt = solve_admission_allocation(inst, admitted);
        stats.lp_pivots += attempt.pivots;
        if (attempt.feasible) {
          obj += inst.values[ri];
          alloc = std::move(attempt.allocation);
        } else {
          admitted[ri] = 0;
        }
      }
      if (obj > best_obj) {
        best_obj = obj;
        best_admitted = admitted;
        best_alloc = std::move(alloc);
      }
    }

    std::priority_queue<BnbNode, std::vector<BnbNode>, BnbNodeOrder> queue;
    long next_id = 0;
    queue.push(BnbNode{std::vector<signed char>(inst.num_y, -1),
                       std::numeric_limits<double>::infinity(), next_id++});

    while (!queue.empty()) {
      BnbNode node = queue.top();
      queue.pop();
      if (node.bound <= best_obj + kBoundTol) continue;  // stale bound
      if (stats.bnb_nodes >= cfg.max_nodes)
        throw std::runtime_error("branch and bound node limit exceeded");

      LpResult res = solve_lp(lp_with_fixes(inst, node.fixed));
      ++stats.bnb_nodes;
      stats.lp_pivots += res.pivots;
      if (res.status != LpStatus::Optimal) continue;  // infeasible subtree
      double bound = res.objective;
      if (inst.value_mode == ValueMode::Count) bound = std::floor(bound + kBoundTol);
      if (bound <= best_obj + kBoundTol) continue;

      // Most fractional admission variable; ties by larger value, smaller id.
      int branch_var = -1;
      double branch_frac = 0.0;
      for (int ri = 0; ri < inst.num_y; ++ri) {
        const double frac = std::min(res.x[ri], 1.0 - res.x[ri]);
        if (frac <= cfg.integrality_tol) continue;
        bool better = false;
        if (branch_var < 0 || frac > branch_frac + 1e-12) {
          better = true;
        } else if (frac > branch_frac - 1e-12) {
          better = inst.values[ri] > inst.values[branch_var] ||
                   (inst.values[ri] == inst.values[branch_var] &&
                    inst.requests[ri].id < inst.requests[branch_var].id);
        }
        if (better) {
          branch_var = ri;
          branch_frac = std::max(branch_frac, frac);
        }
      }

      if (branch_var < 0) {
        // Integral: candidate incumbent.
        std::vector<char> admitted(inst.num_y, 0);
        double obj = 0.0;
        for (int ri = 0; ri < inst.num_y; ++ri) {
          admitted[ri] = res.x[ri] > 0.5 ? 1 : 0;
          if (admitted[ri]) obj += inst.values[ri];
        }
        if (obj > best_obj + kBoundTol) {
          best_obj = obj;
          best_admitted = admitted;
          best_alloc = allocation_from_columns(inst, inst.sigma_col_index, res.x);
        }
        continue;
      }

      for (signed char branch_value : {static_cast<signed char>(0), static_cast<signed char>(1)}) {
        BnbNode child{node.fixed, bound, next_id++};
        child.fixed[branch_var] = branch_value;
        queue.push(std::move(child));
      }
    }
  }

  SlicingSolution sol = assemble_solution(inst, best_admitted, best_alloc);
  sol.stats = stats;
  sol.stats.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sol;
}

SlicingSolution brute_force(const EspInstance& inst) {
  if (inst.num_y > 15)
    throw std::invalid_argument("brute force is limited to 15 requests");
  const auto t0 = std::chrono::steady_clock::now();
  SolverStats stats;

  std::vector<char> best_admitted(inst.num_y, 0);
  std::map<std::pair<int, int>, double> best_alloc;
  double best_obj = 0.0;

  const unsigned long count = 1UL << inst.num_y;
  for (unsigned long mask = 0; mask < count; ++mask) {
    std::vector<char> admitted(inst.num_y, 0);
    double obj = 0.0;
    for (int ri = 0; ri < inst.num_y; ++ri) {
      if (mask & (1UL << ri)) {
        admitted[ri] = 1;
        obj += inst.values[ri];
      }
    }
    if (obj <= best_obj + 1e-12) continue;  // cannot improve
    if (!passes_aggregate_check(inst, admitted)) continue;
    AdmissionAllocation attempt = solve_admission_allocation(inst, admitted);
    stats.lp_pivots += attempt.pivots;
    if (!attempt.feasible) continue;
    best_obj = obj;
    best_admitted = admitted;
    best_alloc = std::move(attempt.allocation);
  }

  SlicingSolution sol = assemble_solution(inst, best_admitted, best_alloc);
  sol.stats = stats;
  sol.stats.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sol;
}

}  // namespace esp
