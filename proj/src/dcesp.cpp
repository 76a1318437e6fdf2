#include "esp/dcesp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

#include "esp/csv.hpp"

namespace esp {

double adjusted_value(double base_value, int r, int k,
                      const std::vector<std::vector<int>>& admissions_by_cluster,
                      const DualVariables& duals, double penalty) {
  const int num_clusters = static_cast<int>(admissions_by_cluster.size());
  double value = base_value;
  int others_admitting = 0;
  for (int m = 0; m < num_clusters; ++m) {
    if (m == k) continue;
    value -= duals.at(r, k, m) - duals.at(r, m, k);
    others_admitting += admissions_by_cluster[m][r] ? 1 : 0;
  }
  return value + penalty * others_admitting;
}

ClusterDecision solve_cluster_subproblem(const ClusterSubproblem& sub, const ExactConfig& cfg) {
  const int num_requests = static_cast<int>(sub.request_ids.size());
  ClusterDecision decision;
  decision.admit.assign(num_requests, 0);

  // Requests with no local demand are admitted on value alone; the rest with
  // a positive effective value enter the local admission MILP.
  std::vector<SliceRequest> local_requests;
  std::vector<int> local_index;
  for (int i = 0; i < num_requests; ++i) {
    const double effective = sub.adjusted_values[i] - sub.quadratic_coefficient;
    if (sub.local_demand[i] <= 0.0) {
      decision.admit[i] = effective > 0.0 ? 1 : 0;
      continue;
    }
    if (effective <= 0.0) continue;
    SliceRequest r;
    r.id = sub.request_ids[i];
    r.rtype = sub.request_types[i];
    r.value = effective;
    r.demand = {sub.local_demand[i]};
    local_requests.push_back(std::move(r));
    local_index.push_back(i);
  }
  if (local_requests.empty()) return decision;

  Infrastructure local = Infrastructure::from_clusters({sub.nodes});
  EspInstance inst = build_esp(local, local_requests, ValueMode::Profit);
  SlicingSolution sol = solve_exact(inst, cfg);
  decision.lp_pivots = sol.stats.lp_pivots;
  decision.bnb_nodes = sol.stats.bnb_nodes;
  for (size_t j = 0; j < local_requests.size(); ++j)
    decision.admit[local_index[j]] = sol.admission.at(local_requests[j].id);
  decision.allocation = sol.allocation;
  return decision;
}

DualVariables update_duals(const DualVariables& duals,
                           const std::vector<std::vector<int>>& admissions_by_cluster,
                           double penalty) {
  DualVariables next = duals;
  const int num_clusters = static_cast<int>(admissions_by_cluster.size());
  for (int r = 0; r < duals.num_requests(); ++r) {
    for (int k = 0; k < num_clusters; ++k) {
      for (int m = 0; m < num_clusters; ++m) {
        if (k == m) continue;
        next.at(r, k, m) += penalty * (admissions_by_cluster[k][r] - admissions_by_cluster[m][r]);
      }
    }
  }
  return next;
}

double update_penalty(double penalty, double primal_residual, double dual_residual) {
  if (primal_residual > 10.0 * dual_residual) return penalty * 2.0;
  if (dual_residual > 10.0 * primal_residual) return penalty * 0.5;
  return penalty;
}

void write_trace_csv(std::ostream& out, const ConvergenceTrace& trace) {
  out << "iteration,objective,primal_residual,dual_residual,penalty\n";
  for (const ConvergenceRecord& rec : trace) {
    out << rec.iteration << ',' << format_double(rec.objective) << ','
        << format_double(rec.primal_residual) << ',' << format_double(rec.dual_residual) << ','
        << format_double(rec.penalty) << '\n';
  }
}

namespace {

double primal_residual_of(const std::vector<std::vector<int>>& admissions, int num_requests) {
  const int num_clusters = static_cast<int>(admissions.size());
  double sum = 0.0;
  for (int r = 0; r < num_requests; ++r)
    for (int k = 0; k < num_clusters; ++k)
      for (int m = 0; m < num_clusters; ++m) {
        if (k == m) continue;
        const double diff = admissions[k][r] - admissions[m][r];
        sum += diff * diff;
      }
  return std::sqrt(sum);
}

}  // namespace

std::pair<SlicingSolution, ConvergenceTrace> solve_dcesp(
    const Infrastructure& infra, const std::vector<SliceRequest>& requests, ValueMode mode,
    const DcespConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const int num_clusters = infra.cluster_count();
  const int num_requests = static_cast<int>(requests.size());
  for (const SliceRequest& r : requests) r.validate(num_clusters);

  std::vector<double> values;
  for (const SliceRequest& r : requests)
    values.push_back(mode == ValueMode::Profit ? r.value : 1.0);

  double penalty = cfg.initial_penalty;
  if (cfg.penalty_value_fraction > 0.0 && num_requests > 0) {
    double min_value = values[0];
    for (double v : values) min_value = std::min(min_value, v);
    penalty = std::min(penalty, cfg.penalty_value_fraction * min_value);
  }

  AdmmState state;
  state.admissions.assign(num_clusters, std::vector<int>(num_requests, 0));
  state.allocations.assign(num_clusters, {});
  state.duals = DualVariables(num_requests, num_clusters);
  state.penalty = penalty;

  SolverStats stats;
  ConvergenceTrace trace;

  // Best unanimously-agreed iterate, for the non-converged fallback.
  SlicingSolution best;
  double best_obj = -1.0;
  bool converged = false;

  auto unanimous_solution = [&]() {
    SlicingSolution sol;
    for (int ri = 0; ri < num_requests; ++ri) {
      int agreed = 1;
      for (int k = 0; k < num_clusters; ++k) agreed &= state.admissions[k][ri];
      sol.admission[requests[ri].id] = agreed;
      if (agreed) {
        sol.objective += values[ri];
        for (int k = 0; k < num_clusters; ++k) {
          for (int node_id : infra.cluster(k)) {
            auto it = state.allocations[k].find({requests[ri].id, node_id});
            if (it != state.allocations[k].end()) sol.allocation[it->first] = it->second;
          }
        }
      }
    }
    return sol;
  };

  std::vector<std::vector<int>> previous = state.admissions;
  while (state.iteration < cfg.max_iterations && num_requests > 0) {
    ++state.iteration;
    previous = state.admissions;

    // The consensus quadratic only exists when there are cluster pairs to
    // agree with.
    const double quad = num_clusters > 1 ? 2.0 * state.penalty : 0.0;
    for (int k = 0; k < num_clusters; ++k) {
      ClusterSubproblem sub;
      for (int node_id : infra.cluster(k)) sub.nodes.push_back(infra.node(node_id));
      sub.penalty = state.penalty;
      sub.quadratic_coefficient = quad;
      for (int ri = 0; ri < num_requests; ++ri) {
        sub.request_ids.push_back(requests[ri].id);
        sub.request_types.push_back(requests[ri].rtype);
        sub.local_demand.push_back(requests[ri].demand[k]);
        sub.adjusted_values.push_back(
            adjusted_value(values[ri], ri, k, state.admissions, state.duals, state.penalty));
      }
      ClusterDecision decision = solve_cluster_subproblem(sub, cfg.subproblem);
      stats.lp_pivots += decision.lp_pivots;
      stats.bnb_nodes += decision.bnb_nodes;
      state.admissions[k] = decision.admit;
      state.allocations[k] = std::move(decision.allocation);
    }

    const double r_p = primal_residual_of(state.admissions, num_requests);
    double moved = 0.0;
    for (int k = 0; k < num_clusters; ++k)
      for (int ri = 0; ri < num_requests; ++ri) {
        const double diff = state.admissions[k][ri] - previous[k][ri];
        moved += diff * diff;
      }
    const double r_d = state.penalty * std::sqrt(moved);
    state.primal_residuals.push_back(r_p);
    state.dual_residuals.push_back(r_d);

    SlicingSolution iterate = unanimous_solution();
    trace.push_back({state.iteration, iterate.objective, r_p, r_d, state.penalty});
    if (iterate.objective > best_obj) {
      best_obj = iterate.objective;
      best = iterate;
    }

    if (r_p <= cfg.primal_tol) {
      converged = true;
      // Prefer the consensus point itself unless an earlier unanimous iterate
      // was strictly better (penalty growth can depress the final agreement).
      if (iterate.objective >= best_obj) best = std::move(iterate);
      break;
    }

    state.duals = update_duals(state.duals, state.admissions, state.penalty);
    state.penalty = update_penalty(state.penalty, r_p, r_d);
  }
  if (num_requests == 0) converged = true;

  for (const SliceRequest& r : requests)
    if (best.admission.count(r.id) == 0) best.admission[r.id] = 0;
  stats.admm_iterations = state.iteration;
  stats.converged = converged;
  best.stats = stats;
  best.stats.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(best), std::move(trace)};
}

}  // namespace esp
