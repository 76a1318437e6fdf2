#pragma once

#include <iosfwd>
#include <map>
#include <utility>
#include <vector>

#include "esp/exact.hpp"
#include "esp/model.hpp"

namespace esp {

// Dual variables lambda indexed by (request, ordered cluster pair (k, m)),
// k != m, all starting at zero.
class DualVariables {
 public:
  DualVariables() = default;
  DualVariables(int num_requests, int num_clusters)
      : num_requests_(num_requests),
        num_clusters_(num_clusters),
        lambda_(static_cast<size_t>(num_requests) * num_clusters * num_clusters, 0.0) {}

  double at(int r, int k, int m) const { return lambda_[index(r, k, m)]; }
  double& at(int r, int k, int m) { return lambda_[index(r, k, m)]; }
  int num_requests() const { return num_requests_; }
  int num_clusters() const { return num_clusters_; }

 private:
  size_t index(int r, int k, int m) const {
    return (static_cast<size_t>(r) * num_clusters_ + k) * num_clusters_ + m;
  }
  int num_requests_ = 0;
  int num_clusters_ = 0;
  std::vector<double> lambda_;
};

// Value of request r as seen by cluster k: the raw value, shifted by the dual
// asymmetry towards this cluster and boosted by penalty times the number of
// other clusters currently admitting r.
double adjusted_value(double base_value, int r, int k,
                      const std::vector<std::vector<int>>& admissions_by_cluster,
                      const DualVariables& duals, double penalty);

// Everything one cluster is allowed to see when choosing its local strategy:
// its own nodes, the per-request local demands, and the already-adjusted
// values. No other cluster's capacities or allocations appear here.
struct ClusterSubproblem {
  std::vector<EdgeNode> nodes;             // this cluster's nodes
  std::vector<int> request_ids;
  std::vector<ResourceType> request_types;
  std::vector<double> local_demand;        // tau_{r,k}, aligned with request_ids
  std::vector<double> adjusted_values;
  double penalty = 1.0;
  double quadratic_coefficient = 0.0;      // subtracted per admitted request
};

struct ClusterDecision {
  std::vector<int> admit;                            // aligned with request_ids
  std::map<std::pair<int, int>, double> allocation;  // (request id, node id)
  long lp_pivots = 0;
  long bnb_nodes = 0;
};

ClusterDecision solve_cluster_subproblem(const ClusterSubproblem& sub,
                                         const ExactConfig& cfg = {});

// One multiplier step: lambda_{r,k,m} += penalty * (y_{r,k} - y_{r,m}).
DualVariables update_duals(const DualVariables& duals,
                           const std::vector<std::vector<int>>& admissions_by_cluster,
                           double penalty);

// Residual-balancing step-size rule: double when the primal residual runs 10x
// ahead of the dual residual, halve in the opposite case.
double update_penalty(double penalty, double primal_residual, double dual_residual);

struct DcespConfig {
  double initial_penalty = 1.0;
  // The starting penalty is capped at this fraction of the smallest request
  // value so the quadratic admission tax cannot wipe out low-value requests
  // on the first sweep (0 disables the cap).
  double penalty_value_fraction = 0.2;
  long max_iterations = 500;
  double primal_tol = 1e-6;
  ExactConfig subproblem;
};

struct ConvergenceRecord {
  long iteration = 0;
  double objective = 0.0;  // unanimously-admitted value at this iterate
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double penalty = 0.0;
};
using ConvergenceTrace = std::vector<ConvergenceRecord>;

void write_trace_csv(std::ostream& out, const ConvergenceTrace& trace);

struct AdmmState {
  std::vector<std::vector<int>> admissions;  // [cluster][request]
  std::vector<std::map<std::pair<int, int>, double>> allocations;  // per cluster
  DualVariables duals;
  double penalty = 1.0;
  long iteration = 0;
  std::vector<double> primal_residuals;
  std::vector<double> dual_residuals;
};

// Gauss-Seidel consensus ADMM: clusters update in ascending order, then the
// duals, then the penalty. Terminates on unanimous admission agreement or at
// max_iterations. The returned solution is the best unanimously-agreed
// iterate seen (the consensus point itself unless an earlier agreement was
// strictly better); non-converged runs have stats.converged = false.
std::pair<SlicingSolution, ConvergenceTrace> solve_dcesp(
    const Infrastructure& infra, const std::vector<SliceRequest>& requests, ValueMode mode,
    const DcespConfig& cfg = {});

}  // namespace esp
