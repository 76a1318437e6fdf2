#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace esp {

// Resource types in canonical (N, S, C) order. This ordering indexes every
// per-type vector and collateral matrix in the library.
enum class ResourceType : int { Networking = 0, Storage = 1, Compute = 2 };

inline constexpr std::array<ResourceType, 3> kAllResourceTypes = {
    ResourceType::Networking, ResourceType::Storage, ResourceType::Compute};

std::string to_string(ResourceType type);
ResourceType resource_type_from_string(const std::string& token);

// Per-type quantities: networking in resource blocks (RBs), storage in
// megabytes, compute in GIPS. All components must stay finite and >= 0.
struct ResourceVector {
  double n = 0.0;
  double s = 0.0;
  double c = 0.0;

  double get(ResourceType type) const;
  void set(ResourceType type, double value);

  ResourceVector& operator+=(const ResourceVector& other);
  friend ResourceVector operator+(ResourceVector lhs, const ResourceVector& rhs) {
    lhs += rhs;
    return lhs;
  }

  bool is_valid() const;  // finite and non-negative in every component
};

// Linear coupling coefficients between resource types. rate(t, z) is the
// amount of type-z resource consumed per unit of type-t allocated on the
// node; the diagonal is identically 1 (allocating x of a type consumes x of
// that same type).
class CollateralMatrix {
 public:
  CollateralMatrix();  // identity coupling (all off-diagonals zero)

  double rate(ResourceType from, ResourceType to) const {
    return rate_[static_cast<int>(from)][static_cast<int>(to)];
  }
  // Throws std::invalid_argument when asked to change a diagonal entry away
  // from 1 or to store a negative/non-finite rate.
  void set_rate(ResourceType from, ResourceType to, double value);

  bool is_valid() const;

  bool operator==(const CollateralMatrix& other) const { return rate_ == other.rate_; }

 private:
  std::array<std::array<double, 3>, 3> rate_;  // [from][to]
};

struct EdgeNode {
  int id = 0;
  int cluster_id = 0;
  ResourceVector capacity;
  CollateralMatrix collateral;
};

// A clustered set of edge nodes. Clusters are ordered lists of node ids and
// must partition the node set; every cluster is non-empty.
class Infrastructure {
 public:
  Infrastructure() = default;

  // Builds and validates an infrastructure; cluster_id of each node is
  // rewritten to its position in `clusters`. Throws std::invalid_argument on
  // duplicate ids, empty clusters, or invalid node data.
  static Infrastructure from_clusters(std::vector<std::vector<EdgeNode>> clusters);

  int cluster_count() const { return static_cast<int>(clusters_.size()); }
  int total_nodes() const { return static_cast<int>(nodes_.size()); }
  const std::vector<int>& cluster(int k) const;
  const std::vector<std::vector<int>>& clusters() const { return clusters_; }
  const EdgeNode& node(int id) const;  // throws std::out_of_range on unknown id
  bool has_node(int id) const { return nodes_.count(id) != 0; }
  const std::map<int, EdgeNode>& nodes() const { return nodes_; }

  // Componentwise sum of node capacities in cluster k.
  ResourceVector cluster_capacity(int k) const;

 private:
  std::vector<std::vector<int>> clusters_;
  std::map<int, EdgeNode> nodes_;
};

// A typed slice request: value v > 0 and a per-cluster demand array in units
// of the request's own resource type. At least one cluster demand must be
// positive.
struct SliceRequest {
  int id = 0;
  ResourceType rtype = ResourceType::Networking;
  double value = 1.0;
  std::vector<double> demand;  // one entry per cluster

  void validate(int expected_clusters) const;  // throws std::invalid_argument
};

struct SolverStats {
  long lp_pivots = 0;
  long bnb_nodes = 0;
  long admm_iterations = 0;
  long repairs = 0;       // V-ESP disaggregation repairs
  bool converged = true;  // false only for non-converged ADMM runs
  double wall_time_seconds = 0.0;

  long function_evaluations() const { return lp_pivots + bnb_nodes + admm_iterations; }

  SolverStats& operator+=(const SolverStats& other);
};

// Admission vector y and allocation map sigma. Allocation amounts are in the
// units of the owning request's resource type.
struct SlicingSolution {
  std::map<int, int> admission;                    // request id -> 0/1
  std::map<std::pair<int, int>, double> allocation;  // (request id, node id) -> amount
  double objective = 0.0;
  SolverStats stats;

  int admitted_count() const;
  double allocated_to(int request_id, int node_id) const;
};

struct TypedAmount {
  ResourceType type = ResourceType::Networking;
  double amount = 0.0;
};

// Total per-type consumption at `node` when the given primary allocations are
// placed on it, including collateral consumption of the other types. Linear
// in the allocation amounts.
ResourceVector collateral_consumption(const EdgeNode& node,
                                      const std::map<int, TypedAmount>& primary_allocations);

struct ValidationReport {
  bool feasible = false;
  double max_demand_residual = 0.0;
  double max_capacity_violation = 0.0;
  // |sum_{d in cluster k} sigma_{r,d} - tau_{r,k} * y_r| per (request, cluster)
  std::map<std::pair<int, int>, double> demand_residuals;
  // max(0, consumption - capacity) per (node, type)
  std::map<std::pair<int, ResourceType>, double> capacity_violations;
  // Worst offender, for diagnostics ({-1,...} when there is none).
  int worst_node = -1;
  ResourceType worst_type = ResourceType::Networking;
};

inline constexpr double kFeasibilityTolerance = 1e-6;

// Checks demand satisfaction (per admitted request and cluster) and node
// capacities (per node and type) of a solution. Throws std::out_of_range when
// the solution references unknown request or node ids.
ValidationReport validate_solution(const Infrastructure& infra,
                                   const std::vector<SliceRequest>& requests,
                                   const SlicingSolution& sol,
                                   double tol = kFeasibilityTolerance);

}  // namespace esp
