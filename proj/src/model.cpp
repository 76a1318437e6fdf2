#include "esp/model.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace esp {

std::string to_string(ResourceType type) {
  switch (type) {
    case ResourceType::Networking:
      return "N";
    case ResourceType::Storage:
      return "S";
    case ResourceType::Compute:
      return "C";
  }
  throw std::invalid_argument("unknown resource type");
}

ResourceType resource_type_from_string(const std::string& token) {
  if (token == "N" || token == "n" || token == "networking") return ResourceType::Networking;
  if (token == "S" || token == "s" || token == "storage") return ResourceType::Storage;
  if (token == "C" || token == "c" || token == "compute") return ResourceType::Compute;
  throw std::invalid_argument("unknown resource type '" + token + "'");
}

double ResourceVector::get(ResourceType type) const {
  switch (type) {
    case ResourceType::Networking:
      return n;
    case ResourceType::Storage:
      return s;
    case ResourceType::Compute:
      return c;
  }
  throw std::invalid_argument("unknown resource type");
}

void ResourceVector::set(ResourceType type, double value) {
  switch (type) {
    case ResourceType::Networking:
      n = value;
      return;
    case ResourceType::Storage:
      s = value;
      return;
    case ResourceType::Compute:
      c = value;
      return;
  }
  throw std::invalid_argument("unknown resource type");
}

ResourceVector& ResourceVector::operator+=(const ResourceVector& other) {
  n += other.n;
  s += other.s;
  c += other.c;
  return *this;
}

bool ResourceVector::is_valid() const {
  for (ResourceType t : kAllResourceTypes) {
    const double v = get(t);
    if (!std::isfinite(v) || v < 0.0) return false;
  }
  return true;
}

CollateralMatrix::CollateralMatrix() {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) rate_[i][j] = (i == j) ? 1.0 : 0.0;
}

void CollateralMatrix::set_rate(ResourceType from, ResourceType to, double value) {
  if (from == to && value != 1.0)
    throw std::invalid_argument("collateral diagonal entries are fixed at 1");
  if (!std::isfinite(value) || value < 0.0)
    throw std::invalid_argument("collateral rates must be finite and non-negative");
  rate_[static_cast<int>(from)][static_cast<int>(to)] = value;
}

bool CollateralMatrix::is_valid() const {
  for (int i = 0; i < 3; ++i) {
    if (rate_[i][i] != 1.0) return false;
    for (int j = 0; j < 3; ++j) {
      if (!std::isfinite(rate_[i][j]) || rate_[i][j] < 0.0) return false;
    }
  }
  return true;
}

Infrastructure Infrastructure::from_clusters(std::vector<std::vector<EdgeNode>> clusters) {
  if (clusters.empty()) throw std::invalid_argument("infrastructure needs at least one cluster");
  Infrastructure infra;
  std::set<int> seen;
  for (int k = 0; k < static_cast<int>(clusters.size()); ++k) {
    if (clusters[k].empty())
      throw std::invalid_argument("cluster " + std::to_string(k) + " is empty");
    std::vector<int> ids;
    for (EdgeNode& node : clusters[k]) {
      if (!seen.insert(node.id).second)
        throw std::invalid_argument("duplicate node id " + std::to_string(node.id));
      if (!node.capacity.is_valid())
        throw std::invalid_argument("node " + std::to_string(node.id) + " has invalid capacity");
      if (!node.collateral.is_valid())
        throw std::invalid_argument("node " + std::to_string(node.id) +
                                    " has an invalid collateral matrix");
      node.cluster_id = k;
      ids.push_back(node.id);
      infra.nodes_.emplace(node.id, node);
    }
    infra.clusters_.push_back(std::move(ids));
  }
  return infra;
}

const std::vector<int>& Infrastructure::cluster(int k) const {
  if (k < 0 || k >= cluster_count())
    throw std::out_of_range("cluster index " + std::to_string(k) + " out of range");
  return clusters_[k];
}

const EdgeNode& Infrastructure::node(int id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw std::out_of_range("unknown node id " + std::to_string(id));
  return it->second;
}

ResourceVector Infrastructure::cluster_capacity(int k) const {
  ResourceVector total;
  for (int id : cluster(k)) total += node(id).capacity;
  return total;
}

void SliceRequest::validate(int expected_clusters) const {
  if (!(value > 0.0) || !std::isfinite(value))
    throw std::invalid_argument("request " + std::to_string(id) + " must have positive value");
  if (static_cast<int>(demand.size()) != expected_clusters)
    throw std::invalid_argument("request " + std::to_string(id) + " demand array has length " +
                                std::to_string(demand.size()) + ", expected " +
                                std::to_string(expected_clusters));
  double total = 0.0;
  for (double d : demand) {
    if (!std::isfinite(d) || d < 0.0)
      throw std::invalid_argument("request " + std::to_string(id) + " has an invalid demand entry");
    total += d;
  }
  if (!(total > 0.0))
    throw std::invalid_argument("request " + std::to_string(id) +
                                " must demand resources in at least one cluster");
}

SolverStats& SolverStats::operator+=(const SolverStats& other) {
  lp_pivots += other.lp_pivots;
  bnb_nodes += other.bnb_nodes;
  admm_iterations += other.admm_iterations;
  repairs += other.repairs;
  converged = converged && other.converged;
  wall_time_seconds += other.wall_time_seconds;
  return *this;
}

int SlicingSolution::admitted_count() const {
  int count = 0;
  for (const auto& [id, y] : admission) count += (y != 0) ? 1 : 0;
  return count;
}

double SlicingSolution::allocated_to(int request_id, int node_id) const {
  auto it = allocation.find({request_id, node_id});
  return it == allocation.end() ? 0.0 : it->second;
}

ResourceVector collateral_consumption(const EdgeNode& node,
                                      const std::map<int, TypedAmount>& primary_allocations) {
  ResourceVector total;
  for (const auto& [request_id, alloc] : primary_allocations) {
    (void)request_id;
    for (ResourceType z : kAllResourceTypes) {
      total.set(z, total.get(z) + node.collateral.rate(alloc.type, z) * alloc.amount);
    }
  }
  return total;
}

ValidationReport validate_solution(const Infrastructure& infra,
                                   const std::vector<SliceRequest>& requests,
                                   const SlicingSolution& sol, double tol) {
  std::map<int, const SliceRequest*> by_id;
  for (const SliceRequest& r : requests) by_id.emplace(r.id, &r);

  for (const auto& [id, y] : sol.admission) {
    (void)y;
    if (by_id.count(id) == 0)
      throw std::out_of_range("solution admits unknown request id " + std::to_string(id));
  }
  for (const auto& [key, amount] : sol.allocation) {
    (void)amount;
    if (by_id.count(key.first) == 0)
      throw std::out_of_range("solution allocates for unknown request id " +
                              std::to_string(key.first));
    if (!infra.has_node(key.second))
      throw std::out_of_range("solution allocates on unknown node id " +
                              std::to_string(key.second));
  }

  ValidationReport report;
  const int num_clusters = infra.cluster_count();

  // Demand satisfaction: sum of allocations per cluster must equal tau * y.
  for (const SliceRequest& r : requests) {
    const auto yit = sol.admission.find(r.id);
    const double y = (yit != sol.admission.end() && yit->second != 0) ? 1.0 : 0.0;
    for (int k = 0; k < num_clusters; ++k) {
      double allocated = 0.0;
      for (int node_id : infra.cluster(k)) allocated += sol.allocated_to(r.id, node_id);
      const double residual = std::abs(allocated - r.demand[k] * y);
      report.demand_residuals[{r.id, k}] = residual;
      report.max_demand_residual = std::max(report.max_demand_residual, residual);
    }
  }

  // Capacity: per node, total consumption (with collateral) of each type must
  // stay within capacity.
  for (const auto& [node_id, node] : infra.nodes()) {
    std::map<int, TypedAmount> allocs;
    for (const SliceRequest& r : requests) {
      const double amount = sol.allocated_to(r.id, node_id);
      if (amount != 0.0) allocs[r.id] = TypedAmount{r.rtype, amount};
    }
    const ResourceVector used = collateral_consumption(node, allocs);
    for (ResourceType z : kAllResourceTypes) {
      const double violation = std::max(0.0, used.get(z) - node.capacity.get(z));
      report.capacity_violations[{node_id, z}] = violation;
      if (violation > report.max_capacity_violation) {
        report.max_capacity_violation = violation;
        report.worst_node = node_id;
        report.worst_type = z;
      }
    }
  }

  report.feasible =
      report.max_demand_residual <= tol && report.max_capacity_violation <= tol;
  return report;
}

}  // namespace esp
