#pragma once

#include <array>
#include <vector>

#include "esp/exact.hpp"
#include "esp/model.hpp"

namespace esp {

// Per-cluster node partitions: groups[k] lists the partitions of cluster k,
// each a non-empty node-id set; together they disjointly cover the cluster.
struct Partitioning {
  std::vector<std::vector<std::vector<int>>> groups;

  int partition_count(int k) const { return static_cast<int>(groups[k].size()); }
  int total_partitions() const;
};

// Per-component maxima used to scale node features before the cosine
// dissimilarity; computed over one cluster.
struct FeatureScaling {
  std::array<double, 9> max_component{};
};

FeatureScaling cluster_feature_scaling(const Infrastructure& infra, int cluster);

// Scaled feature vector: the three capacities, then the six off-diagonal
// collateral rates in (from, to) row-major order.
std::array<double, 9> node_feature(const EdgeNode& node, const FeatureScaling& scaling);

// Cosine dissimilarity in [0, 2]: 0 for identical features. Throws
// std::domain_error when a node has an all-zero feature vector.
double similarity(const EdgeNode& a, const EdgeNode& b, const FeatureScaling& scaling);

// Leader-based greedy partitioning: scans node ids in ascending order and
// attaches each node to the first partition whose leader (its first member)
// is within eps; otherwise the node opens a new partition.
std::vector<std::vector<int>> partition_cluster(const Infrastructure& infra, int cluster,
                                                double eps);
Partitioning partition_infrastructure(const Infrastructure& infra, double eps);

// Aggregates a partition into one virtual node: capacities are summed,
// off-diagonal collateral rates take the per-entry maximum over members.
EdgeNode virtualize(const std::vector<int>& member_ids, const Infrastructure& infra, int new_id);

// Steps that depend only on the physical infrastructure, cached so repeated
// request batches reuse them.
struct PreparedPartitioning {
  double eps = 0.0;
  Infrastructure physical_infra;
  Partitioning partitioning;
  Infrastructure virtual_infra;
  std::vector<std::vector<int>> members_of;  // virtual node id -> physical ids
};

PreparedPartitioning prepare_partitioning(const Infrastructure& infra, double eps);

struct VespConfig {
  ExactConfig exact;
};

// Virtualization-based approximation: solves the reduced problem on virtual
// nodes, then splits each virtual allocation across the partition members by
// per-partition feasibility LPs. When a split is infeasible the lowest-value
// admitted request on that virtual node is dropped and the reduced allocation
// recomputed (counted in stats.repairs).
SlicingSolution solve_vesp_prepared(const PreparedPartitioning& prep,
                                    const std::vector<SliceRequest>& requests, ValueMode mode,
                                    const VespConfig& cfg = {});
SlicingSolution solve_vesp(const Infrastructure& infra, const std::vector<SliceRequest>& requests,
                           double eps, ValueMode mode, const VespConfig& cfg = {});

}  // namespace esp
