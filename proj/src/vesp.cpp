#include "esp/vesp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "esp/linprog.hpp"

namespace esp {

int Partitioning::total_partitions() const {
  int total = 0;
  for (const auto& cluster : groups) total += static_cast<int>(cluster.size());
  return total;
}

namespace {

// Off-diagonal (from, to) pairs in row-major order; fixes the layout of the
// last six feature components.
constexpr std::array<std::pair<ResourceType, ResourceType>, 6> kOffDiagonal = {{
    {ResourceType::Networking, ResourceType::Storage},
    {ResourceType::Networking, ResourceType::Compute},
    {ResourceType::Storage, ResourceType::Networking},
    {ResourceType::Storage, ResourceType::Compute},
    {ResourceType::Compute, ResourceType::Networking},
    {ResourceType::Compute, ResourceType::Storage},
}};

std::array<double, 9> raw_feature(const EdgeNode& node) {
  std::array<double, 9> f{};
  f[0] = node.capacity.n;
  f[1] = node.capacity.s;
  f[2] = node.capacity.c;
  for (int i = 0; i < 6; ++i)
    f[3 + i] = node.collateral.rate(kOffDiagonal[i].first, kOffDiagonal[i].second);
  return f;
}

}  // namespace

FeatureScaling cluster_feature_scaling(const Infrastructure& infra, int cluster) {
  FeatureScaling scaling;
  for (int node_id : infra.cluster(cluster)) {
    const std::array<double, 9> f = raw_feature(infra.node(node_id));
    for (int i = 0; i < 9; ++i) scaling.max_component[i] = std::max(scaling.max_component[i], f[i]);
  }
  return scaling;
}

std::array<double, 9> node_feature(const EdgeNode& node, const FeatureScaling& scaling) {
  std::array<double, 9> f = raw_feature(node);
  for (int i = 0; i < 9; ++i)
    f[i] = scaling.max_component[i] > 0.0 ? f[i] / scaling.max_component[i] : 0.0;
  return f;
}

double similarity(const EdgeNode& a, const EdgeNode& b, const FeatureScaling& scaling) {
  const std::array<double, 9> fa = node_feature(a, scaling);
  const std::array<double, 9> fb = node_feature(b, scaling);
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (int i = 0; i < 9; ++i) {
    dot += fa[i] * fb[i];
    na += fa[i] * fa[i];
    nb += fb[i] * fb[i];
  }
  if (na == 0.0 || nb == 0.0)
    throw std::domain_error("node has an all-zero feature vector");
  if (fa == fb) return 0.0;  // identical nodes are exactly identical
  const double delta = 1.0 - dot / std::sqrt(na * nb);
  return std::clamp(delta, 0.0, 2.0);
}

std::vector<std::vector<int>> partition_cluster(const Infrastructure& infra, int cluster,
                                                double eps) {
  if (eps < 0.0) throw std::invalid_argument("similarity threshold must be non-negative");
  std::vector<int> ids = infra.cluster(cluster);
  std::sort(ids.begin(), ids.end());
  const FeatureScaling scaling = cluster_feature_scaling(infra, cluster);

  std::vector<std::vector<int>> partitions;
  for (int id : ids) {
    const EdgeNode& node = infra.node(id);
    bool placed = false;
    for (auto& partition : partitions) {
      const EdgeNode& leader = infra.node(partition.front());
      if (similarity(node, leader, scaling) <= eps) {
        partition.push_back(id);
        placed = true;
        break;
      }
    }
    if (!placed) partitions.push_back({id});
  }
  return partitions;
}

Partitioning partition_infrastructure(const Infrastructure& infra, double eps) {
  Partitioning p;
  for (int k = 0; k < infra.cluster_count(); ++k)
    p.groups.push_back(partition_cluster(infra, k, eps));
  return p;
}

EdgeNode virtualize(const std::vector<int>& member_ids, const Infrastructure& infra, int new_id) {
  if (member_ids.empty()) throw std::invalid_argument("cannot virtualize an empty partition");
  EdgeNode vnode;
  vnode.id = new_id;
  vnode.cluster_id = infra.node(member_ids.front()).cluster_id;
  for (int id : member_ids) {
    const EdgeNode& member = infra.node(id);
    vnode.capacity += member.capacity;
    for (const auto& [from, to] : kOffDiagonal)
      vnode.collateral.set_rate(from, to,
                                std::max(vnode.collateral.rate(from, to),
                                         member.collateral.rate(from, to)));
  }
  return vnode;
}

PreparedPartitioning prepare_partitioning(const Infrastructure& infra, double eps) {
  PreparedPartitioning prep;
  prep.eps = eps;
  prep.physical_infra = infra;
  prep.partitioning = partition_infrastructure(infra, eps);

  std::vector<std::vector<EdgeNode>> clusters;
  int next_id = 0;
  for (int k = 0; k < infra.cluster_count(); ++k) {
    std::vector<EdgeNode> vnodes;
    for (const auto& partition : prep.partitioning.groups[k]) {
      vnodes.push_back(virtualize(partition, infra, next_id));
      prep.members_of.push_back(partition);
      ++next_id;
    }
    clusters.push_back(std::move(vnodes));
  }
  prep.virtual_infra = Infrastructure::from_clusters(std::move(clusters));
  return prep;
}

namespace {

struct SplitOutcome {
  bool feasible = false;
  std::map<std::pair<int, int>, double> allocation;  // (request id, physical node)
  long pivots = 0;
};

// Splits the virtual allocations on one virtual node across its members:
// equality per request, capacity rows per (member, type).
SplitOutcome split_virtual_node(const Infrastructure& infra,
                                const std::vector<const SliceRequest*>& requests,
                                const std::vector<double>& amounts,
                                const std::vector<int>& members) {
  SplitOutcome out;
  if (requests.empty()) {
    out.feasible = true;
    return out;
  }
  if (members.size() == 1) {
    out.feasible = true;
    for (size_t i = 0; i < requests.size(); ++i)
      out.allocation[{requests[i]->id, members[0]}] = amounts[i];
    return out;
  }

  const int nr = static_cast<int>(requests.size());
  const int nd = static_cast<int>(members.size());
  LpProblem lp;
  lp.num_vars = nr * nd;
  lp.objective.assign(lp.num_vars, 0.0);
  for (int i = 0; i < nr; ++i) {
    std::vector<double> row(lp.num_vars, 0.0);
    for (int d = 0; d < nd; ++d) row[i * nd + d] = 1.0;
    lp.eq_lhs.push_back(std::move(row));
    lp.eq_rhs.push_back(amounts[i]);
  }
  for (int d = 0; d < nd; ++d) {
    const EdgeNode& node = infra.node(members[d]);
    for (ResourceType z : kAllResourceTypes) {
      std::vector<double> row(lp.num_vars, 0.0);
      for (int i = 0; i < nr; ++i) row[i * nd + d] = node.collateral.rate(requests[i]->rtype, z);
      lp.le_lhs.push_back(std::move(row));
      lp.le_rhs.push_back(node.capacity.get(z));
    }
  }

  LpResult res = find_feasible(lp);
  out.pivots = res.pivots;
  if (res.status != LpStatus::Optimal) return out;
  out.feasible = true;
  for (int i = 0; i < nr; ++i)
    for (int d = 0; d < nd; ++d)
      if (res.x[i * nd + d] > 1e-9)
        out.allocation[{requests[i]->id, members[d]}] = res.x[i * nd + d];
  return out;
}

}  // namespace

SlicingSolution solve_vesp_prepared(const PreparedPartitioning& prep,
                                    const std::vector<SliceRequest>& requests, ValueMode mode,
                                    const VespConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();

  EspInstance reduced = build_esp(prep.virtual_infra, requests, mode);
  SlicingSolution reduced_sol = solve_exact(reduced, cfg.exact);
  SolverStats stats = reduced_sol.stats;

  const int num_requests = static_cast<int>(requests.size());
  std::vector<char> admitted(num_requests, 0);
  for (int ri = 0; ri < num_requests; ++ri)
    admitted[ri] = reduced_sol.admission.at(requests[ri].id) ? 1 : 0;
  std::map<std::pair<int, int>, double> virtual_alloc = reduced_sol.allocation;

  std::map<std::pair<int, int>, double> physical_alloc;
  while (true) {
    physical_alloc.clear();
    int failed_vnode = -1;
    for (int vnode_id = 0; vnode_id < static_cast<int>(prep.members_of.size()); ++vnode_id) {
      std::vector<const SliceRequest*> reqs;
      std::vector<double> amounts;
      for (int ri = 0; ri < num_requests; ++ri) {
        if (!admitted[ri]) continue;
        auto it = virtual_alloc.find({requests[ri].id, vnode_id});
        if (it == virtual_alloc.end() || it->second <= 1e-9) continue;
        reqs.push_back(&requests[ri]);
        amounts.push_back(it->second);
      }
      SplitOutcome split = split_virtual_node(prep.physical_infra, reqs, amounts,
                                              prep.members_of[vnode_id]);
      stats.lp_pivots += split.pivots;
      if (!split.feasible) {
        failed_vnode = vnode_id;
        break;
      }
      physical_alloc.insert(split.allocation.begin(), split.allocation.end());
    }
    if (failed_vnode < 0) break;

    // Repair: drop the lowest-value admitted request allocated on the failing
    // virtual node, then recompute the reduced allocation for the rest.
    int victim = -1;
    for (int ri = 0; ri < num_requests; ++ri) {
      if (!admitted[ri]) continue;
      auto it = virtual_alloc.find({requests[ri].id, failed_vnode});
      if (it == virtual_alloc.end() || it->second <= 1e-9) continue;
      if (victim < 0 || reduced.values[ri] < reduced.values[victim] ||
          (reduced.values[ri] == reduced.values[victim] && requests[ri].id < requests[victim].id))
        victim = ri;
    }
    if (victim < 0) throw std::runtime_error("split infeasible with no allocated requests");
    admitted[victim] = 0;
    ++stats.repairs;

    AdmissionAllocation realloc = solve_admission_allocation(reduced, admitted);
    stats.lp_pivots += realloc.pivots;
    if (!realloc.feasible)
      throw std::runtime_error("reduced allocation became infeasible during repair");
    virtual_alloc = std::move(realloc.allocation);
  }

  SlicingSolution sol;
  for (int ri = 0; ri < num_requests; ++ri) {
    sol.admission[requests[ri].id] = admitted[ri] ? 1 : 0;
    if (admitted[ri]) sol.objective += reduced.values[ri];
  }
  sol.allocation = std::move(physical_alloc);
  sol.stats = stats;
  sol.stats.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sol;
}

SlicingSolution solve_vesp(const Infrastructure& infra, const std::vector<SliceRequest>& requests,
                           double eps, ValueMode mode, const VespConfig& cfg) {
  PreparedPartitioning prep = prepare_partitioning(infra, eps);
  return solve_vesp_prepared(prep, requests, mode, cfg);
}

}  // namespace esp
