#pragma once

#include <random>
#include <vector>

#include "esp/model.hpp"

namespace esp::test {

// The video-workload coupling matrix used throughout the experiments:
// 0.49 GIPS/RB, 26.178 MB/RB, 0.1636 RB/GIPS, 0.0063 MB/GIPS,
// 0.0382 RB/MB, 0.15 GIPS/MB.
inline CollateralMatrix video_collateral() {
  CollateralMatrix m;
  m.set_rate(ResourceType::Storage, ResourceType::Networking, 0.0382);
  m.set_rate(ResourceType::Compute, ResourceType::Networking, 0.1636);
  m.set_rate(ResourceType::Networking, ResourceType::Storage, 26.178);
  m.set_rate(ResourceType::Compute, ResourceType::Storage, 0.0063);
  m.set_rate(ResourceType::Networking, ResourceType::Compute, 0.49);
  m.set_rate(ResourceType::Storage, ResourceType::Compute, 0.15);
  return m;
}

inline EdgeNode make_node(int id, double n, double s, double c,
                          const CollateralMatrix& coll = CollateralMatrix()) {
  EdgeNode node;
  node.id = id;
  node.capacity = ResourceVector{n, s, c};
  node.collateral = coll;
  return node;
}

inline SliceRequest make_request(int id, ResourceType type, double value,
                                 std::vector<double> demand) {
  SliceRequest r;
  r.id = id;
  r.rtype = type;
  r.value = value;
  r.demand = std::move(demand);
  return r;
}

// Small random fixtures for solver cross-checks; deliberately independent of
// the scenario module, which has its own tests.
struct SmallFixture {
  Infrastructure infra;
  std::vector<SliceRequest> requests;
};

inline SmallFixture random_fixture(std::uint64_t seed, int clusters, int nodes_per_cluster,
                                   int num_requests) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<std::vector<EdgeNode>> groups;
  int node_id = 0;
  for (int k = 0; k < clusters; ++k) {
    std::vector<EdgeNode> nodes;
    for (int i = 0; i < nodes_per_cluster; ++i) {
      CollateralMatrix coll = video_collateral();
      for (ResourceType t : kAllResourceTypes)
        for (ResourceType z : kAllResourceTypes)
          if (t != z) coll.set_rate(t, z, coll.rate(t, z) * (0.9 + 0.2 * u01(rng)));
      nodes.push_back(
          make_node(node_id++, 50.0, 1e5 + 9e5 * u01(rng), 20.0 + 180.0 * u01(rng), coll));
    }
    groups.push_back(std::move(nodes));
  }
  SmallFixture fx;
  fx.infra = Infrastructure::from_clusters(std::move(groups));
  for (int r = 0; r < num_requests; ++r) {
    const ResourceType type = kAllResourceTypes[rng() % 3];
    std::vector<double> demand(clusters, 0.0);
    bool any = false;
    while (!any) {
      for (int k = 0; k < clusters; ++k) {
        if (u01(rng) < 0.7) {
          const double cap = fx.infra.cluster_capacity(k).get(type);
          demand[k] = 0.4 * cap * (1.0 - u01(rng));
          any = true;
        } else {
          demand[k] = 0.0;
        }
      }
    }
    fx.requests.push_back(make_request(r, type, 1.0 + 9.0 * u01(rng), demand));
  }
  return fx;
}

}  // namespace esp::test
