#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "esp/exact.hpp"
#include "esp/model.hpp"

namespace esp {

// The default collateral matrix for the video-workload setup: 0.49 GIPS/RB,
// 26.178 MB/RB, 0.1636 RB/GIPS, 0.0063 MB/GIPS, 0.0382 RB/MB, 0.15 GIPS/MB.
CollateralMatrix reference_collateral();

struct ScenarioParams {
  int clusters = 5;
  int nodes_per_cluster = 15;
  double rb_capacity = 50.0;
  double storage_max_mb = 1'000'000.0;  // 1 TB
  double gips_max = 200.0;
  double capacity_floor_fraction = 0.1;  // lower end of the uniform capacity draw
  CollateralMatrix base_collateral = reference_collateral();
  double perturbation = 0.1;  // relative off-diagonal jitter, in [0, 1)

  int request_count = 20;
  double value_min = 1.0;
  double value_max = 10.0;
  double demand_intensity = 0.5;    // per-cluster inclusion probability
  double demand_cap_fraction = 0.5;  // demands drawn in (0, fraction * scale]
  // Cluster size used to scale demand draws. 0 keeps the generated cluster's
  // own capacity as the scale; a positive value pins the scale to that many
  // expected nodes, so demands stay comparable across deployment densities.
  int demand_reference_nodes = 0;
  std::vector<ResourceType> allowed_types = {ResourceType::Networking, ResourceType::Storage,
                                             ResourceType::Compute};
  std::uint64_t seed = 0;

  void validate() const;  // throws std::invalid_argument
};

// Seed-deterministic generation. Nodes and requests draw from split RNG
// streams keyed by (seed, kind, index), so changing the node count does not
// disturb the request draws.
std::pair<Infrastructure, std::vector<SliceRequest>> generate(const ScenarioParams& params);

struct Scenario {
  Infrastructure infra;
  std::vector<SliceRequest> requests;
};

// JSON persistence. Numbers round-trip exactly; loading validates the schema
// and names the offending key on errors (std::runtime_error). The optional
// params block records how the scenario was generated; the node and request
// arrays stay authoritative.
void save_scenario(const std::string& path, const Infrastructure& infra,
                   const std::vector<SliceRequest>& requests,
                   const ScenarioParams* params = nullptr);
Scenario load_scenario(const std::string& path);

void save_solution(const std::string& path, const SlicingSolution& sol, ValueMode mode);
std::string solution_to_json(const SlicingSolution& sol, ValueMode mode);
SlicingSolution load_solution(const std::string& path);

// SplitMix64: the 64-bit stream generator behind all scenario randomness.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double next_double();  // uniform in [0, 1)
  double uniform(double lo, double hi);

 private:
  std::uint64_t state_;
};

// Derives the seed of an independent sub-stream from a master seed, a stream
// kind tag, and up to two indices.
std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t kind, std::uint64_t a,
                            std::uint64_t b = 0);

}  // namespace esp
