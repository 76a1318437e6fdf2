#include "esp/scenario.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace esp {

using json = nlohmann::ordered_json;

CollateralMatrix reference_collateral() {
  CollateralMatrix m;
  m.set_rate(ResourceType::Storage, ResourceType::Networking, 0.0382);
  m.set_rate(ResourceType::Compute, ResourceType::Networking, 0.1636);
  m.set_rate(ResourceType::Networking, ResourceType::Storage, 26.178);
  m.set_rate(ResourceType::Compute, ResourceType::Storage, 0.0063);
  m.set_rate(ResourceType::Networking, ResourceType::Compute, 0.49);
  m.set_rate(ResourceType::Storage, ResourceType::Compute, 0.15);
  return m;
}

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double SplitMix64::next_double() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double SplitMix64::uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t kind, std::uint64_t a,
                            std::uint64_t b) {
  SplitMix64 mixer(seed ^ (kind * 0xd6e8feb86659fd93ULL));
  std::uint64_t h = mixer.next();
  h ^= (a + 0x9e3779b97f4a7c15ULL) * 0xff51afd7ed558ccdULL;
  h ^= (b + 0xc4ceb9fe1a85ec53ULL) * 0xc2b2ae3d27d4eb4fULL;
  return SplitMix64(h).next();
}

namespace {

constexpr std::uint64_t kNodeStream = 1;
constexpr std::uint64_t kRequestStream = 2;

constexpr std::array<std::pair<ResourceType, ResourceType>, 6> kOffDiagonal = {{
    {ResourceType::Networking, ResourceType::Storage},
    {ResourceType::Networking, ResourceType::Compute},
    {ResourceType::Storage, ResourceType::Networking},
    {ResourceType::Storage, ResourceType::Compute},
    {ResourceType::Compute, ResourceType::Networking},
    {ResourceType::Compute, ResourceType::Storage},
}};

}  // namespace

void ScenarioParams::validate() const {
  if (clusters < 1) throw std::invalid_argument("scenario: need at least one cluster");
  if (nodes_per_cluster < 1) throw std::invalid_argument("scenario: need at least one node per cluster");
  if (rb_capacity <= 0 || storage_max_mb <= 0 || gips_max <= 0)
    throw std::invalid_argument("scenario: capacities must be positive");
  if (capacity_floor_fraction <= 0.0 || capacity_floor_fraction > 1.0)
    throw std::invalid_argument("scenario: capacity floor fraction must be in (0, 1]");
  if (perturbation < 0.0 || perturbation >= 1.0)
    throw std::invalid_argument("scenario: perturbation must be in [0, 1)");
  if (request_count < 0) throw std::invalid_argument("scenario: negative request count");
  if (value_min <= 0.0 || value_max < value_min)
    throw std::invalid_argument("scenario: invalid value range");
  if (demand_intensity <= 0.0 || demand_intensity > 1.0)
    throw std::invalid_argument("scenario: demand intensity must be in (0, 1]");
  if (demand_cap_fraction <= 0.0)
    throw std::invalid_argument("scenario: demand cap fraction must be positive");
  if (demand_reference_nodes < 0)
    throw std::invalid_argument("scenario: negative demand reference nodes");
  if (allowed_types.empty()) throw std::invalid_argument("scenario: no request types allowed");
  if (!base_collateral.is_valid())
    throw std::invalid_argument("scenario: invalid base collateral matrix");
}

std::pair<Infrastructure, std::vector<SliceRequest>> generate(const ScenarioParams& params) {
  params.validate();

  std::vector<std::vector<EdgeNode>> clusters;
  int node_id = 0;
  for (int k = 0; k < params.clusters; ++k) {
    std::vector<EdgeNode> nodes;
    for (int i = 0; i < params.nodes_per_cluster; ++i) {
      SplitMix64 rng(derive_stream(params.seed, kNodeStream, static_cast<std::uint64_t>(k),
                                   static_cast<std::uint64_t>(i)));
      EdgeNode node;
      node.id = node_id++;
      node.capacity.n = params.rb_capacity;
      node.capacity.s =
          rng.uniform(params.capacity_floor_fraction * params.storage_max_mb, params.storage_max_mb);
      node.capacity.c = rng.uniform(params.capacity_floor_fraction * params.gips_max, params.gips_max);
      for (const auto& [from, to] : kOffDiagonal) {
        const double base = params.base_collateral.rate(from, to);
        node.collateral.set_rate(from, to,
                                 base * (1.0 + rng.uniform(-params.perturbation, params.perturbation)));
      }
      nodes.push_back(std::move(node));
    }
    clusters.push_back(std::move(nodes));
  }
  Infrastructure infra = Infrastructure::from_clusters(std::move(clusters));

  // Demand scale per (cluster, type): the cluster's own capacity, or a fixed
  // reference deployment size when demands must not scale with density.
  auto demand_scale = [&](int k, ResourceType type) {
    if (params.demand_reference_nodes > 0) {
      const double mid = (params.capacity_floor_fraction + 1.0) / 2.0;
      double per_node = 0.0;
      switch (type) {
        case ResourceType::Networking:
          per_node = params.rb_capacity;
          break;
        case ResourceType::Storage:
          per_node = mid * params.storage_max_mb;
          break;
        case ResourceType::Compute:
          per_node = mid * params.gips_max;
          break;
      }
      return per_node * params.demand_reference_nodes;
    }
    return infra.cluster_capacity(k).get(type);
  };

  std::vector<SliceRequest> requests;
  for (int r = 0; r < params.request_count; ++r) {
    SplitMix64 rng(derive_stream(params.seed, kRequestStream, static_cast<std::uint64_t>(r)));
    SliceRequest req;
    req.id = r;
    req.rtype = params.allowed_types[static_cast<size_t>(rng.next_double() *
                                                         params.allowed_types.size())];
    req.value = rng.uniform(params.value_min, params.value_max);
    std::vector<char> included(params.clusters, 0);
    bool any = false;
    while (!any) {
      for (int k = 0; k < params.clusters; ++k) {
        included[k] = rng.next_double() < params.demand_intensity ? 1 : 0;
        any = any || included[k];
      }
    }
    req.demand.assign(params.clusters, 0.0);
    for (int k = 0; k < params.clusters; ++k) {
      if (!included[k]) continue;
      const double cap = params.demand_cap_fraction * demand_scale(k, req.rtype);
      req.demand[k] = cap * (1.0 - rng.next_double());  // in (0, cap]
    }
    req.validate(params.clusters);
    requests.push_back(std::move(req));
  }
  return {std::move(infra), std::move(requests)};
}

namespace {

json collateral_to_json(const CollateralMatrix& m) {
  json rows = json::array();
  for (ResourceType from : kAllResourceTypes) {
    json row = json::array();
    for (ResourceType to : kAllResourceTypes) row.push_back(m.rate(from, to));
    rows.push_back(std::move(row));
  }
  return rows;
}

CollateralMatrix collateral_from_json(const json& rows) {
  if (!rows.is_array() || rows.size() != 3)
    throw std::runtime_error("scenario schema error: \"collateral\" must be a 3x3 array");
  CollateralMatrix m;
  for (int i = 0; i < 3; ++i) {
    const json& row = rows[i];
    if (!row.is_array() || row.size() != 3)
      throw std::runtime_error("scenario schema error: \"collateral\" must be a 3x3 array");
    for (int j = 0; j < 3; ++j) {
      const double v = row[j].get<double>();
      if (i == j) {
        if (v != 1.0)
          throw std::runtime_error("scenario schema error: collateral diagonal must be 1");
      } else {
        m.set_rate(kAllResourceTypes[i], kAllResourceTypes[j], v);
      }
    }
  }
  return m;
}

const json& require_key(const json& obj, const char* key, const char* what) {
  if (!obj.contains(key))
    throw std::runtime_error(std::string(what) + " schema error: missing key \"" + key + "\"");
  return obj.at(key);
}

json parse_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(std::string(what) + ": cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string(what) + " parse error in '" + path + "': " + e.what());
  }
}

void write_file(const std::string& path, const json& doc, const char* what) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(std::string(what) + ": cannot open '" + path + "' for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error(std::string(what) + ": write to '" + path + "' failed");
}

}  // namespace

void save_scenario(const std::string& path, const Infrastructure& infra,
                   const std::vector<SliceRequest>& requests, const ScenarioParams* params) {
  json doc;
  doc["schema_version"] = 1;
  if (params != nullptr) {
    std::string types;
    for (ResourceType t : params->allowed_types) types += to_string(t);
    doc["params"] = {{"clusters", params->clusters},
                     {"nodes_per_cluster", params->nodes_per_cluster},
                     {"rb_capacity", params->rb_capacity},
                     {"storage_max_mb", params->storage_max_mb},
                     {"gips_max", params->gips_max},
                     {"capacity_floor_fraction", params->capacity_floor_fraction},
                     {"perturbation", params->perturbation},
                     {"request_count", params->request_count},
                     {"value_min", params->value_min},
                     {"value_max", params->value_max},
                     {"demand_intensity", params->demand_intensity},
                     {"demand_cap_fraction", params->demand_cap_fraction},
                     {"demand_reference_nodes", params->demand_reference_nodes},
                     {"allowed_types", types},
                     {"seed", params->seed}};
  }
  json clusters = json::array();
  for (int k = 0; k < infra.cluster_count(); ++k) {
    json cluster;
    cluster["id"] = k;
    json nodes = json::array();
    for (int node_id : infra.cluster(k)) {
      const EdgeNode& node = infra.node(node_id);
      json n;
      n["id"] = node.id;
      n["capacity"] = {{"n", node.capacity.n}, {"s", node.capacity.s}, {"c", node.capacity.c}};
      n["collateral"] = collateral_to_json(node.collateral);
      nodes.push_back(std::move(n));
    }
    cluster["nodes"] = std::move(nodes);
    clusters.push_back(std::move(cluster));
  }
  doc["clusters"] = std::move(clusters);
  json reqs = json::array();
  for (const SliceRequest& r : requests) {
    json jr;
    jr["id"] = r.id;
    jr["type"] = to_string(r.rtype);
    jr["value"] = r.value;
    jr["demand"] = r.demand;
    reqs.push_back(std::move(jr));
  }
  doc["requests"] = std::move(reqs);
  write_file(path, doc, "scenario");
}

Scenario load_scenario(const std::string& path) {
  const json doc = parse_file(path, "scenario");
  const int version = require_key(doc, "schema_version", "scenario").get<int>();
  if (version != 1)
    throw std::runtime_error("scenario schema error: unsupported schema_version " +
                             std::to_string(version));

  std::vector<std::vector<EdgeNode>> clusters;
  for (const json& jc : require_key(doc, "clusters", "scenario")) {
    std::vector<EdgeNode> nodes;
    for (const json& jn : require_key(jc, "nodes", "scenario")) {
      EdgeNode node;
      node.id = require_key(jn, "id", "scenario").get<int>();
      const json& cap = require_key(jn, "capacity", "scenario");
      node.capacity.n = require_key(cap, "n", "scenario").get<double>();
      node.capacity.s = require_key(cap, "s", "scenario").get<double>();
      node.capacity.c = require_key(cap, "c", "scenario").get<double>();
      node.collateral = collateral_from_json(require_key(jn, "collateral", "scenario"));
      nodes.push_back(std::move(node));
    }
    clusters.push_back(std::move(nodes));
  }

  Scenario scenario;
  try {
    scenario.infra = Infrastructure::from_clusters(std::move(clusters));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("scenario schema error: ") + e.what());
  }

  for (const json& jr : require_key(doc, "requests", "scenario")) {
    SliceRequest r;
    r.id = require_key(jr, "id", "scenario").get<int>();
    r.rtype = resource_type_from_string(require_key(jr, "type", "scenario").get<std::string>());
    r.value = require_key(jr, "value", "scenario").get<double>();
    r.demand = require_key(jr, "demand", "scenario").get<std::vector<double>>();
    try {
      r.validate(scenario.infra.cluster_count());
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(std::string("scenario schema error: ") + e.what());
    }
    scenario.requests.push_back(std::move(r));
  }
  return scenario;
}

std::string solution_to_json(const SlicingSolution& sol, ValueMode mode) {
  json doc;
  doc["schema_version"] = 1;
  doc["value_mode"] = to_string(mode);
  doc["objective"] = sol.objective;
  json admission = json::array();
  for (const auto& [id, y] : sol.admission)
    admission.push_back({{"request", id}, {"admitted", y}});
  doc["admission"] = std::move(admission);
  json allocation = json::array();
  for (const auto& [key, amount] : sol.allocation)
    allocation.push_back({{"request", key.first}, {"node", key.second}, {"amount", amount}});
  doc["allocation"] = std::move(allocation);
  doc["stats"] = {{"lp_pivots", sol.stats.lp_pivots},
                  {"bnb_nodes", sol.stats.bnb_nodes},
                  {"admm_iterations", sol.stats.admm_iterations},
                  {"repairs", sol.stats.repairs},
                  {"converged", sol.stats.converged},
                  {"function_evaluations", sol.stats.function_evaluations()},
                  {"wall_time_seconds", sol.stats.wall_time_seconds}};
  return doc.dump(2) + "\n";
}

void save_solution(const std::string& path, const SlicingSolution& sol, ValueMode mode) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("solution: cannot open '" + path + "' for writing");
  out << solution_to_json(sol, mode);
  if (!out) throw std::runtime_error("solution: write to '" + path + "' failed");
}

SlicingSolution load_solution(const std::string& path) {
  const json doc = parse_file(path, "solution");
  SlicingSolution sol;
  sol.objective = require_key(doc, "objective", "solution").get<double>();
  for (const json& ja : require_key(doc, "admission", "solution")) {
    sol.admission[require_key(ja, "request", "solution").get<int>()] =
        require_key(ja, "admitted", "solution").get<int>();
  }
  for (const json& ja : require_key(doc, "allocation", "solution")) {
    sol.allocation[{require_key(ja, "request", "solution").get<int>(),
                    require_key(ja, "node", "solution").get<int>()}] =
        require_key(ja, "amount", "solution").get<double>();
  }
  if (doc.contains("stats")) {
    const json& js = doc["stats"];
    sol.stats.lp_pivots = js.value("lp_pivots", 0L);
    sol.stats.bnb_nodes = js.value("bnb_nodes", 0L);
    sol.stats.admm_iterations = js.value("admm_iterations", 0L);
    sol.stats.repairs = js.value("repairs", 0L);
    sol.stats.converged = js.value("converged", true);
    sol.stats.wall_time_seconds = js.value("wall_time_seconds", 0.0);
  }
  return sol;
}

}  // namespace esp
