#include "esp/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "esp/csv.hpp"

namespace esp {

std::string to_string(Study study) {
  switch (study) {
    case Study::OverProvisioning:
      return "over_provisioning";
    case Study::AdmittedCount:
      return "admitted_count";
    case Study::Profit:
      return "profit";
    case Study::EpsilonSweep:
      return "epsilon_sweep";
  }
  throw std::invalid_argument("unknown study");
}

Study study_from_string(const std::string& token) {
  if (token == "over_provisioning") return Study::OverProvisioning;
  if (token == "admitted_count") return Study::AdmittedCount;
  if (token == "profit") return Study::Profit;
  if (token == "epsilon_sweep") return Study::EpsilonSweep;
  throw std::invalid_argument("unknown study '" + token + "'");
}

std::string to_string(SolverKind solver) {
  switch (solver) {
    case SolverKind::Oesp:
      return "oesp";
    case SolverKind::Vesp:
      return "vesp";
    case SolverKind::Dcesp:
      return "dcesp";
    case SolverKind::Baseline:
      return "baseline";
  }
  throw std::invalid_argument("unknown solver");
}

SolverKind solver_from_string(const std::string& token) {
  if (token == "oesp") return SolverKind::Oesp;
  if (token == "vesp") return SolverKind::Vesp;
  if (token == "dcesp") return SolverKind::Dcesp;
  if (token == "baseline") return SolverKind::Baseline;
  throw std::invalid_argument("unknown solver '" + token + "'");
}

std::pair<SlicingSolution, OverProvisionReport> baseline_coupling_blind(
    const Infrastructure& infra, const std::vector<SliceRequest>& requests, ValueMode mode,
    const ExactConfig& cfg) {
  // Blind view: every node keeps its capacities but loses all coupling.
  std::vector<std::vector<EdgeNode>> clusters;
  for (int k = 0; k < infra.cluster_count(); ++k) {
    std::vector<EdgeNode> nodes;
    for (int id : infra.cluster(k)) {
      EdgeNode node = infra.node(id);
      node.collateral = CollateralMatrix();
      nodes.push_back(std::move(node));
    }
    clusters.push_back(std::move(nodes));
  }
  Infrastructure blind = Infrastructure::from_clusters(std::move(clusters));
  SlicingSolution sol = solve_exact(build_esp(blind, requests, mode), cfg);

  // Re-price the chosen allocation under the true collateral matrices.
  OverProvisionReport report;
  for (const auto& [node_id, node] : infra.nodes()) {
    std::map<int, TypedAmount> allocs;
    for (const SliceRequest& r : requests) {
      const double amount = sol.allocated_to(r.id, node_id);
      if (amount != 0.0) allocs[r.id] = TypedAmount{r.rtype, amount};
    }
    const ResourceVector used = collateral_consumption(node, allocs);
    for (ResourceType z : kAllResourceTypes) {
      const double cap = node.capacity.get(z);
      double ratio = 0.0;
      if (cap > 0.0)
        ratio = used.get(z) / cap;
      else if (used.get(z) > kFeasibilityTolerance)
        ratio = std::numeric_limits<double>::infinity();
      report.ratio[{node_id, z}] = ratio;
      report.max_ratio = std::max(report.max_ratio, ratio);
    }
  }
  return {std::move(sol), std::move(report)};
}

void ExperimentSpec::validate() const {
  if (solvers.empty()) throw std::invalid_argument("experiment: no solvers selected");
  if (total_nodes.empty() || request_counts.empty() || epsilons.empty())
    throw std::invalid_argument("experiment: every sweep axis needs at least one value");
  if (clusters < 1) throw std::invalid_argument("experiment: need at least one cluster");
  if (replications < 1) throw std::invalid_argument("experiment: replications must be >= 1");
  for (int d : total_nodes)
    if (d < clusters || d % clusters != 0)
      throw std::invalid_argument("experiment: D_c=" + std::to_string(d) +
                                  " is not a positive multiple of K=" + std::to_string(clusters));
  for (int r : request_counts)
    if (r < 0) throw std::invalid_argument("experiment: negative request count");
  for (double e : epsilons)
    if (e < 0.0) throw std::invalid_argument("experiment: negative epsilon");
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> items;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

}  // namespace

ExperimentSpec parse_experiment_config(std::istream& in) {
  ExperimentSpec spec;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "study") {
        spec.study = study_from_string(value);
      } else if (key == "solvers") {
        spec.solvers.clear();
        for (const std::string& s : split_list(value)) spec.solvers.push_back(solver_from_string(s));
      } else if (key == "d_c_values") {
        spec.total_nodes.clear();
        for (const std::string& s : split_list(value)) spec.total_nodes.push_back(std::stoi(s));
      } else if (key == "r_values") {
        spec.request_counts.clear();
        for (const std::string& s : split_list(value)) spec.request_counts.push_back(std::stoi(s));
      } else if (key == "eps_values") {
        spec.epsilons.clear();
        for (const std::string& s : split_list(value)) spec.epsilons.push_back(std::stod(s));
      } else if (key == "clusters") {
        spec.clusters = std::stoi(value);
      } else if (key == "replications") {
        spec.replications = std::stoi(value);
      } else if (key == "seed") {
        spec.base_seed = std::stoull(value);
      } else if (key == "out") {
        spec.output_path = value;
      } else if (key == "demand_intensity") {
        spec.demand_intensity = std::stod(value);
      } else if (key == "value_min") {
        spec.value_min = std::stod(value);
      } else if (key == "value_max") {
        spec.value_max = std::stod(value);
      } else {
        throw std::invalid_argument("unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  spec.validate();
  return spec;
}

ExperimentSpec load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  return parse_experiment_config(in);
}

ScenarioParams scenario_for_grid_point(const ExperimentSpec& spec, int d_c, int requests,
                                       std::uint64_t seed) {
  ScenarioParams params;
  params.clusters = spec.clusters;
  params.nodes_per_cluster = d_c / spec.clusters;
  params.request_count = requests;
  params.demand_intensity = spec.demand_intensity;
  params.value_min = spec.value_min;
  params.value_max = spec.value_max;
  params.seed = seed;
  // Demands are scaled to the sparsest deployment in the sweep so that
  // density changes move capacity, not the workload.
  params.demand_reference_nodes =
      *std::min_element(spec.total_nodes.begin(), spec.total_nodes.end()) / spec.clusters;
  if (spec.study == Study::OverProvisioning) {
    params.allowed_types = {ResourceType::Networking, ResourceType::Compute};
  }
  return params;
}

namespace {

constexpr std::uint64_t kExperimentStream = 3;

ResultRow run_one_solver(SolverKind solver, const Infrastructure& infra,
                         const std::vector<SliceRequest>& requests, ValueMode mode, double eps,
                         const SlicingSolution* oesp_solution) {
  ResultRow row;
  row.solver = to_string(solver);
  SlicingSolution sol;
  double max_violation = 0.0;
  switch (solver) {
    case SolverKind::Oesp:
      sol = oesp_solution ? *oesp_solution : solve_exact(build_esp(infra, requests, mode));
      break;
    case SolverKind::Vesp:
      sol = solve_vesp(infra, requests, eps, mode);
      break;
    case SolverKind::Dcesp:
      sol = solve_dcesp(infra, requests, mode).first;
      break;
    case SolverKind::Baseline: {
      auto [blind_sol, report] = baseline_coupling_blind(infra, requests, mode);
      (void)report;
      sol = std::move(blind_sol);
      break;
    }
  }
  max_violation = validate_solution(infra, requests, sol).max_capacity_violation;

  row.objective = sol.objective;
  row.admitted = sol.admitted_count();
  row.admitted_pct = requests.empty() ? 0.0 : 100.0 * row.admitted / requests.size();
  row.func_evals = sol.stats.function_evaluations();
  row.bnb_nodes = sol.stats.bnb_nodes;
  row.lp_pivots = sol.stats.lp_pivots;
  row.admm_iters = sol.stats.admm_iterations;
  row.converged = sol.stats.converged;
  row.repairs = sol.stats.repairs;
  row.max_violation = max_violation;
  if (oesp_solution) {
    row.has_opt_ratio = true;
    row.opt_ratio = oesp_solution->objective > 0.0 ? sol.objective / oesp_solution->objective : 1.0;
  }
  return row;
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const bool has_oesp = std::count(spec.solvers.begin(), spec.solvers.end(), SolverKind::Oesp) > 0;
  const ValueMode mode = spec.study == Study::AdmittedCount ? ValueMode::Count : ValueMode::Profit;

  std::vector<ResultRow> rows;
  for (size_t di = 0; di < spec.total_nodes.size(); ++di) {
    for (size_t ri = 0; ri < spec.request_counts.size(); ++ri) {
      for (size_t ei = 0; ei < spec.epsilons.size(); ++ei) {
        for (int rep = 0; rep < spec.replications; ++rep) {
          // The seed ignores epsilon: every epsilon sees the same scenario.
          const std::uint64_t seed =
              derive_stream(spec.base_seed, kExperimentStream,
                            di * spec.request_counts.size() + ri, static_cast<std::uint64_t>(rep));
          const int d_c = spec.total_nodes[di];
          const int requests_n = spec.request_counts[ri];
          const double eps = spec.epsilons[ei];

          ScenarioParams params = scenario_for_grid_point(spec, d_c, requests_n, seed);
          auto [infra, requests] = generate(params);

          SlicingSolution oesp_solution;
          bool oesp_ok = false;
          if (has_oesp) {
            try {
              oesp_solution = solve_exact(build_esp(infra, requests, mode));
              oesp_ok = true;
            } catch (const std::exception&) {
              oesp_ok = false;
            }
          }

          for (SolverKind solver : spec.solvers) {
            ResultRow row;
            try {
              row = run_one_solver(solver, infra, requests, mode, eps,
                                   oesp_ok ? &oesp_solution : nullptr);
            } catch (const std::exception&) {
              row = ResultRow{};
              row.solver = to_string(solver);
              row.status = "error";
            }
            row.study = to_string(spec.study);
            row.d_c = d_c;
            row.clusters = spec.clusters;
            row.requests = requests_n;
            row.epsilon = eps;
            row.replication = rep;
            row.seed = seed;
            rows.push_back(std::move(row));
          }
        }
      }
    }
  }
  return rows;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kResultsCsvHeader << '\n';
  for (const ResultRow& row : rows) {
    out << row.study << ',' << row.d_c << ',' << row.clusters << ',' << row.requests << ','
        << format_double(row.epsilon) << ',' << row.replication << ',' << row.seed << ','
        << row.solver << ',' << row.status << ',' << format_double(row.objective) << ','
        << row.admitted << ',' << format_double(row.admitted_pct) << ',' << row.func_evals << ','
        << row.bnb_nodes << ',' << row.lp_pivots << ',' << row.admm_iters << ','
        << (row.converged ? 1 : 0) << ',' << row.repairs << ','
        << format_double(row.max_violation) << ','
        << (row.has_opt_ratio ? format_double(row.opt_ratio) : std::string()) << '\n';
  }
}

void run_experiment_to_file(const ExperimentSpec& spec) {
  std::vector<ResultRow> rows = run_experiment(spec);
  std::ofstream out(spec.output_path);
  if (!out)
    throw std::runtime_error("experiment: cannot open '" + spec.output_path + "' for writing");
  write_results_csv(out, rows);
  if (!out) throw std::runtime_error("experiment: write to '" + spec.output_path + "' failed");
}

}  // namespace esp
