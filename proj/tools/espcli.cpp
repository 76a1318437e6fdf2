// Command-line harness for the edge slicing solvers: scenario generation,
// single solves, solution validation, and experiment sweeps.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "esp/dcesp.hpp"
#include "esp/exact.hpp"
#include "esp/experiment.hpp"
#include "esp/scenario.hpp"
#include "esp/vesp.hpp"

namespace {

using esp::ValueMode;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;

std::vector<esp::ResourceType> parse_types(const std::string& letters) {
  std::vector<esp::ResourceType> types;
  for (char ch : letters) types.push_back(esp::resource_type_from_string(std::string(1, ch)));
  if (types.empty()) throw CLI::ValidationError("--types", "needs at least one of N, S, C");
  return types;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open '" + out_path + "' for writing");
  out << text;
}

int run_generate(const esp::ScenarioParams& params, const std::string& out_path) {
  auto [infra, requests] = esp::generate(params);
  esp::save_scenario(out_path, infra, requests, &params);
  std::cerr << "wrote " << infra.total_nodes() << " nodes / " << requests.size()
            << " requests to " << out_path << "\n";
  return kExitOk;
}

int run_solve(const std::string& scenario_path, const std::string& solver_name, double epsilon,
              const std::string& mode_name, const std::string& out_path,
              const std::string& trace_path) {
  const esp::Scenario scenario = esp::load_scenario(scenario_path);
  const ValueMode mode = esp::value_mode_from_string(mode_name);
  const esp::SolverKind solver = esp::solver_from_string(solver_name);

  esp::SlicingSolution sol;
  switch (solver) {
    case esp::SolverKind::Oesp:
      sol = esp::solve_exact(esp::build_esp(scenario.infra, scenario.requests, mode));
      break;
    case esp::SolverKind::Vesp:
      sol = esp::solve_vesp(scenario.infra, scenario.requests, epsilon, mode);
      break;
    case esp::SolverKind::Dcesp: {
      auto [dc_sol, trace] = esp::solve_dcesp(scenario.infra, scenario.requests, mode);
      sol = std::move(dc_sol);
      if (!trace_path.empty()) {
        std::ofstream out(trace_path);
        if (!out) throw std::runtime_error("cannot open '" + trace_path + "' for writing");
        esp::write_trace_csv(out, trace);
      }
      break;
    }
    case esp::SolverKind::Baseline: {
      auto [blind_sol, report] = esp::baseline_coupling_blind(scenario.infra, scenario.requests, mode);
      sol = std::move(blind_sol);
      std::cerr << "baseline max consumption/capacity ratio: " << report.max_ratio << "\n";
      break;
    }
  }

  emit(esp::solution_to_json(sol, mode), out_path);

  // The baseline is expected to violate true capacities; everything else must
  // emit a feasible solution.
  if (solver != esp::SolverKind::Baseline) {
    const esp::ValidationReport report =
        esp::validate_solution(scenario.infra, scenario.requests, sol);
    if (!report.feasible) {
      std::cerr << "solver emitted an infeasible solution (max violation "
                << report.max_capacity_violation << ")\n";
      return kExitInfeasible;
    }
  }
  return kExitOk;
}

int run_validate(const std::string& scenario_path, const std::string& solution_path) {
  const esp::Scenario scenario = esp::load_scenario(scenario_path);
  const esp::SlicingSolution sol = esp::load_solution(solution_path);
  const esp::ValidationReport report =
      esp::validate_solution(scenario.infra, scenario.requests, sol);

  nlohmann::ordered_json doc;
  doc["feasible"] = report.feasible;
  doc["max_demand_residual"] = report.max_demand_residual;
  doc["max_capacity_violation"] = report.max_capacity_violation;
  if (report.max_capacity_violation > 0.0) {
    doc["worst_node"] = report.worst_node;
    doc["worst_type"] = esp::to_string(report.worst_type);
  }
  std::cout << doc.dump(2) << "\n";

  if (!report.feasible) {
    if (report.max_capacity_violation > report.max_demand_residual) {
      std::cerr << "validation failed: node " << report.worst_node << " type "
                << esp::to_string(report.worst_type) << " over capacity by "
                << report.max_capacity_violation << "\n";
    } else {
      std::cerr << "validation failed: worst demand residual " << report.max_demand_residual
                << "\n";
    }
    return kExitInfeasible;
  }
  std::cerr << "solution is feasible\n";
  return kExitOk;
}

int run_experiment_cmd(const std::string& config_path, const std::string& out_override) {
  esp::ExperimentSpec spec = esp::load_experiment_config(config_path);
  if (!out_override.empty()) spec.output_path = out_override;
  esp::run_experiment_to_file(spec);
  std::cerr << "wrote " << spec.output_path << "\n";
  return kExitOk;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Edge slicing solvers for coupled networking/storage/compute resources"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a random scenario file");
  esp::ScenarioParams params;
  std::string gen_out;
  std::string types = "NSC";
  gen->add_option("--out", gen_out, "Output scenario JSON path")->required();
  gen->add_option("--seed", params.seed, "Random seed");
  gen->add_option("--clusters", params.clusters, "Number of clusters (K)");
  gen->add_option("--nodes-per-cluster", params.nodes_per_cluster, "Edge nodes per cluster");
  gen->add_option("--requests", params.request_count, "Number of slice requests");
  gen->add_option("--rb-capacity", params.rb_capacity, "Resource blocks per node");
  gen->add_option("--storage-max", params.storage_max_mb, "Max storage per node (MB)");
  gen->add_option("--gips-max", params.gips_max, "Max compute per node (GIPS)");
  gen->add_option("--capacity-floor", params.capacity_floor_fraction,
                  "Lower bound of capacity draws, as a fraction of the max");
  gen->add_option("--perturbation", params.perturbation, "Collateral perturbation delta");
  gen->add_option("--value-min", params.value_min, "Minimum request value");
  gen->add_option("--value-max", params.value_max, "Maximum request value");
  gen->add_option("--demand-intensity", params.demand_intensity,
                  "Per-cluster inclusion probability of a request");
  gen->add_option("--demand-cap-fraction", params.demand_cap_fraction,
                  "Demand upper bound as a fraction of the cluster capacity");
  gen->add_option("--demand-reference-nodes", params.demand_reference_nodes,
                  "Cluster size the demand scale is pinned to (0 = actual size)");
  gen->add_option("--types", types, "Allowed request types, e.g. NC");

  // solve
  auto* solve = app.add_subcommand("solve", "Solve one scenario with one solver");
  std::string solve_scenario, solver_name, solve_out, solve_trace;
  std::string mode_name = "profit";
  double epsilon = 0.1;
  std::uint64_t solve_seed = 0;
  solve->add_option("--scenario", solve_scenario, "Scenario JSON path")->required();
  solve->add_option("--solver", solver_name, "oesp | vesp | dcesp | baseline")->required();
  solve->add_option("--epsilon", epsilon, "Similarity threshold for vesp");
  solve->add_option("--value-mode", mode_name, "profit | count");
  solve->add_option("--out", solve_out, "Write solution JSON here instead of stdout");
  solve->add_option("--trace", solve_trace, "Write the dcesp convergence trace CSV here");
  solve->add_option("--seed", solve_seed,
                    "Accepted for interface uniformity; all solvers are deterministic");

  // validate
  auto* validate = app.add_subcommand("validate", "Check a solution file against a scenario");
  std::string val_scenario, val_solution;
  validate->add_option("--scenario", val_scenario, "Scenario JSON path")->required();
  validate->add_option("--solution", val_solution, "Solution JSON path")->required();

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run an experiment sweep from a config file");
  std::string exp_config, exp_out;
  exp->add_option("--config", exp_config, "Experiment config path")->required();
  exp->add_option("--out", exp_out, "Override the config's output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) {
      params.allowed_types = parse_types(types);
      return run_generate(params, gen_out);
    }
    if (solve->parsed())
      return run_solve(solve_scenario, solver_name, epsilon, mode_name, solve_out, solve_trace);
    if (validate->parsed()) return run_validate(val_scenario, val_solution);
    if (exp->parsed()) return run_experiment_cmd(exp_config, exp_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

int main(int argc, char** argv) { return cli_main(argc, argv); }
