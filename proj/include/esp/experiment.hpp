#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "esp/dcesp.hpp"
#include "esp/exact.hpp"
#include "esp/model.hpp"
#include "esp/scenario.hpp"
#include "esp/vesp.hpp"

namespace esp {

enum class Study { OverProvisioning, AdmittedCount, Profit, EpsilonSweep };
enum class SolverKind { Oesp, Vesp, Dcesp, Baseline };

std::string to_string(Study study);
Study study_from_string(const std::string& token);
std::string to_string(SolverKind solver);
SolverKind solver_from_string(const std::string& token);

struct OverProvisionReport {
  // Consumption under the true collateral divided by capacity, per (node, type).
  std::map<std::pair<int, ResourceType>, double> ratio;
  double max_ratio = 0.0;
};

// Coupling-blind baseline: solves the admission problem as if every node had
// identity coupling, then re-prices the chosen allocation under the true
// collateral matrices. Ratios above 1 are over-provisioning.
std::pair<SlicingSolution, OverProvisionReport> baseline_coupling_blind(
    const Infrastructure& infra, const std::vector<SliceRequest>& requests, ValueMode mode,
    const ExactConfig& cfg = {});

struct ExperimentSpec {
  Study study = Study::Profit;
  std::vector<SolverKind> solvers = {SolverKind::Oesp, SolverKind::Vesp, SolverKind::Dcesp};
  std::vector<int> total_nodes = {15};   // D_c values; must divide by `clusters`
  std::vector<int> request_counts = {10};
  std::vector<double> epsilons = {0.1};
  int clusters = 5;
  int replications = 1;
  std::uint64_t base_seed = 0;
  std::string output_path = "results.csv";

  // Generator knobs shared by every grid point.
  double demand_intensity = 0.5;
  double value_min = 1.0;
  double value_max = 10.0;

  void validate() const;  // throws std::invalid_argument
};

// Parses the line-oriented `key = value` config format (lists are
// comma-separated, # starts a comment). Unknown keys are errors.
ExperimentSpec parse_experiment_config(std::istream& in);
ExperimentSpec load_experiment_config(const std::string& path);

struct ResultRow {
  std::string study;
  int d_c = 0;
  int clusters = 0;
  int requests = 0;
  double epsilon = 0.0;
  int replication = 0;
  std::uint64_t seed = 0;
  std::string solver;
  std::string status = "ok";
  double objective = 0.0;
  int admitted = 0;
  double admitted_pct = 0.0;
  long func_evals = 0;
  long bnb_nodes = 0;
  long lp_pivots = 0;
  long admm_iters = 0;
  bool converged = true;
  long repairs = 0;
  double max_violation = 0.0;
  bool has_opt_ratio = false;
  double opt_ratio = 0.0;
};

inline constexpr const char* kResultsCsvHeader =
    "study,D_c,K,R,epsilon,replication,seed,solver,status,objective,admitted,admitted_pct,"
    "func_evals,bnb_nodes,lp_pivots,admm_iters,converged,repairs,max_violation,opt_ratio";

// Runs every (D_c, R, epsilon) grid point for every replication and solver on
// the same generated scenario; per-run failures become rows with an error
// status. Row order is (grid point, replication, solver), independent of how
// runs are scheduled.
std::vector<ResultRow> run_experiment(const ExperimentSpec& spec);

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
void run_experiment_to_file(const ExperimentSpec& spec);

// Scenario parameters used for one grid point of an experiment (exposed for
// tests and for the acceptance suite).
ScenarioParams scenario_for_grid_point(const ExperimentSpec& spec, int d_c, int requests,
                                       std::uint64_t seed);

}  // namespace esp
