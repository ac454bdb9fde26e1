#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cmle/enforce.hpp"
#include "cmle/solvers.hpp"

namespace cmle {

enum class Method { kSMLE, kSC, kAS };

std::string to_string(Method m);
/// Accepts SMLE, SC (or S&C), AS (or A&S), case-insensitive.
Method parse_method(const std::string& tag);

/// Runs the named solver with the given configuration.
SolverReport run_method(Method m, const Dataset& data, const SolverConfig& config);

/// (mu, Psi = L L') with L lower triangular, diagonal N(5, 1), off-diagonal
/// N(0, 1), and mu with N(0, 1) entries. Not yet constrained.
EstimatePair generate_truth_raw(Eigen::Index p, std::uint64_t seed);

/// generate_truth_raw followed by modify_m1, so Sigma mu = mu and |Sigma| = 1.
EstimatePair generate_truth(Eigen::Index p, std::uint64_t seed);

/// n draws of mu + Sigma^{1/2} z using the symmetric square root.
Dataset sample_dataset(const EstimatePair& truth, Eigen::Index n, std::uint64_t seed);

struct RiskMetrics {
  double mu_loss = 0.0;     ///< |mu^ - mu|^2 / p
  double sigma_frob = 0.0;  ///< |Sigma^ - Sigma|_F^2 / p
  /// tr(Sigma^ Sigma^-1) - log|Sigma^ Sigma^-1| - p; unset when Sigma^ is not PD.
  std::optional<double> sigma_stein;
};

RiskMetrics risk_metrics(const EstimatePair& est, const EstimatePair& truth);

struct ExperimentConfig {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> grid{{50, 5}, {50, 25}, {100, 10}, {300, 30}};
  int reps = 100;
  std::vector<Method> methods{Method::kSMLE, Method::kSC, Method::kAS};
  std::vector<Modifier> modifiers{Modifier::kNone, Modifier::kM3KMeans};
  bool frobenius = true;
  bool stein = false;
  std::uint64_t seed = 20240101;
  SolverConfig solver;
  int workers = 1;
  /// One truth per (n, p) instead of a fresh truth per replication.
  bool fixed_truth = false;

  void validate() const;
};

struct RiskRow {
  std::string method;
  Eigen::Index n = 0;
  Eigen::Index p = 0;
  std::string modifier;
  double mu_risk = 0.0;
  double sigma_frob_risk = 0.0;
  std::optional<double> sigma_stein_risk;
  int stein_reps = 0;        ///< replications with a defined Stein loss
  int pd_count = 0;          ///< raw solver outputs that were PD
  int converged_count = 0;   ///< raw solver runs that met the stopping rule
  int used_reps = 0;
  int excluded_reps = 0;     ///< used_reps + excluded_reps = reps
  double max_residual = 0.0; ///< largest constraint residual among used modified estimates
};

struct RiskTable {
  std::vector<RiskRow> rows;
  int reps = 0;
  int workers = 1;
  std::uint64_t seed = 0;
  int failures = 0;  ///< solver or modifier errors recorded in the run log
};

/// One line of the per-run log.
struct RunRecord {
  Eigen::Index n = 0;
  Eigen::Index p = 0;
  int rep = 0;
  std::string method;
  nlohmann::json doc;
};

struct ExperimentResult {
  RiskTable table;
  std::vector<RunRecord> runs;
};

/// Runs every (n, p, replication, method, modifier) cell. Work items are
/// independent and results are combined in a fixed order, so the output does
/// not depend on the worker count.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Seeds of replication r at (n, p).
std::uint64_t truth_seed(const ExperimentConfig& config, Eigen::Index n, Eigen::Index p, int rep);
std::uint64_t data_seed(const ExperimentConfig& config, Eigen::Index n, Eigen::Index p, int rep);

void write_risks_csv(const RiskTable& table, const std::string& path);
void write_risks_json(const RiskTable& table, const ExperimentConfig& config, const std::string& path);
void write_runs_jsonl(const std::vector<RunRecord>& runs, const std::string& path);
std::string risks_csv_string(const RiskTable& table);

/// Numeric CSV, one observation per row, optional single header row. Throws
/// ParseError naming line and column of the first bad field.
Mat read_csv_matrix(const std::string& path);
Mat parse_csv_matrix(const std::string& text, const std::string& source = "<input>");

/// Fits a dataset with one method and an optional modifier and returns the
/// report document.
nlohmann::json fit_dataset(const Dataset& data, Method method, Modifier modifier, const SolverConfig& config);
nlohmann::json fit_file(const std::string& path, Method method, Modifier modifier, const SolverConfig& config);

/// Serialization helpers shared by the CLI.
nlohmann::json to_json(const Vec& v);
nlohmann::json to_json(const Mat& m);
nlohmann::json to_json(const SolverReport& r);
nlohmann::json to_json(const ModifiedEstimate& m);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Randomized invariant checks over the library (constraint exactness of the
/// modifiers, PD repair, rank-two eigenvalues, derivative checks).
std::vector<CheckResult> run_self_check(std::uint64_t seed, int trials);

}  // namespace cmle
