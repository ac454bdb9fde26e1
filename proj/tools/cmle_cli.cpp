// Command-line front end: simulate, fit, coverage, check.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cmle/diagnostics.hpp"
#include "cmle/errors.hpp"
#include "cmle/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitParse = 3;
constexpr int kExitPartial = 4;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::vector<std::pair<Eigen::Index, Eigen::Index>> parse_grid(const std::string& s) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> grid;
  for (const std::string& cell : split_list(s)) {
    const auto x = cell.find_first_of("xX");
    if (x == std::string::npos) throw cmle::DomainError("grid entry '" + cell + "' is not of the form NxP");
    try {
      grid.emplace_back(std::stoll(cell.substr(0, x)), std::stoll(cell.substr(x + 1)));
    } catch (const std::exception&) {
      throw cmle::DomainError("grid entry '" + cell + "' is not of the form NxP");
    }
  }
  return grid;
}

cmle::MeanUpdate parse_mean_update(const std::string& s) {
  if (s == "printed") return cmle::MeanUpdate::kPrinted;
  if (s == "stationarity") return cmle::MeanUpdate::kStationarity;
  throw cmle::DomainError("mean update must be 'printed' or 'stationarity'");
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw cmle::Error("cannot open '" + path.string() + "' for writing");
  out << text;
}

struct SolverFlags {
  int max_iter = 1000;
  double tol = 1e-6;
  int inner_max_iter = 100;
  double epsilon = 0.1;
  std::string mean_update = "printed";
  int as_refresh = 0;

  void add(CLI::App* app) {
    app->add_option("--max-iter", max_iter, "Iteration cap of the solvers")->capture_default_str();
    app->add_option("--tol", tol, "Relative parameter-change tolerance")->capture_default_str();
    app->add_option("--inner-max-iter", inner_max_iter, "Cap of each S&C loop")->capture_default_str();
    app->add_option("--epsilon", epsilon, "S&C loop accuracy")->capture_default_str();
    app->add_option("--mean-update", mean_update, "SMLE mean update: printed | stationarity")->capture_default_str();
    app->add_option("--as-refresh", as_refresh, "Rebuild the A&S coefficient matrix every k iterations (0 = never)")
        ->capture_default_str();
  }

  cmle::SolverConfig build() const {
    cmle::SolverConfig c;
    c.max_iter = max_iter;
    c.tol = tol;
    c.inner_max_iter = inner_max_iter;
    c.epsilon = epsilon;
    c.mean_update = parse_mean_update(mean_update);
    c.as_refresh_every = as_refresh;
    c.record_trace = false;
    c.validate();
    return c;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained mean/covariance estimation under Sigma mu = mu and |Sigma| = 1"};
  app.set_config("--config", "", "Read options from a TOML/INI file; command-line flags take precedence");
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run the Monte-Carlo risk study");
  std::string grid = "50x5,50x25,100x10,300x30";
  std::string methods = "SMLE,SC,AS";
  std::string modifiers = "none,M3-kmeans";
  std::string losses = "frobenius";
  int reps = 100;
  std::uint64_t seed = 20240101;
  int workers = 1;
  std::string out_dir = "results";
  bool fixed_truth = false;
  SolverFlags sim_solver;
  sim->add_option("--grid", grid, "Comma-separated NxP pairs")->capture_default_str();
  sim->add_option("--reps", reps, "Replications per grid cell")->capture_default_str();
  sim->add_option("--methods", methods, "Subset of SMLE,SC,AS")->capture_default_str();
  sim->add_option("--modifiers", modifiers, "Subset of none,M1,M2,M3-gap,M3-kmeans")->capture_default_str();
  sim->add_option("--losses", losses, "Subset of frobenius,stein")->capture_default_str();
  sim->add_option("--seed", seed, "Master seed")->capture_default_str();
  sim->add_option("--workers", workers, "Worker threads")->capture_default_str();
  sim->add_option("--out-dir", out_dir, "Directory for risks.csv, risks.json, runs.jsonl")->capture_default_str();
  sim->add_flag("--fixed-truth", fixed_truth, "Use one truth per (n, p) instead of one per replication");
  sim_solver.add(sim);

  // fit
  auto* fit = app.add_subcommand("fit", "Fit a CSV dataset");
  std::string input;
  std::string method = "AS";
  std::string modifier = "none";
  std::string out_path;
  SolverFlags fit_solver;
  fit->add_option("--input", input, "CSV file, one observation per row")->required();
  fit->add_option("--method", method, "SMLE | SC | AS")->capture_default_str();
  fit->add_option("--modifier", modifier, "none | M1 | M2 | M3-gap | M3-kmeans")->capture_default_str();
  fit->add_option("--out", out_path, "Write the JSON report here instead of stdout");
  fit_solver.add(fit);

  // coverage
  auto* cov = app.add_subcommand("coverage", "Estimate P[lambda_min(W_{n-1}) > n/2]");
  std::int64_t cov_n = 50, cov_p = 5, cov_reps = 2000;
  std::uint64_t cov_seed = 1;
  int cov_workers = 1;
  cov->add_option("--n", cov_n)->capture_default_str();
  cov->add_option("--p", cov_p)->capture_default_str();
  cov->add_option("--reps", cov_reps)->capture_default_str();
  cov->add_option("--seed", cov_seed)->capture_default_str();
  cov->add_option("--workers", cov_workers)->capture_default_str();

  // check
  auto* chk = app.add_subcommand("check", "Run randomized invariant checks");
  std::uint64_t chk_seed = 7;
  int chk_trials = 200;
  chk->add_option("--seed", chk_seed)->capture_default_str();
  chk->add_option("--trials", chk_trials)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*sim) {
      cmle::ExperimentConfig config;
      cmle::SolverConfig solver;
      try {
        config.grid = parse_grid(grid);
        config.reps = reps;
        config.methods.clear();
        for (const auto& m : split_list(methods)) config.methods.push_back(cmle::parse_method(m));
        config.modifiers.clear();
        for (const auto& m : split_list(modifiers)) config.modifiers.push_back(cmle::parse_modifier(m));
        config.frobenius = config.stein = false;
        for (const auto& l : split_list(losses)) {
          if (l == "frobenius") config.frobenius = true;
          else if (l == "stein") config.stein = true;
          else throw cmle::DomainError("unknown loss '" + l + "'");
        }
        config.seed = seed;
        config.workers = workers;
        config.fixed_truth = fixed_truth;
        config.solver = sim_solver.build();
        config.validate();
      } catch (const cmle::Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
      }
      const cmle::ExperimentResult result = cmle::run_experiment(config);
      const std::filesystem::path dir(out_dir);
      std::filesystem::create_directories(dir);
      cmle::write_risks_csv(result.table, (dir / "risks.csv").string());
      cmle::write_risks_json(result.table, config, (dir / "risks.json").string());
      cmle::write_runs_jsonl(result.runs, (dir / "runs.jsonl").string());
      std::cout << cmle::risks_csv_string(result.table);
      if (result.table.failures > 0) {
        std::cerr << result.table.failures << " run(s) failed; see runs.jsonl\n";
        return kExitPartial;
      }
      return kExitOk;
    }

    if (*fit) {
      cmle::Method m;
      cmle::Modifier mod;
      cmle::SolverConfig solver;
      try {
        m = cmle::parse_method(method);
        mod = cmle::parse_modifier(modifier);
        solver = fit_solver.build();
      } catch (const cmle::Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
      }
      const nlohmann::json report = cmle::fit_file(input, m, mod, solver);
      if (out_path.empty()) {
        std::cout << report.dump(2) << "\n";
      } else {
        write_file(out_path, report.dump(2) + "\n");
      }
      const bool ok = report["estimate"]["converged"].get<bool>();
      return ok ? kExitOk : kExitPartial;
    }

    if (*cov) {
      if (cov_workers < 1) {
        std::cerr << "config error: workers must be at least 1\n";
        return kExitConfig;
      }
      const cmle::CoverageEstimate c = cmle::wishart_coverage(cov_n, cov_p, cov_reps, cov_seed, cov_workers);
      const nlohmann::json j{{"n", cov_n},       {"p", cov_p},          {"reps", c.reps},
                             {"seed", cov_seed}, {"hits", c.hits},      {"estimate", c.estimate},
                             {"std_error", c.std_error}};
      std::cout << j.dump(2) << "\n";
      return kExitOk;
    }

    if (*chk) {
      bool all = true;
      for (const auto& r : cmle::run_self_check(chk_seed, chk_trials)) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
        all = all && r.passed;
      }
      return all ? kExitOk : kExitPartial;
    }
  } catch (const cmle::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const cmle::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
