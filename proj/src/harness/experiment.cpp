#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "cmle/errors.hpp"
#include "cmle/harness.hpp"
#include "cmle/random.hpp"

namespace cmle {

namespace {

constexpr double kResidualTol = 1e-8;

struct CellOutcome {
  bool used = false;
  bool failed = false;
  RiskMetrics losses;
  double residual = 0.0;
};

struct MethodOutcome {
  bool pd = false;
  bool converged = false;
  std::vector<CellOutcome> cells;  // one per modifier, config order
  nlohmann::json doc;
};

struct ItemOutcome {
  std::vector<MethodOutcome> methods;  // config order
};

nlohmann::json losses_json(const RiskMetrics& r) {
  nlohmann::json j{{"mu", r.mu_loss}, {"sigma_frob", r.sigma_frob}};
  j["sigma_stein"] = r.sigma_stein ? nlohmann::json(*r.sigma_stein) : nlohmann::json(nullptr);
  return j;
}

bool modified_ok(const ModifiedEstimate& m, double& residual) {
  const double scale = std::max(1.0, m.estimate.mean.norm());
  residual = std::max(m.residuals.h_norm() / scale, m.residuals.det_gap);
  return residual <= kResidualTol && is_positive_definite(m.estimate.cov);
}

MethodOutcome run_one(Method method, const Dataset& data, const EstimatePair& truth, const ExperimentConfig& config) {
  MethodOutcome out;
  out.cells.resize(config.modifiers.size());
  nlohmann::json& doc = out.doc;
  doc["method"] = to_string(method);

  SolverReport report;
  try {
    report = run_method(method, data, config.solver);
  } catch (const std::exception& e) {
    doc["error"] = e.what();
    for (auto& c : out.cells) c.failed = true;
    return out;
  }
  out.pd = report.pd_flag;
  out.converged = report.converged;
  doc["status"] = to_string(report.status);
  doc["iterations"] = report.iterations_used;
  doc["converged"] = report.converged;
  doc["pd"] = report.pd_flag;
  doc["residual_h"] = report.residuals.h_norm();
  doc["residual_det"] = report.residuals.det_gap;

  const bool finite = report.estimate.mean.allFinite() && report.estimate.cov.allFinite();
  // Non-PD raw output of the methods that do not repair internally is
  // dropped from every row of the replication.
  const bool excluded = method != Method::kSMLE && !report.pd_flag;
  doc["included"] = finite && !excluded;
  if (!finite) {
    doc["error"] = "non-finite estimate";
    for (auto& c : out.cells) c.failed = true;
    return out;
  }
  if (excluded) return out;

  nlohmann::json mods = nlohmann::json::object();
  for (std::size_t k = 0; k < config.modifiers.size(); ++k) {
    const Modifier mod = config.modifiers[k];
    CellOutcome& cell = out.cells[k];
    nlohmann::json entry;
    try {
      if (mod == Modifier::kNone) {
        cell.losses = risk_metrics(report.estimate, truth);
        cell.used = true;
      } else {
        const ModifiedEstimate m = apply_modifier(report.estimate, mod);
        if (modified_ok(m, cell.residual)) {
          cell.losses = risk_metrics(m.estimate, truth);
          cell.used = true;
        } else {
          cell.failed = true;
          entry["error"] = "modified estimate failed the constraint check";
        }
        entry["residual"] = cell.residual;
      }
    } catch (const std::exception& e) {
      cell.failed = true;
      cell.used = false;
      entry["error"] = e.what();
    }
    entry["used"] = cell.used;
    if (cell.used) entry["losses"] = losses_json(cell.losses);
    mods[to_string(mod)] = entry;
  }
  doc["modifiers"] = mods;
  return out;
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (grid.empty()) throw DomainError("experiment: empty grid");
  for (const auto& [n, p] : grid) {
    if (p < 2) throw DomainError("experiment: p must be at least 2");
    if (n <= p) throw DomainError("experiment: every grid entry needs n > p");
  }
  if (reps < 1) throw DomainError("experiment: reps must be at least 1");
  if (methods.empty()) throw DomainError("experiment: no methods selected");
  if (modifiers.empty()) throw DomainError("experiment: no modifiers selected");
  if (!frobenius && !stein) throw DomainError("experiment: no loss selected");
  if (workers < 1) throw DomainError("experiment: workers must be at least 1");
  solver.validate();
}

std::uint64_t truth_seed(const ExperimentConfig& config, Eigen::Index n, Eigen::Index p, int rep) {
  if (config.fixed_truth) return derive_seed({config.seed, 1, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(p)});
  return derive_seed({config.seed, 1, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(rep)});
}

std::uint64_t data_seed(const ExperimentConfig& config, Eigen::Index n, Eigen::Index p, int rep) {
  return derive_seed({config.seed, 2, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(rep)});
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const std::size_t reps = static_cast<std::size_t>(config.reps);
  const std::size_t total = config.grid.size() * reps;
  std::vector<ItemOutcome> items(total);

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t idx = next++; idx < total; idx = next++) {
      const auto [n, p] = config.grid[idx / reps];
      const int rep = static_cast<int>(idx % reps);
      ItemOutcome& item = items[idx];
      const EstimatePair truth = generate_truth(p, truth_seed(config, n, p, rep));
      const Dataset data = sample_dataset(truth, n, data_seed(config, n, p, rep));
      for (Method m : config.methods) item.methods.push_back(run_one(m, data, truth, config));
    }
  };
  if (config.workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < config.workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  ExperimentResult result;
  RiskTable& table = result.table;
  table.reps = config.reps;
  table.workers = config.workers;
  table.seed = config.seed;

  for (std::size_t g = 0; g < config.grid.size(); ++g) {
    const auto [n, p] = config.grid[g];
    for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
      for (std::size_t k = 0; k < config.modifiers.size(); ++k) {
        RiskRow row;
        row.method = to_string(config.methods[mi]);
        row.n = n;
        row.p = p;
        row.modifier = to_string(config.modifiers[k]);
        double mu_sum = 0.0, frob_sum = 0.0, stein_sum = 0.0;
        for (std::size_t r = 0; r < reps; ++r) {
          const MethodOutcome& mo = items[g * reps + r].methods[mi];
          row.pd_count += mo.pd ? 1 : 0;
          row.converged_count += mo.converged ? 1 : 0;
          const CellOutcome& c = mo.cells[k];
          if (!c.used) {
            ++row.excluded_reps;
            continue;
          }
          ++row.used_reps;
          mu_sum += c.losses.mu_loss;
          frob_sum += c.losses.sigma_frob;
          row.max_residual = std::max(row.max_residual, c.residual);
          if (c.losses.sigma_stein) {
            stein_sum += *c.losses.sigma_stein;
            ++row.stein_reps;
          }
        }
        if (row.used_reps > 0) {
          row.mu_risk = mu_sum / row.used_reps;
          row.sigma_frob_risk = frob_sum / row.used_reps;
        } else {
          row.mu_risk = row.sigma_frob_risk = std::numeric_limits<double>::quiet_NaN();
        }
        if (config.stein && row.stein_reps > 0) row.sigma_stein_risk = stein_sum / row.stein_reps;
        table.rows.push_back(row);
      }
    }
  }

  for (std::size_t idx = 0; idx < total; ++idx) {
    const auto [n, p] = config.grid[idx / reps];
    const int rep = static_cast<int>(idx % reps);
    for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
      const MethodOutcome& mo = items[idx].methods[mi];
      for (const CellOutcome& c : mo.cells) table.failures += c.failed ? 1 : 0;
      RunRecord rec{n, p, rep, to_string(config.methods[mi]), mo.doc};
      rec.doc["n"] = n;
      rec.doc["p"] = p;
      rec.doc["rep"] = rep;
      rec.doc["truth_seed"] = truth_seed(config, n, p, rep);
      rec.doc["data_seed"] = data_seed(config, n, p, rep);
      result.runs.push_back(std::move(rec));
    }
  }
  return result;
}

std::string risks_csv_string(const RiskTable& table) {
  std::ostringstream os;
  os << "method,n,p,modifier,mu_risk,sigma_frob_risk,sigma_stein_risk,pd_count,used_reps\n";
  for (const RiskRow& r : table.rows) {
    os << r.method << ',' << r.n << ',' << r.p << ',' << r.modifier << ',' << fmt6(r.mu_risk) << ','
       << fmt6(r.sigma_frob_risk) << ',' << (r.sigma_stein_risk ? fmt6(*r.sigma_stein_risk) : std::string("NA")) << ','
       << r.pd_count << ',' << r.used_reps << '\n';
  }
  return os.str();
}

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error("failed writing '" + path + "'");
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

void write_risks_csv(const RiskTable& table, const std::string& path) { write_text(path, risks_csv_string(table)); }

void write_risks_json(const RiskTable& table, const ExperimentConfig& config, const std::string& path) {
  nlohmann::json j;
  nlohmann::json grid = nlohmann::json::array();
  for (const auto& [n, p] : config.grid) grid.push_back({{"n", n}, {"p", p}});
  nlohmann::json methods = nlohmann::json::array(), mods = nlohmann::json::array();
  for (Method m : config.methods) methods.push_back(to_string(m));
  for (Modifier m : config.modifiers) mods.push_back(to_string(m));
  j["config"] = {{"grid", grid},         {"reps", config.reps},           {"seed", config.seed},
                 {"workers", config.workers}, {"fixed_truth", config.fixed_truth}, {"methods", methods},
                 {"modifiers", mods},    {"max_iter", config.solver.max_iter}, {"tol", config.solver.tol},
                 {"inner_max_iter", config.solver.inner_max_iter}, {"epsilon", config.solver.epsilon}};
  j["failures"] = table.failures;
  nlohmann::json rows = nlohmann::json::array();
  for (const RiskRow& r : table.rows) {
    rows.push_back({{"method", r.method},
                    {"n", r.n},
                    {"p", r.p},
                    {"modifier", r.modifier},
                    {"mu_risk", number_or_null(r.mu_risk)},
                    {"sigma_frob_risk", number_or_null(r.sigma_frob_risk)},
                    {"sigma_stein_risk", r.sigma_stein_risk ? number_or_null(*r.sigma_stein_risk) : nlohmann::json(nullptr)},
                    {"stein_reps", r.stein_reps},
                    {"pd_count", r.pd_count},
                    {"converged_count", r.converged_count},
                    {"used_reps", r.used_reps},
                    {"excluded_reps", r.excluded_reps},
                    {"max_residual", r.max_residual}});
  }
  j["rows"] = rows;
  write_text(path, j.dump(2) + "\n");
}

void write_runs_jsonl(const std::vector<RunRecord>& runs, const std::string& path) {
  std::ostringstream os;
  for (const RunRecord& r : runs) os << r.doc.dump() << '\n';
  write_text(path, os.str());
}

}  // namespace cmle
