#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cmle/errors.hpp"
#include "cmle/harness.hpp"

namespace cmle {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_number(const std::string& s, double& value) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  value = std::strtod(s.c_str(), &end);
  return errno == 0 && end == s.c_str() + s.size() && std::isfinite(value);
}

}  // namespace

Mat parse_csv_matrix(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  int line_no = 0;
  bool seen_first = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const std::vector<std::string> fields = split_fields(t);
    std::vector<double> values(fields.size());
    std::size_t bad = fields.size();
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (!parse_number(fields[c], values[c])) {
        bad = c;
        break;
      }
    }
    if (!seen_first) {
      seen_first = true;
      width = fields.size();
      // A first row with any non-numeric field is taken as the header.
      if (bad != fields.size()) continue;
    }
    if (bad != fields.size()) {
      throw ParseError(source + ":" + std::to_string(line_no) + ":" + std::to_string(bad + 1) + ": not a number: '" +
                       fields[bad] + "'");
    }
    if (fields.size() != width) {
      throw ParseError(source + ":" + std::to_string(line_no) + ":" + std::to_string(std::min(fields.size(), width) + 1) +
                       ": expected " + std::to_string(width) + " fields, found " + std::to_string(fields.size()));
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw ParseError(source + ": no numeric rows");
  Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < width; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

Mat read_csv_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv_matrix(buf.str(), path);
}

nlohmann::json to_json(const Vec& v) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

nlohmann::json to_json(const Mat& m) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    j.push_back(row);
  }
  return j;
}

nlohmann::json to_json(const SolverReport& r) {
  nlohmann::json blocks = nlohmann::json::object();
  for (std::size_t b = 0; b < r.block_names.size(); ++b) blocks[r.block_names[b]] = static_cast<bool>(r.block_converged[b]);
  nlohmann::json j{{"method", r.method},
                   {"mean", to_json(r.estimate.mean)},
                   {"cov", to_json(r.estimate.cov)},
                   {"alpha1", r.multipliers.alpha1},
                   {"alpha2", to_json(r.multipliers.alpha2)},
                   {"iterations", r.iterations_used},
                   {"converged", r.converged},
                   {"status", to_string(r.status)},
                   {"blocks_converged", blocks},
                   {"residual_h", r.residuals.h_norm()},
                   {"residual_det", r.residuals.det_gap},
                   {"pd", r.pd_flag},
                   {"symmetry_gap", r.symmetry_gap}};
  if (!r.message.empty()) j["message"] = r.message;
  if (r.target_residual) j["target_residual"] = *r.target_residual;
  return j;
}

nlohmann::json to_json(const ModifiedEstimate& m) {
  nlohmann::json sel = nlohmann::json::array();
  for (Eigen::Index i : m.selected_indices) sel.push_back(i);
  return {{"modifier", to_string(m.method)},
          {"mean", to_json(m.estimate.mean)},
          {"cov", to_json(m.estimate.cov)},
          {"selected_indices", sel},
          {"lambda_pr", m.lambda_pr},
          {"residual_h", m.residuals.h_norm()},
          {"residual_det", m.residuals.det_gap},
          {"pd", is_positive_definite(m.estimate.cov)}};
}

nlohmann::json fit_dataset(const Dataset& data, Method method, Modifier modifier, const SolverConfig& config) {
  if (data.n() <= data.p()) throw DomainError("fit: need more observations than dimensions (n > p)");
  const SolverReport report = run_method(method, data, config);
  nlohmann::json j{{"n", data.n()}, {"p", data.p()}, {"estimate", to_json(report)}};
  if (modifier != Modifier::kNone) j["modified"] = to_json(apply_modifier(report.estimate, modifier));
  return j;
}

nlohmann::json fit_file(const std::string& path, Method method, Modifier modifier, const SolverConfig& config) {
  Dataset data(read_csv_matrix(path));
  nlohmann::json j = fit_dataset(data, method, modifier, config);
  j["input"] = path;
  return j;
}

}  // namespace cmle
