#include "amlmc/report.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace amlmc {

nlohmann::json to_json(const ToleranceSchedule& s) {
  return {{"eta1_norm", s.eta1_norm}, {"q", s.q},     {"c_est", s.c_est},
          {"tol1", s.tol1()},         {"levels", s.levels}};
}

nlohmann::json to_json(const MlmcReport& r) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& l : r.levels) {
    levels.push_back({{"level", l.level},
                      {"samples", l.samples},
                      {"optimal_samples", l.optimal_samples},
                      {"variance", l.variance},
                      {"average_cost", l.average_cost},
                      {"average_dofs", l.average_dofs},
                      {"max_dofs", l.max_dofs},
                      {"dof_sum", l.dof_sum},
                      {"average_refinement_steps", l.average_steps},
                      {"union_vertices", l.union_vertices},
                      {"level_tol", r.schedule.tol(l.level)},
                      {"eta_threshold", r.schedule.eta_threshold(l.level)},
                      {"mean_difference_norm", l.mean_norm}});
  }
  return {{"tol", r.tol},
          {"mode", to_string(r.mode)},
          {"allocation", to_string(r.allocation)},
          {"seed", r.seed},
          {"replica", r.replica},
          {"schedule", to_json(r.schedule)},
          {"levels", levels},
          {"cost", r.cost},
          {"pair_cost", r.pair_cost},
          {"bias_estimate", r.bias_estimate},
          {"bias_rate_assumed", r.schedule.q},
          {"statistical_error", r.statistical_error},
          {"estimate_vertices", r.estimate.mesh ? r.estimate.mesh->num_vertices() : 0},
          {"termination", r.termination}};
}

nlohmann::json to_json(const CalibrationResult& c, bool include_samples) {
  nlohmann::json j = {{"eta1_norm", c.eta1_norm},
                      {"standard_error", c.standard_error},
                      {"samples", c.eta.size()}};
  if (include_samples) j["eta"] = c.eta;
  return j;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw std::runtime_error("missing column '" + name + "'");
}

double CsvTable::number(std::size_t row, const std::string& name) const {
  return std::stod(rows.at(row).at(column(name)));
}

const std::string& CsvTable::text(std::size_t row, const std::string& name) const {
  return rows.at(row).at(column(name));
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) return t;
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split(line));
  }
  return t;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  emit(table.header);
  for (const auto& r : table.rows) emit(r);
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need two or more points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

}  // namespace amlmc
