#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "amlmc/mlmc.hpp"

namespace amlmc {

nlohmann::json to_json(const ToleranceSchedule& s);
nlohmann::json to_json(const MlmcReport& r);
nlohmann::json to_json(const CalibrationResult& c, bool include_samples = false);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// Formats a double with 17 significant digits (round-trip exact).
std::string format_number(double v);

/// Minimal CSV table: header plus rows of string cells, no quoting (none of
/// the emitted fields contain commas).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a column; throws std::runtime_error naming the column when absent.
  std::size_t column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
  const std::string& text(std::size_t row, const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// Least-squares line y = intercept + slope x.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace amlmc
