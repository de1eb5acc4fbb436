#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace amlmc {

struct PlotOutcome {
  std::vector<std::filesystem::path> files;
  std::string message;
};

/// Renders SVG plots from the CSVs found in `csv_dir`: errors.svg (error
/// against 1/Tol with the Tol line), cost.svg (mean cost against 1/Tol with a
/// Tol^-2 guide and the fitted slope from costfit.csv), samples.svg and
/// dofs.svg.  Files without data rows produce no output.
PlotOutcome plot_directory(const std::filesystem::path& csv_dir, const std::filesystem::path& out_dir);

}  // namespace amlmc
