#pragma once

#include <vector>

#include "amlmc/fem.hpp"

namespace amlmc {

struct EstimatorReport {
  double eta_global = 0.0;
  std::vector<double> element_indicators;  // eta_t, one per leaf
  // Per-edge diagnostics (mesh edge numbering; in 1D one per element).
  std::vector<double> edge_indicators;
  std::vector<double> edge_residuals;
  std::vector<double> edge_energies;
  // Contact-vertex defects (obstacle case; zero elsewhere), one per vertex.
  std::vector<double> vertex_indicators;
};

struct MarkingConfig {
  double theta = 0.4;
};

/// Hierarchical estimator with the midpoint hats of the once-refined mesh.
/// For each interior edge: residual rho = l(phi) - a(u,phi), energy
/// d = a(phi,phi), defect v = rho/d (clamped so that u + v phi stays above the
/// obstacle at the midpoint), indicator sqrt(d)|v|.  Element indicators
/// collect half the squared indicators of their edges (the full indicator of
/// the element's own midpoint in 1D).  In the obstacle case each vertex in
/// contact adds the positive part of its residual against the vertex hat of
/// the refined mesh, rho/sqrt(d), shared equally by its elements.
EstimatorReport estimate_hierarchical(const ProblemSample& sample, const FeFunction& u);

/// Smallest set of elements, taken by descending indicator with ties broken
/// by index, whose squared indicators reach theta times the total.
ElementSet mark_doerfler(const EstimatorReport& report, const MarkingConfig& cfg);

}  // namespace amlmc
