#include "amlmc/mlmc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace amlmc {

std::string to_string(RefinementMode m) { return m == RefinementMode::uniform ? "uniform" : "adaptive"; }

RefinementMode parse_refinement_mode(const std::string& name) {
  if (name == "uniform") return RefinementMode::uniform;
  if (name == "adaptive") return RefinementMode::adaptive;
  throw std::invalid_argument("unknown mode '" + name + "'");
}

std::string to_string(Allocation a) { return a == Allocation::giles ? "giles" : "theoretical"; }

Allocation parse_allocation(const std::string& name) {
  if (name == "giles") return Allocation::giles;
  if (name == "theoretical") return Allocation::theoretical;
  throw std::invalid_argument("unknown allocation '" + name + "'");
}

// ---------------------------------------------------------------------------
// Tolerances and calibration

ToleranceSchedule ToleranceSchedule::from_eta1(double eta1_norm, double q, double c_est) {
  if (!(eta1_norm > 0.0)) throw std::invalid_argument("schedule: eta1 norm must be positive");
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("schedule: q outside (0,1)");
  ToleranceSchedule s;
  s.eta1_norm = eta1_norm;
  s.q = q;
  s.c_est = c_est;
  return s;
}

double ToleranceSchedule::tol1() const { return 2.0 * std::sqrt(2.0) * c_est * eta1_norm; }

double ToleranceSchedule::tol(int level) const { return tol1() * std::pow(q, level - 1); }

double ToleranceSchedule::eta_threshold(int level) const { return eta1_norm * std::pow(q, level - 1); }

int ToleranceSchedule::levels_for(double target) const {
  int L = 1;
  while (tol(L) > target * (1.0 + 1e-12) && L < 200) ++L;
  return L;
}

CalibrationResult calibrate_tol1(const ProblemFamily& family, std::uint64_t seed, int n_samples,
                                 const SolverConfig& solver, double solver_tol) {
  if (n_samples < 1) throw std::invalid_argument("calibrate: need at least one sample");
  CalibrationResult out;
  const MeshPtr mesh = family.initial_mesh();
  double sum = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    const SeedPath path{seed, 1, static_cast<std::uint64_t>(i), 0, StreamTag::calibration};
    const ProblemSample sample = family.sample(path);
    const DiscreteSystem sys = assemble(sample, mesh);
    const SolveResult res = solve(sys, FeFunction::zero(mesh), solver_tol, solver);
    if (!res.converged) throw PathwiseFailure("calibrate: solver did not converge on T^(1)");
    const double eta = estimate_hierarchical(sample, res.solution).eta_global;
    out.eta.push_back(eta);
    sum += eta * eta;
  }
  const double n = n_samples;
  const double mean = sum / n;
  out.eta1_norm = std::sqrt(mean);
  if (n_samples > 1 && out.eta1_norm > 0.0) {
    double dev = 0.0;
    for (double e : out.eta) dev += (e * e - mean) * (e * e - mean);
    out.standard_error = std::sqrt(dev / (n - 1.0) / n) / (2.0 * out.eta1_norm);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pathwise solves

std::vector<AdaptiveStop> adaptive_trajectory(const ProblemSample& sample, const MeshPtr& initial,
                                              const std::vector<double>& thresholds,
                                              const std::vector<double>& solver_tols,
                                              const PathwiseConfig& cfg) {
  if (thresholds.size() != solver_tols.size() || thresholds.empty()) {
    throw std::invalid_argument("adaptive trajectory: thresholds and solver tolerances mismatch");
  }
  std::vector<AdaptiveStop> stops;
  MeshPtr mesh = initial;
  FeFunction guess = FeFunction::zero(mesh);
  for (int step = 0;; ++step) {
    const DiscreteSystem sys = assemble(sample, mesh);
    SolveResult res = solve(sys, guess, solver_tols[stops.size()], cfg.solver);
    if (!res.converged) {
      throw PathwiseFailure("pathwise solve: solver hit " + std::to_string(res.iterations) +
                            " iterations on " + std::to_string(mesh->num_vertices()) + " vertices");
    }
    const EstimatorReport est = estimate_hierarchical(sample, res.solution);
    while (stops.size() < thresholds.size() && est.eta_global <= thresholds[stops.size()]) {
      stops.push_back({res.solution, est.eta_global, step});
    }
    if (stops.size() == thresholds.size()) break;
    if (step >= cfg.max_refinements) {
      throw PathwiseFailure("pathwise solve: no convergence after " + std::to_string(step) +
                            " refinements (eta " + std::to_string(est.eta_global) + ")");
    }
    const ElementSet marked = mark_doerfler(est, MarkingConfig{cfg.theta});
    mesh = refine_marked(mesh, marked);
    guess = prolong(res.solution, mesh);
  }
  return stops;
}

const MeshPtr& UniformLevels::level(int l) {
  if (l < 1) throw std::invalid_argument("uniform levels: level must be >= 1");
  while (static_cast<int>(meshes_.size()) < l) meshes_.push_back(refine_uniform(meshes_.back(), 1));
  return meshes_[l - 1];
}

FeFunction PathwiseResult::difference() const {
  if (!coarse) return fine;
  FeFunction c = prolong(*coarse, fine.mesh);
  return {fine.mesh, fine.values - c.values};
}

PathwiseResult pathwise_solve(const ProblemFamily& family, const SeedPath& seed,
                              const ToleranceSchedule& schedule, const PathwiseConfig& cfg,
                              UniformLevels* uniform) {
  const int l = seed.level;
  if (l < 1) throw std::invalid_argument("pathwise solve: level must be >= 1");
  const ProblemSample sample = family.sample(seed);
  PathwiseResult out;
  out.level = l;
  out.sample = seed.sample;
  // One trajectory through the criteria of levels 1..l, each stretch solved
  // at its own level tolerance.  The coarse member is then bitwise the fine
  // member of level l-1, so the level differences telescope exactly.
  if (cfg.mode == RefinementMode::adaptive) {
    std::vector<double> thresholds, tols;
    for (int k = 1; k <= l; ++k) {
      thresholds.push_back(schedule.eta_threshold(k));
      tols.push_back(schedule.tol(k));
    }
    auto stops = adaptive_trajectory(sample, family.initial_mesh(), thresholds, tols, cfg);
    out.fine = std::move(stops.back().solution);
    out.steps = stops.back().steps;
    out.eta = stops.back().eta;
    if (l > 1) out.coarse = std::move(stops[l - 2].solution);
  } else {
    UniformLevels local(family.initial_mesh());
    UniformLevels& levels = uniform ? *uniform : local;
    FeFunction guess = FeFunction::zero(levels.level(1));
    for (int k = 1; k <= l; ++k) {
      if (k > 1) guess = prolong(guess, levels.level(k));
      SolveResult res = solve(assemble(sample, levels.level(k)), guess, schedule.tol(k), cfg.solver);
      if (!res.converged) throw PathwiseFailure("pathwise solve: uniform solve did not converge");
      if (k == l - 1) out.coarse = res.solution;
      guess = std::move(res.solution);
    }
    out.fine = std::move(guess);
  }
  out.fine_dofs = out.fine.mesh->num_vertices();
  out.coarse_dofs = out.coarse ? out.coarse->mesh->num_vertices() : 0;
  return out;
}

// ---------------------------------------------------------------------------
// Estimators

FeFunction add_functions(const FeFunction& a, const FeFunction& b, double scale_b) {
  const MeshPtr u = union_mesh(a.mesh, b.mesh);
  const FeFunction pa = prolong(a, u);
  const FeFunction pb = prolong(b, u);
  return {u, pa.values + scale_b * pb.values};
}

FeFunction mc_mean(const std::vector<FeFunction>& samples) {
  if (samples.empty()) throw std::invalid_argument("mc_mean: no samples");
  FeFunction sum = samples.front();
  for (std::size_t i = 1; i < samples.size(); ++i) sum = add_functions(sum, samples[i]);
  sum.values /= static_cast<double>(samples.size());
  return sum;
}

double variance_estimate(const std::vector<FeFunction>& samples, const FeFunction& mean) {
  if (samples.size() < 2) throw std::invalid_argument("variance_estimate: need at least two samples");
  double sum = 0.0;
  for (const auto& v : samples) {
    const FeFunction d = add_functions(v, mean, -1.0);
    sum += seminorm_squared(*d.mesh, d.values);
  }
  return sum / static_cast<double>(samples.size() - 1);
}

void LevelStats::add(const PathwiseResult& r) {
  add_difference(r.difference(), r.cost(), r.fine_dofs, r.steps);
}

void LevelStats::add_difference(const FeFunction& v, std::size_t cost, std::size_t fine_dofs, int steps) {
  if (samples_ == 0) {
    sum_ = v;
  } else {
    sum_ = add_functions(sum_, v);
  }
  ++samples_;
  sum_sq_ += seminorm_squared(*v.mesh, v.values);
  cost_sum_ += cost;
  fine_dof_sum_ += fine_dofs;
  max_fine_dofs_ = std::max(max_fine_dofs_, fine_dofs);
  steps_sum_ += static_cast<std::uint64_t>(steps);
}

FeFunction LevelStats::mean() const {
  if (samples_ == 0) throw std::logic_error("level stats: no samples");
  return {sum_.mesh, sum_.values / static_cast<double>(samples_)};
}

double LevelStats::variance() const {
  if (samples_ < 2) throw std::invalid_argument("level stats: variance needs two samples");
  const double m = static_cast<double>(samples_);
  const double s2 = seminorm_squared(*sum_.mesh, sum_.values);
  return std::max(0.0, (sum_sq_ - s2 / m) / (m - 1.0));
}

double LevelStats::average_cost() const {
  return samples_ ? static_cast<double>(cost_sum_) / static_cast<double>(samples_) : 0.0;
}

double LevelStats::average_fine_dofs() const {
  return samples_ ? static_cast<double>(fine_dof_sum_) / static_cast<double>(samples_) : 0.0;
}

double LevelStats::average_steps() const {
  return samples_ ? static_cast<double>(steps_sum_) / static_cast<double>(samples_) : 0.0;
}

// ---------------------------------------------------------------------------
// Allocation

namespace {

// Smallest integer >= x, forgiving a few ulps so that bounds which are
// integers in exact arithmetic do not round up to the next one.
std::int64_t ceil_count(double x) {
  return static_cast<std::int64_t>(std::ceil(x * (1.0 - 1e-12)));
}

}  // namespace

std::vector<std::int64_t> allocate_theoretical(const ToleranceSchedule& schedule, double s, double vu) {
  if (!(s > 0.0) || vu < 0.0 || schedule.levels < 1) {
    throw std::invalid_argument("allocate_theoretical: need s > 0, V[u] >= 0, L >= 1");
  }
  const int L = schedule.levels;
  const double q = schedule.q;
  const double tol1 = schedule.tol1();
  const double tol = schedule.tol(L);
  std::vector<std::int64_t> m(L);
  m[0] = ceil_count(12.0 * (0.25 * tol1 * tol1 + vu) / (tol * tol));
  const double base = 2.0 * (1.0 + 1.0 / q) * (1.0 + 1.0 / q);
  for (int l = 2; l <= L; ++l) {
    double bound;
    if (s < 2.0) {
      const double c1 = base / (1.0 - std::pow(q, (2.0 - s) / 2.0));
      bound = c1 * std::pow(q, (s + 2.0) / 2.0 * (l - 1) + 2.0 * (1 - L));
    } else if (s == 2.0) {
      bound = base * L * std::pow(q, 2.0 * (l - L));
    } else {
      const double c3 = base / (1.0 - std::pow(q, (s - 2.0) / 2.0));
      bound = c3 * std::pow(q, (s + 2.0) / 2.0 * (l - L));
    }
    m[l - 1] = ceil_count(bound);
  }
  return m;
}

std::vector<std::int64_t> allocate_giles(const std::vector<double>& variance, const std::vector<double>& cost,
                                         double tol, std::int64_t m_min) {
  if (variance.size() != cost.size()) throw std::invalid_argument("allocate_giles: size mismatch");
  double agg = 0.0;
  for (std::size_t l = 0; l < variance.size(); ++l) {
    if (variance[l] < 0.0 || !(cost[l] > 0.0)) throw std::invalid_argument("allocate_giles: need V >= 0, C > 0");
    agg += std::sqrt(variance[l] * cost[l]);
  }
  std::vector<std::int64_t> m(variance.size());
  for (std::size_t l = 0; l < variance.size(); ++l) {
    const double opt = 2.0 / (tol * tol) * std::sqrt(variance[l] / cost[l]) * agg;
    m[l] = std::max<std::int64_t>(m_min, ceil_count(opt));
  }
  return m;
}

// ---------------------------------------------------------------------------
// Driver

namespace {

struct Driver {
  const ProblemFamily& family;
  const MlmcConfig& cfg;
  ToleranceSchedule schedule;
  PathwiseConfig pcfg;
  UniformLevels uniform;
  std::vector<LevelStats> stats;
  std::vector<std::int64_t> optimal;

  Driver(const ProblemFamily& f, const MlmcConfig& c, const ToleranceSchedule& s)
      : family(f), cfg(c), schedule(s), uniform(f.initial_mesh()) {
    pcfg.mode = c.mode;
    pcfg.theta = c.theta;
    pcfg.solver = c.solver;
    pcfg.max_refinements = c.max_refinements;
  }

  void activate(int L) {
    while (static_cast<int>(stats.size()) < L) {
      stats.emplace_back(static_cast<int>(stats.size()) + 1);
      optimal.push_back(0);
    }
  }

  void extend(int l, std::int64_t target) {
    LevelStats& st = stats[l - 1];
    for (auto i = static_cast<std::int64_t>(st.samples()); i < target; ++i) {
      const SeedPath path{cfg.seed, l, static_cast<std::uint64_t>(i), cfg.replica, StreamTag::production};
      st.add(pathwise_solve(family, path, schedule, pcfg, &uniform));
    }
  }

  double bias() const {
    const FeFunction m = stats.back().mean();
    return std::sqrt(seminorm_squared(*m.mesh, m.values)) / (1.0 / schedule.q - 1.0);
  }

  MlmcReport report(double tol, const std::string& termination) const {
    MlmcReport rep;
    rep.schedule = schedule;
    rep.schedule.levels = static_cast<int>(stats.size());
    rep.tol = tol;
    rep.termination = termination;
    rep.mode = cfg.mode;
    rep.allocation = cfg.allocation;
    rep.seed = cfg.seed;
    rep.replica = cfg.replica;
    double stat = 0.0;
    for (std::size_t k = 0; k < stats.size(); ++k) {
      const LevelStats& st = stats[k];
      if (st.samples() == 0) continue;
      LevelSummary s;
      s.level = st.level();
      s.samples = static_cast<std::int64_t>(st.samples());
      s.optimal_samples = optimal[k];
      s.variance = st.samples() >= 2 ? st.variance() : 0.0;
      s.average_cost = st.average_cost();
      s.average_dofs = st.average_fine_dofs();
      s.max_dofs = st.max_fine_dofs();
      s.dof_sum = st.fine_dof_sum();
      s.average_steps = st.average_steps();
      s.union_vertices = st.union_mesh()->num_vertices();
      const FeFunction m = st.mean();
      s.mean_norm = std::sqrt(seminorm_squared(*m.mesh, m.values));
      rep.levels.push_back(s);
      rep.cost += st.fine_dof_sum();
      rep.pair_cost += st.cost_sum();
      stat += s.variance / static_cast<double>(s.samples);
      rep.estimate = rep.estimate.mesh ? add_functions(rep.estimate, m) : m;
    }
    rep.statistical_error = std::sqrt(stat);
    if (!stats.empty() && stats.back().samples() > 0) rep.bias_estimate = bias();
    return rep;
  }
};

}  // namespace

MlmcReport run_mlmc(const ProblemFamily& family, double tol, const ToleranceSchedule& schedule,
                    const MlmcConfig& cfg) {
  if (!(tol > 0.0)) throw std::invalid_argument("run_mlmc: tolerance must be positive");
  if (cfg.m_min < 2) throw std::invalid_argument("run_mlmc: m_min must be at least 2");
  if (cfg.max_levels < 1) throw std::invalid_argument("run_mlmc: max_levels must be positive");
  Driver d(family, cfg, schedule);

  if (cfg.allocation == Allocation::theoretical) {
    const int L = std::min(schedule.levels_for(tol), cfg.max_levels);
    d.activate(1);
    d.extend(1, cfg.m_min);
    ToleranceSchedule s = schedule;
    s.levels = L;
    const auto m = allocate_theoretical(s, cfg.work_exponent, d.stats[0].variance());
    d.activate(L);
    for (int l = 1; l <= L; ++l) {
      d.optimal[l - 1] = m[l - 1];
      d.extend(l, m[l - 1]);
    }
    return d.report(tol, "theoretical allocation");
  }

  int L = std::clamp(cfg.initial_levels, 1, cfg.max_levels);
  d.activate(L);
  std::vector<std::int64_t> target(L, cfg.m_min);
  const double bias_limit = tol / std::sqrt(2.0);
  for (;;) {
    for (int l = 1; l <= L; ++l) d.extend(l, target[l - 1]);
    std::vector<double> v(L), c(L);
    for (int l = 1; l <= L; ++l) {
      v[l - 1] = d.stats[l - 1].variance();
      c[l - 1] = d.stats[l - 1].average_cost();
    }
    const auto opt = allocate_giles(v, c, tol, 0);
    bool more = false;
    for (int l = 1; l <= L; ++l) {
      d.optimal[l - 1] = opt[l - 1];
      const auto have = static_cast<std::int64_t>(d.stats[l - 1].samples());
      target[l - 1] = std::max(have, opt[l - 1]);
      more = more || target[l - 1] > have;
    }
    if (more) continue;
    if (d.bias() <= bias_limit) return d.report(tol, "converged");
    if (L >= cfg.max_levels) {
      throw MlmcFailure("run_mlmc: level cap reached without bias convergence",
                        d.report(tol, "level cap reached"));
    }
    ++L;
    d.activate(L);
    target.push_back(cfg.m_min);
  }
}

}  // namespace amlmc
