#include "amlmc/experiment.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "amlmc/reference.hpp"

namespace amlmc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: '" + key + "' expects a number, got '" + v + "'");
  }
  if (pos != v.size()) throw std::invalid_argument("config: '" + key + "' expects a number, got '" + v + "'");
  return x;
}

long long to_integer(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long x;
  try {
    x = std::stoll(v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: '" + key + "' expects an integer, got '" + v + "'");
  }
  if (pos != v.size()) throw std::invalid_argument("config: '" + key + "' expects an integer, got '" + v + "'");
  return x;
}

std::string join_numbers(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_number(v[i]);
  return s;
}

}  // namespace

void ExperimentConfig::set(const std::string& key_in, const std::string& value_in) {
  const std::string key = trim(key_in), value = trim(value_in);
  if (key == "benchmark") {
    benchmark = parse_benchmark(value);
  } else if (key == "beta") {
    beta = to_double(key, value);
  } else if (key == "tol_list" || key == "tol") {
    tol_list.clear();
    for (const auto& t : split_list(value)) tol_list.push_back(to_double(key, t));
  } else if (key == "mode" || key == "modes") {
    modes.clear();
    for (const auto& m : split_list(value)) modes.push_back(parse_refinement_mode(m));
  } else if (key == "seed") {
    seed = static_cast<std::uint64_t>(to_integer(key, value));
  } else if (key == "replicas") {
    replicas = static_cast<int>(to_integer(key, value));
  } else if (key == "theta") {
    theta = to_double(key, value);
  } else if (key == "q") {
    q = to_double(key, value);
  } else if (key == "sigma_alg") {
    sigma_alg = to_double(key, value);
  } else if (key == "c_est") {
    c_est = to_double(key, value);
  } else if (key == "m_min") {
    m_min = to_integer(key, value);
  } else if (key == "allocation") {
    allocation = parse_allocation(value);
  } else if (key == "solver") {
    solver = parse_solver_mode(value);
  } else if (key == "out_dir") {
    out_dir = value;
  } else if (key == "ref_resolution") {
    ref_resolution = static_cast<int>(to_integer(key, value));
  } else if (key == "calibration_samples") {
    calibration_samples = static_cast<int>(to_integer(key, value));
  } else if (key == "max_levels") {
    max_levels = static_cast<int>(to_integer(key, value));
  } else if (key == "max_refinements") {
    max_refinements = static_cast<int>(to_integer(key, value));
  } else if (key == "dof_samples") {
    dof_samples = static_cast<int>(to_integer(key, value));
  } else if (key == "dof_levels") {
    dof_levels = static_cast<int>(to_integer(key, value));
  } else if (key == "eta1_norm") {
    eta1_norm = to_double(key, value);
  } else if (key == "point_mass") {
    if (value.empty() || value == "none") {
      point_mass.reset();
      return;
    }
    const auto parts = split_list(value);
    if (parts.size() != 2) throw std::invalid_argument("config: 'point_mass' expects y1,y2");
    point_mass = std::array<double, 2>{to_double(key, parts[0]), to_double(key, parts[1])};
  } else {
    throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

ExperimentConfig ExperimentConfig::parse(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value");
    }
    cfg.set(line.substr(0, eq), line.substr(eq + 1));
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config " + path.string());
  return parse(in);
}

void ExperimentConfig::validate() const {
  if (tol_list.empty()) throw std::invalid_argument("config: tol_list is empty");
  for (std::size_t i = 0; i < tol_list.size(); ++i) {
    if (!(tol_list[i] > 0.0)) throw std::invalid_argument("config: tolerances must be positive");
    if (i && !(tol_list[i] < tol_list[i - 1])) throw std::invalid_argument("config: tol_list must be descending");
  }
  if (modes.empty()) throw std::invalid_argument("config: no mode selected");
  if (replicas < 1) throw std::invalid_argument("config: replicas must be >= 1");
  if (benchmark == Benchmark::poisson && !(beta > 0.0)) throw std::invalid_argument("config: beta must be positive");
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("config: q outside (0,1)");
  if (!(sigma_alg > 0.0 && sigma_alg <= 1.0)) throw std::invalid_argument("config: sigma_alg outside (0,1]");
  if (theta < 0.0 || theta > 1.0) throw std::invalid_argument("config: theta outside (0,1]");
  if (m_min != 0 && m_min < 2) throw std::invalid_argument("config: m_min must be >= 2");
  if (ref_resolution < 16) throw std::invalid_argument("config: ref_resolution must be >= 16");
  if (calibration_samples < 1) throw std::invalid_argument("config: calibration_samples must be >= 1");
  if (max_levels < 1) throw std::invalid_argument("config: max_levels must be >= 1");
}

std::string ExperimentConfig::dump() const {
  std::ostringstream os;
  std::string m;
  for (std::size_t i = 0; i < modes.size(); ++i) m += (i ? "," : "") + to_string(modes[i]);
  os << "benchmark=" << to_string(benchmark) << '\n'
     << "beta=" << format_number(beta) << '\n'
     << "tol_list=" << join_numbers(tol_list) << '\n'
     << "mode=" << m << '\n'
     << "seed=" << seed << '\n'
     << "replicas=" << replicas << '\n'
     << "theta=" << format_number(effective_theta()) << '\n'
     << "q=" << format_number(q) << '\n'
     << "sigma_alg=" << format_number(sigma_alg) << '\n'
     << "c_est=" << format_number(c_est) << '\n'
     << "m_min=" << effective_m_min() << '\n'
     << "allocation=" << to_string(allocation) << '\n'
     << "solver=" << (solver == SolverMode::pgs ? "pgs" : "pgs_multigrid") << '\n'
     << "out_dir=" << out_dir << '\n'
     << "ref_resolution=" << ref_resolution << '\n'
     << "calibration_samples=" << calibration_samples << '\n'
     << "max_levels=" << max_levels << '\n'
     << "max_refinements=" << max_refinements << '\n'
     << "dof_samples=" << dof_samples << '\n'
     << "dof_levels=" << dof_levels << '\n'
     << "eta1_norm=" << format_number(eta1_norm) << '\n';
  if (point_mass) os << "point_mass=" << join_numbers({(*point_mass)[0], (*point_mass)[1]}) << '\n';
  return os.str();
}

ProblemFamily ExperimentConfig::family() const {
  ProblemFamily f = benchmark == Benchmark::poisson ? ProblemFamily::poisson(beta) : ProblemFamily::obstacle();
  f.set_point_mass(point_mass);
  return f;
}

double ExperimentConfig::effective_theta() const {
  if (theta > 0.0) return theta;
  return benchmark == Benchmark::poisson ? 0.4 : 0.2;
}

std::int64_t ExperimentConfig::effective_m_min() const {
  if (m_min > 0) return m_min;
  return benchmark == Benchmark::poisson ? 100 : 50;
}

MlmcConfig ExperimentConfig::mlmc_config(RefinementMode mode, int replica) const {
  MlmcConfig c;
  c.mode = mode;
  c.allocation = allocation;
  c.theta = effective_theta();
  c.solver.sigma_alg = sigma_alg;
  c.solver.mode = solver;
  c.m_min = effective_m_min();
  c.max_levels = max_levels;
  c.max_refinements = max_refinements;
  c.work_exponent = benchmark == Benchmark::poisson ? 2.0 : 1.0;
  c.seed = seed;
  c.replica = replica;
  return c;
}

ToleranceSchedule make_schedule(const ExperimentConfig& cfg, CalibrationResult* calibration) {
  double eta1 = cfg.eta1_norm;
  if (!(eta1 > 0.0)) {
    SolverConfig solver;
    solver.sigma_alg = cfg.sigma_alg;
    solver.mode = cfg.solver;
    CalibrationResult c = calibrate_tol1(cfg.family(), cfg.seed, cfg.calibration_samples, solver);
    eta1 = c.eta1_norm;
    if (calibration) *calibration = std::move(c);
  } else if (calibration) {
    calibration->eta1_norm = eta1;
  }
  return ToleranceSchedule::from_eta1(eta1, cfg.q, cfg.c_est);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream* log) {
  cfg.validate();
  CalibrationResult calibration;
  const ToleranceSchedule schedule = make_schedule(cfg, &calibration);
  if (log) {
    *log << "calibrated ||eta1|| = " << format_number(schedule.eta1_norm)
         << "  Tol1 = " << format_number(schedule.tol1()) << '\n';
  }
  ExperimentResult r = run_experiment(cfg, schedule, log);
  r.calibration = std::move(calibration);
  write_json(std::filesystem::path(cfg.out_dir) / "calibration.json", to_json(r.calibration));
  return r;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const ToleranceSchedule& schedule,
                                std::ostream* log) {
  cfg.validate();
  namespace fs = std::filesystem;
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir / "reports");
  {
    std::ofstream c(dir / "config.txt");
    c << cfg.dump();
  }

  ExperimentResult result;
  result.schedule = schedule;
  const ProblemFamily family = cfg.family();
  const ExpectedSolution expected(family, cfg.ref_resolution);

  std::ofstream errors(dir / "errors.csv");
  errors << "mode,tol,replica,error,cost,levels,seminorm_error,pair_cost,bias_estimate,statistical_error\n";

  for (RefinementMode mode : cfg.modes) {
    for (std::size_t k = 0; k < cfg.tol_list.size(); ++k) {
      const double tol = cfg.tol_list[k];
      for (int rep = 0; rep < cfg.replicas; ++rep) {
        const fs::path json = dir / "reports" /
                              (to_string(mode) + "_tol" + std::to_string(k) + "_rep" + std::to_string(rep) + ".json");
        MlmcReport rep_out;
        try {
          rep_out = run_mlmc(family, tol, schedule, cfg.mlmc_config(mode, rep));
        } catch (const MlmcFailure& f) {
          write_json(json, to_json(f.report()));
          errors.flush();
          throw;
        }
        RunRow row;
        row.mode = mode;
        row.tol = tol;
        row.replica = rep;
        row.error = reference_error(rep_out.estimate, expected, NormKind::full_h1);
        row.seminorm_error = reference_error(rep_out.estimate, expected, NormKind::seminorm);
        row.cost = rep_out.cost;
        row.pair_cost = rep_out.pair_cost;
        row.levels = static_cast<int>(rep_out.levels.size());
        row.bias_estimate = rep_out.bias_estimate;
        row.statistical_error = rep_out.statistical_error;
        if (!(row.error <= tol)) result.all_met = false;
        errors << to_string(mode) << ',' << format_number(tol) << ',' << rep << ',' << format_number(row.error)
               << ',' << row.cost << ',' << row.levels << ',' << format_number(row.seminorm_error) << ','
               << row.pair_cost << ',' << format_number(row.bias_estimate) << ','
               << format_number(row.statistical_error) << '\n';
        errors.flush();
        auto j = to_json(rep_out);
        j["error"] = row.error;
        j["seminorm_error"] = row.seminorm_error;
        write_json(json, j);
        if (log) {
          *log << to_string(mode) << " tol=" << tol << " replica=" << rep << " error=" << row.error
               << " cost=" << row.cost << " levels=" << row.levels << (row.error <= tol ? "" : "  EXCEEDS TOL")
               << '\n';
        }
        result.rows.push_back(row);
        result.reports.push_back(std::move(rep_out));
      }
    }
  }

  // Samples per level, averaged over replicas that used the level.
  CsvTable samples;
  samples.header = {"mode", "tol", "level", "avg_M", "avg_M_opt", "avg_N", "max_N", "avg_cost", "avg_variance", "runs"};
  CsvTable costfit;
  costfit.header = {"mode", "slope", "intercept", "points"};
  for (RefinementMode mode : cfg.modes) {
    std::vector<double> x, y;
    for (double tol : cfg.tol_list) {
      std::map<int, std::vector<const LevelSummary*>> by_level;
      double cost_sum = 0.0;
      int runs = 0;
      for (const auto& rep : result.reports) {
        if (rep.mode != mode || rep.tol != tol) continue;
        ++runs;
        cost_sum += static_cast<double>(rep.cost);
        for (const auto& l : rep.levels) by_level[l.level].push_back(&l);
      }
      if (runs == 0) continue;
      x.push_back(std::log(1.0 / tol));
      y.push_back(std::log(cost_sum / runs));
      for (const auto& [level, ls] : by_level) {
        double m = 0, mo = 0, nsum = 0, cost = 0, var = 0;
        std::size_t nmax = 0;
        for (const auto* l : ls) {
          m += static_cast<double>(l->samples);
          mo += static_cast<double>(l->optimal_samples);
          nsum += static_cast<double>(l->dof_sum);
          cost += l->average_cost;
          var += l->variance;
          nmax = std::max(nmax, l->max_dofs);
        }
        const double cnt = static_cast<double>(ls.size());
        samples.rows.push_back({to_string(mode), format_number(tol), std::to_string(level), format_number(m / cnt),
                                format_number(mo / cnt), format_number(nsum / m), std::to_string(nmax),
                                format_number(cost / cnt), format_number(var / cnt), std::to_string(ls.size())});
      }
    }
    if (x.size() >= 2) {
      const LinearFit f = fit_line(x, y);
      costfit.rows.push_back({to_string(mode), format_number(f.slope), format_number(f.intercept),
                              std::to_string(x.size())});
    }
  }
  write_csv(dir / "samples.csv", samples);
  write_csv(dir / "costfit.csv", costfit);
  return result;
}

DofScalingResult dof_scaling_study(const ProblemFamily& family, const ToleranceSchedule& schedule,
                                   RefinementMode mode, int levels, int samples, std::uint64_t seed,
                                   const PathwiseConfig& cfg) {
  if (levels < 2 || samples < 1) throw std::invalid_argument("dof study: need >= 2 levels and >= 1 sample");
  DofScalingResult r;
  r.max_dofs.assign(levels, 0);
  r.mean_dofs.assign(levels, 0.0);
  if (mode == RefinementMode::uniform) {
    UniformLevels u(family.initial_mesh());
    for (int l = 1; l <= levels; ++l) {
      r.max_dofs[l - 1] = u.level(l)->num_vertices();
      r.mean_dofs[l - 1] = static_cast<double>(r.max_dofs[l - 1]);
    }
  } else {
    std::vector<double> thresholds, tols;
    for (int l = 1; l <= levels; ++l) {
      thresholds.push_back(schedule.eta_threshold(l));
      tols.push_back(schedule.tol(l));
    }
    for (int i = 0; i < samples; ++i) {
      const SeedPath path{seed, 0, static_cast<std::uint64_t>(i), 0, StreamTag::dof_study};
      const ProblemSample sample = family.sample(path);
      const auto stops = adaptive_trajectory(sample, family.initial_mesh(), thresholds, tols, cfg);
      for (int l = 0; l < levels; ++l) {
        const std::size_t n = stops[l].solution.mesh->num_vertices();
        r.max_dofs[l] = std::max(r.max_dofs[l], n);
        r.mean_dofs[l] += static_cast<double>(n) / samples;
      }
    }
  }
  std::vector<double> x, y;
  for (int l = 1; l <= levels; ++l) {
    x.push_back(l);
    y.push_back(std::log(static_cast<double>(r.max_dofs[l - 1])));
  }
  r.fit = fit_line(x, y);
  r.expected_slope = family.dimension() * std::log(1.0 / schedule.q);
  return r;
}

void write_dof_scaling(const std::filesystem::path& dir, const DofScalingResult& r) {
  CsvTable t;
  t.header = {"level", "max_N", "mean_N"};
  for (std::size_t l = 0; l < r.max_dofs.size(); ++l) {
    t.rows.push_back({std::to_string(l + 1), std::to_string(r.max_dofs[l]), format_number(r.mean_dofs[l])});
  }
  write_csv(dir / "dofscaling.csv", t);
  CsvTable f;
  f.header = {"slope", "intercept", "expected_slope"};
  f.rows.push_back({format_number(r.fit.slope), format_number(r.fit.intercept), format_number(r.expected_slope)});
  write_csv(dir / "dofscaling_fit.csv", f);
}

}  // namespace amlmc
