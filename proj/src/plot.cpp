#include "amlmc/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "amlmc/report.hpp"

namespace amlmc {

namespace {

struct Series {
  std::string label;
  std::vector<double> x, y;
  bool dotted = false;
  bool markers = true;
  bool line = true;
};

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

// Log-log (or log-y) chart with automatic decade ticks.
void write_chart(const std::filesystem::path& path, const std::string& title, const std::string& xlabel,
                 const std::string& ylabel, const std::vector<Series>& series, bool logx,
                 const std::string& note = {}) {
  const double W = 640, H = 440, left = 80, right = 180, top = 40, bottom = 60;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  auto tx = [&](double v) { return logx ? std::log10(v) : v; };
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.y[i] > 0.0) || (logx && !(s.x[i] > 0.0))) continue;
      xmin = std::min(xmin, tx(s.x[i]));
      xmax = std::max(xmax, tx(s.x[i]));
      ymin = std::min(ymin, std::log10(s.y[i]));
      ymax = std::max(ymax, std::log10(s.y[i]));
    }
  }
  if (xmin > xmax) return;
  if (xmax - xmin < 1e-9) xmin -= 0.5, xmax += 0.5;
  ymin = std::floor(ymin);
  ymax = std::ceil(ymax);
  if (ymax - ymin < 1) ymax = ymin + 1;
  const double pw = W - left - right, ph = H - top - bottom;
  auto px = [&](double v) { return left + (tx(v) - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double v) { return top + (ymax - std::log10(v)) / (ymax - ymin) * ph; };

  std::ofstream out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << left + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title
      << "</text>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int d = static_cast<int>(ymin); d <= static_cast<int>(ymax); ++d) {
    const double y = top + (ymax - d) / (ymax - ymin) * ph;
    out << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << y << "\" y2=\"" << y
        << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << left - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">1e" << d << "</text>\n";
  }
  if (logx) {
    for (int d = static_cast<int>(std::floor(xmin)); d <= static_cast<int>(std::ceil(xmax)); ++d) {
      for (int m = 1; m < 10; ++m) {
        const double v = std::log10(m) + d;
        if (v < xmin - 1e-9 || v > xmax + 1e-9) continue;
        const double x = left + (v - xmin) / (xmax - xmin) * pw;
        out << "<line x1=\"" << x << "\" x2=\"" << x << "\" y1=\"" << top + ph << "\" y2=\"" << top + ph + 4
            << "\" stroke=\"black\"/>\n";
        if (m == 1 || m == 2 || m == 5) {
          std::ostringstream lab;
          lab << m * std::pow(10.0, d);
          out << "<text x=\"" << x << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << lab.str()
              << "</text>\n";
        }
      }
    }
  } else {
    for (int v = static_cast<int>(std::ceil(xmin)); v <= static_cast<int>(std::floor(xmax)); ++v) {
      const double x = left + (v - xmin) / (xmax - xmin) * pw;
      out << "<text x=\"" << x << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << v << "</text>\n";
    }
  }
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">" << xlabel
      << "</text>\n";
  out << "<text transform=\"translate(18," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">" << ylabel
      << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = s.dotted ? "black" : kColors[k % 8];
    if (s.line) {
      out << "<polyline fill=\"none\" stroke=\"" << color << "\"" << (s.dotted ? " stroke-dasharray=\"3,3\"" : "")
          << " points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (s.y[i] > 0.0) out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
      }
      out << "\"/>\n";
    }
    if (s.markers) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (s.y[i] > 0.0) {
          out << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"3\" fill=\"" << color
              << "\"/>\n";
        }
      }
    }
    const double ly = top + 14 + 18 * k;
    out << "<line x1=\"" << left + pw + 10 << "\" x2=\"" << left + pw + 30 << "\" y1=\"" << ly - 4 << "\" y2=\""
        << ly - 4 << "\" stroke=\"" << color << "\"" << (s.dotted ? " stroke-dasharray=\"3,3\"" : "") << "/>\n";
    out << "<text x=\"" << left + pw + 35 << "\" y=\"" << ly << "\">" << s.label << "</text>\n";
  }
  if (!note.empty()) {
    out << "<text x=\"" << left + 8 << "\" y=\"" << top + ph - 8 << "\">" << note << "</text>\n";
  }
  out << "</svg>\n";
}

bool has_rows(const std::filesystem::path& p) {
  if (!std::filesystem::exists(p)) return false;
  return !read_csv(p).rows.empty();
}

}  // namespace

PlotOutcome plot_directory(const std::filesystem::path& csv_dir, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  PlotOutcome outcome;
  fs::create_directories(out_dir);

  const fs::path errors_csv = csv_dir / "errors.csv";
  if (has_rows(errors_csv)) {
    const CsvTable t = read_csv(errors_csv);
    std::map<std::string, Series> points;
    std::map<std::string, std::map<double, std::pair<double, int>>> mean_cost;
    std::vector<double> tols;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const std::string mode = t.text(i, "mode");
      const double tol = t.number(i, "tol");
      auto& s = points[mode];
      s.label = mode;
      s.x.push_back(1.0 / tol);
      s.y.push_back(t.number(i, "error"));
      auto& c = mean_cost[mode][tol];
      c.first += t.number(i, "cost");
      c.second += 1;
      if (std::find(tols.begin(), tols.end(), tol) == tols.end()) tols.push_back(tol);
    }
    std::sort(tols.begin(), tols.end());
    std::vector<Series> es;
    for (auto& [mode, s] : points) {
      // Replica errors drawn as markers, joined through per-Tol means.
      std::map<double, std::pair<double, int>> avg;
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        avg[s.x[i]].first += s.y[i];
        avg[s.x[i]].second += 1;
      }
      Series m;
      m.label = mode + " (mean)";
      for (auto& [x, p] : avg) {
        m.x.push_back(x);
        m.y.push_back(p.first / p.second);
      }
      es.push_back(m);
      Series pts = s;
      pts.label = mode + " (replicas)";
      pts.line = false;
      es.push_back(pts);
    }
    Series guide;
    guide.label = "Tol";
    guide.dotted = true;
    guide.markers = false;
    for (auto it = tols.rbegin(); it != tols.rend(); ++it) {
      guide.x.push_back(1.0 / *it);
      guide.y.push_back(*it);
    }
    es.push_back(guide);
    const fs::path ep = out_dir / "errors.svg";
    write_chart(ep, "Error against required accuracy", "1/Tol", "H1 error", es, true);
    outcome.files.push_back(ep);

    std::map<std::string, std::string> slopes;
    const fs::path fit_csv = csv_dir / "costfit.csv";
    if (has_rows(fit_csv)) {
      const CsvTable f = read_csv(fit_csv);
      for (std::size_t i = 0; i < f.rows.size(); ++i) slopes[f.text(i, "mode")] = f.text(i, "slope");
    }
    std::vector<Series> cs;
    double anchor_x = 0, anchor_y = 0;
    for (auto& [mode, m] : mean_cost) {
      Series s;
      s.label = mode;
      if (slopes.count(mode)) s.label += " slope " + slopes[mode].substr(0, 6);
      for (auto it = m.rbegin(); it != m.rend(); ++it) {
        s.x.push_back(1.0 / it->first);
        s.y.push_back(it->second.first / it->second.second);
      }
      if (anchor_x == 0 && !s.x.empty()) anchor_x = s.x.front(), anchor_y = s.y.front();
      cs.push_back(s);
    }
    Series g;
    g.label = "Tol^-2";
    g.dotted = true;
    g.markers = false;
    for (auto it = tols.rbegin(); it != tols.rend(); ++it) {
      const double x = 1.0 / *it;
      g.x.push_back(x);
      g.y.push_back(anchor_y * (x / anchor_x) * (x / anchor_x));
    }
    cs.push_back(g);
    const fs::path cp = out_dir / "cost.svg";
    write_chart(cp, "Average cost against required accuracy", "1/Tol", "cost", cs, true);
    outcome.files.push_back(cp);
  }

  const fs::path samples_csv = csv_dir / "samples.csv";
  if (has_rows(samples_csv)) {
    const CsvTable t = read_csv(samples_csv);
    std::map<std::string, Series> by;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const std::string key = t.text(i, "mode") + " Tol=" + t.text(i, "tol");
      by[key].label = key;
      by[key].x.push_back(t.number(i, "level"));
      by[key].y.push_back(t.number(i, "avg_M_opt"));
    }
    std::vector<Series> ss;
    for (auto& [k, s] : by) ss.push_back(s);
    const fs::path sp = out_dir / "samples.svg";
    write_chart(sp, "Average optimal samples per level", "level", "M_l", ss, false);
    outcome.files.push_back(sp);
  }

  const fs::path dof_csv = csv_dir / "dofscaling.csv";
  if (has_rows(dof_csv)) {
    const CsvTable t = read_csv(dof_csv);
    Series s;
    s.label = "max N";
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      s.x.push_back(t.number(i, "level"));
      s.y.push_back(t.number(i, "max_N"));
    }
    std::string note;
    const fs::path fit_csv = csv_dir / "dofscaling_fit.csv";
    if (has_rows(fit_csv)) {
      const CsvTable f = read_csv(fit_csv);
      note = "fitted slope " + f.text(0, "slope") + ", expected " + f.text(0, "expected_slope");
    }
    const fs::path dp = out_dir / "dofs.svg";
    write_chart(dp, "Unknowns reaching the level accuracy", "level", "N_max", {s}, false, note);
    outcome.files.push_back(dp);
  }

  outcome.message = outcome.files.empty() ? "no data rows found in " + csv_dir.string() + "; nothing plotted"
                                          : "wrote " + std::to_string(outcome.files.size()) + " plot(s)";
  return outcome;
}

}  // namespace amlmc
