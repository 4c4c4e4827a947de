#include "skillsim/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "skillsim/stats.hpp"

namespace skillsim {
namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ExperimentSummary summarize(const std::vector<std::vector<TrialRecord>>& experiments,
                            double level) {
  if (experiments.empty()) throw std::invalid_argument("summarize: no experiments");

  ExperimentSummary s;
  std::size_t shortest = std::numeric_limits<std::size_t>::max();
  for (const auto& exp : experiments) shortest = std::min(shortest, exp.size());
  s.length = static_cast<int>(shortest);
  for (const auto& exp : experiments)
    if (exp.size() != shortest) s.truncated = true;

  s.best_cost = std::numeric_limits<double>::infinity();
  for (const auto& exp : experiments)
    for (const auto& rec : exp)
      if (rec.mean_cost < s.best_cost) {
        s.best_cost = rec.mean_cost;
        s.best_physical = rec.candidate.physical;
      }

  std::vector<double> running_min(experiments.size(),
                                  std::numeric_limits<double>::infinity());
  for (std::size_t t = 0; t < shortest; ++t) {
    std::vector<double> costs;
    costs.reserve(experiments.size());
    double best_sum = 0.0;
    for (std::size_t e = 0; e < experiments.size(); ++e) {
      costs.push_back(experiments[e][t].mean_cost);
      running_min[e] = std::min(running_min[e], experiments[e][t].mean_cost);
      best_sum += running_min[e];
    }
    const ConfidenceInterval ci = mean_confidence(costs, level);
    s.mean_cost.push_back(ci.mean);
    s.ci_half.push_back(ci.defined ? ci.half_width : 0.0);
    if (t == 0) s.ci_defined = ci.defined;
    s.best_so_far.push_back(best_sum / experiments.size());
  }
  return s;
}

void write_summary_csv(const std::filesystem::path& path, const ExperimentSummary& s) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write summary: " + path.string());
  out << "trial,mean_cost,ci_lo,ci_hi,best_so_far\n";
  for (int t = 0; t < s.length; ++t) {
    out << t << ',' << fmt(s.mean_cost[t]) << ',' << fmt(s.mean_cost[t] - s.ci_half[t])
        << ',' << fmt(s.mean_cost[t] + s.ci_half[t]) << ',' << fmt(s.best_so_far[t])
        << '\n';
  }
}

std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read summary: " + path.string());
  std::vector<SummaryRow> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    SummaryRow r{};
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    ss >> r.trial >> r.mean_cost >> r.ci_lo >> r.ci_hi >> r.best_so_far;
    rows.push_back(r);
  }
  return rows;
}

void write_summary_svg(const std::filesystem::path& path, const ExperimentSummary& s,
                       const std::string& title) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write plot: " + path.string());

  constexpr double W = 640, H = 400, ML = 60, MR = 20, MT = 40, MB = 50;
  const double plot_w = W - ML - MR, plot_h = H - MT - MB;

  double ymin = std::numeric_limits<double>::infinity(), ymax = 0.0;
  for (int t = 0; t < s.length; ++t) {
    ymin = std::min({ymin, s.mean_cost[t] - s.ci_half[t], s.best_so_far[t]});
    ymax = std::max(ymax, s.mean_cost[t] + s.ci_half[t]);
  }
  if (s.length == 0) {
    ymin = 0;
    ymax = 1;
  }
  const double pad = 0.05 * (ymax - ymin + 1e-9);
  ymin -= pad;
  ymax += pad;

  auto px = [&](double t) {
    return ML + (s.length > 1 ? t / (s.length - 1) : 0.5) * plot_w;
  };
  auto py = [&](double y) { return MT + (1.0 - (y - ymin) / (ymax - ymin)) * plot_h; };

  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H
      << "' viewBox='0 0 " << W << ' ' << H << "'>\n";
  out << "<rect width='" << W << "' height='" << H << "' fill='white'/>\n";
  out << "<text x='" << W / 2 << "' y='20' font-size='15' text-anchor='middle'>" << title
      << "</text>\n";

  if (s.length > 0) {
    // Confidence band.
    out << "<polygon fill='#cccccc' stroke='none' points='";
    for (int t = 0; t < s.length; ++t)
      out << px(t) << ',' << py(s.mean_cost[t] + s.ci_half[t]) << ' ';
    for (int t = s.length - 1; t >= 0; --t)
      out << px(t) << ',' << py(s.mean_cost[t] - s.ci_half[t]) << ' ';
    out << "'/>\n";
    // Mean cost per trial.
    out << "<polyline fill='none' stroke='#1f4e9c' stroke-width='1.5' points='";
    for (int t = 0; t < s.length; ++t) out << px(t) << ',' << py(s.mean_cost[t]) << ' ';
    out << "'/>\n";
    // Best so far.
    out << "<polyline fill='none' stroke='#b03030' stroke-width='1.2' "
           "stroke-dasharray='5,3' points='";
    for (int t = 0; t < s.length; ++t) out << px(t) << ',' << py(s.best_so_far[t]) << ' ';
    out << "'/>\n";
  }

  out << "<line x1='" << ML << "' y1='" << MT + plot_h << "' x2='" << ML + plot_w
      << "' y2='" << MT + plot_h << "' stroke='black'/>\n";
  out << "<line x1='" << ML << "' y1='" << MT << "' x2='" << ML << "' y2='" << MT + plot_h
      << "' stroke='black'/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double y = ymin + k * (ymax - ymin) / 4;
    out << "<text x='" << ML - 8 << "' y='" << py(y) + 4
        << "' font-size='11' text-anchor='end'>";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", y);
    out << buf << "</text>\n";
  }
  out << "<text x='" << ML + plot_w / 2 << "' y='" << H - 12
      << "' font-size='12' text-anchor='middle'>trial</text>\n";
  out << "<text x='16' y='" << MT + plot_h / 2
      << "' font-size='12' text-anchor='middle' transform='rotate(-90 16 "
      << MT + plot_h / 2 << ")'>cost [s]</text>\n";
  out << "</svg>\n";
}

}  // namespace skillsim
