#pragma once

#include <filesystem>

#include "skillsim/experiment.hpp"

namespace skillsim {

/// Per-trial-index statistics across repeated experiments. Ragged experiment
/// lengths (early stalls) are truncated to the shortest run.
struct ExperimentSummary {
  int length = 0;
  bool truncated = false;
  bool ci_defined = false;  // false when only one experiment was summarized
  std::vector<double> mean_cost;    // across experiments, per trial index
  std::vector<double> ci_half;      // 90% half-widths
  std::vector<double> best_so_far;  // mean of the per-experiment running minima
  Eigen::VectorXd best_physical;    // lowest-cost candidate overall
  double best_cost = 0.0;
};

ExperimentSummary summarize(const std::vector<std::vector<TrialRecord>>& experiments,
                            double level = 0.90);

/// CSV with columns trial, mean_cost, ci_lo, ci_hi, best_so_far.
void write_summary_csv(const std::filesystem::path& path, const ExperimentSummary& summary);

struct SummaryRow {
  int trial;
  double mean_cost, ci_lo, ci_hi, best_so_far;
};
std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path);

/// Self-contained line plot: mean execution cost per trial with the shaded
/// confidence band.
void write_summary_svg(const std::filesystem::path& path, const ExperimentSummary& summary,
                       const std::string& title);

}  // namespace skillsim
