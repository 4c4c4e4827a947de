#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "skillsim/experiment.hpp"
#include "skillsim/report.hpp"

namespace fs = std::filesystem;
using skillsim::ExperimentConfig;

namespace {

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> cli_seed,
            const std::string& out_override) {
  ExperimentConfig cfg = skillsim::load_config(config_path);
  if (cli_seed) {
    cfg.seed = *cli_seed;
  } else if (const char* env = std::getenv("SKILLSIM_SEED")) {
    cfg.seed = std::strtoull(env, nullptr, 10);
  }
  if (!out_override.empty()) cfg.out_dir = out_override;

  std::cout << "scenario=" << skillsim::to_string(cfg.scenario)
            << " learner=" << cfg.learner.kind << " budget=" << cfg.budget
            << " repetitions=" << cfg.repetitions << " seed=" << cfg.seed << '\n';

  bool any_stall = false;
  for (int rep = 0; rep < cfg.repetitions; ++rep) {
    const fs::path file =
        fs::path(cfg.out_dir) / ("experiment_" + std::to_string(rep) + ".jsonl");
    const auto outcome = skillsim::run_experiment(cfg, rep, file);
    double best = std::numeric_limits<double>::infinity();
    int successes = 0;
    for (const auto& r : outcome.records) {
      best = std::min(best, r.mean_cost);
      if (r.success) ++successes;
    }
    std::cout << "experiment " << rep << ": trials=" << outcome.records.size()
              << " best_mean_cost=" << best << " full_success_trials=" << successes
              << (outcome.stalled ? " (stalled early)" : "") << '\n';
    any_stall |= outcome.stalled;
  }
  if (any_stall) std::cout << "note: at least one experiment ended before its budget\n";
  return 0;
}

int cmd_report(const std::string& in_dir, const std::string& format) {
  std::vector<std::vector<skillsim::TrialRecord>> experiments;
  for (int rep = 0;; ++rep) {
    const fs::path file = fs::path(in_dir) / ("experiment_" + std::to_string(rep) + ".jsonl");
    if (!fs::exists(file)) break;
    experiments.push_back(skillsim::load_records(file));
  }
  if (experiments.empty()) {
    std::cerr << "no experiment_<n>.jsonl files in " << in_dir << '\n';
    return 1;
  }
  const auto summary = skillsim::summarize(experiments);
  if (summary.truncated)
    std::cout << "warning: ragged experiment lengths, truncated to " << summary.length
              << " trials\n";
  if (format == "csv" || format == "both") {
    const fs::path p = fs::path(in_dir) / "summary.csv";
    skillsim::write_summary_csv(p, summary);
    std::cout << "wrote " << p.string() << '\n';
  }
  if (format == "svg" || format == "both") {
    const fs::path p = fs::path(in_dir) / "summary.svg";
    skillsim::write_summary_svg(p, summary, fs::path(in_dir).filename().string());
    std::cout << "wrote " << p.string() << '\n';
  }
  std::cout << "experiments=" << experiments.size() << " trials=" << summary.length
            << " best_cost=" << summary.best_cost << '\n';
  return 0;
}

int cmd_replay(const std::string& record_file, int trial, const std::string& out_dir) {
  std::ifstream in(record_file);
  if (!in) {
    std::cerr << "cannot open " << record_file << '\n';
    return 1;
  }
  std::string header;
  std::getline(in, header);
  const auto h = nlohmann::json::parse(header);
  if (h.value("type", "") != "header") {
    std::cerr << "missing header line in " << record_file << '\n';
    return 1;
  }
  const fs::path tmp = fs::temp_directory_path() / "skillsim_replay_config.json";
  {
    std::ofstream cfg_out(tmp);
    cfg_out << h.at("config").dump();
  }
  const ExperimentConfig cfg = skillsim::load_config(tmp);

  const auto records = skillsim::load_records(record_file);
  if (trial < 0 || trial >= static_cast<int>(records.size())) {
    std::cerr << "trial index out of range (file has " << records.size() << " records)\n";
    return 1;
  }
  const auto& rec = records[trial];

  const auto scenario = cfg.make_scenario_spec();
  const auto base = skillsim::PegInHoleParams::for_scenario(scenario);
  const skillsim::ParamDomain domain(
      skillsim::build_peg_in_hole(base).learned_params);
  const auto applied = skillsim::apply_candidate(rec.candidate, domain, base);
  const auto perturbations = skillsim::trial_perturbations(scenario.kind);

  fs::create_directories(out_dir);
  for (std::size_t j = 0; j < perturbations.size(); ++j) {
    skillsim::Rng rng = skillsim::make_rng(rec.seed, j + 1);
    const fs::path trace = fs::path(out_dir) / ("trial" + std::to_string(trial) + "_run" +
                                                std::to_string(j) + ".csv");
    const auto run = skillsim::run_single(cfg, scenario, applied, perturbations[j], rng, &trace);
    std::cout << "run " << j << ": cost=" << run.metric.cost
              << " recorded=" << rec.costs[j]
              << (std::abs(run.metric.cost - rec.costs[j]) < 1e-9 ? " (match)"
                                                                  : " (MISMATCH)")
              << " trace=" << trace.string() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Force-sensitive manipulation skill learning testbed"};
  app.require_subcommand(1);

  std::string config_path, out_dir, in_dir, format = "both", record_file;
  std::optional<std::uint64_t> seed;
  int trial = 0;

  auto* run = app.add_subcommand("run", "run the configured experiments");
  run->add_option("--config", config_path, "experiment config file")->required();
  run->add_option("--seed", seed, "override the config seed");
  run->add_option("--out", out_dir, "override the output directory");

  auto* report = app.add_subcommand("report", "summarize recorded experiments");
  report->add_option("--in", in_dir, "directory with experiment_<n>.jsonl files")->required();
  report->add_option("--format", format, "csv | svg | both")
      ->check(CLI::IsMember({"csv", "svg", "both"}));

  auto* replay = app.add_subcommand("replay", "re-simulate one recorded trial");
  replay->add_option("--record", record_file, "results file (jsonl)")->required();
  replay->add_option("--trial", trial, "trial index");
  replay->add_option("--out", out_dir, "trace output directory")->default_val("replay");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, seed, out_dir);
    if (report->parsed()) return cmd_report(in_dir, format);
    if (replay->parsed()) return cmd_replay(record_file, trial, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
