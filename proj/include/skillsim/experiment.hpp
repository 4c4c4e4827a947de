#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "skillsim/controller.hpp"
#include "skillsim/param_domain.hpp"
#include "skillsim/peg_in_hole.hpp"
#include "skillsim/plant.hpp"

namespace skillsim {

struct LearnerConfig {
  std::string kind = "cma-es";  // lhs | cma-es | pso | bo
  int lambda = 5;               // cma-es population
  double sigma0 = 0.1;          // cma-es initial step size (unit cube)
  int particles = 25;           // pso swarm size
  double c1 = 2.0, c2 = 2.0;    // pso acceleration constants
  int init_samples = 5;         // bo initial design size
};

struct ExperimentConfig {
  ScenarioKind scenario = ScenarioKind::peg;
  Pose hole_pose;  // true hole frame in world coordinates
  std::optional<double> clearance;  // overrides the scenario default
  std::optional<double> chamfer;

  LearnerConfig learner;
  int budget = 75;       // trials per experiment
  int repetitions = 10;  // independent experiments
  std::uint64_t seed = 1;
  double penalty_weight = 1.0;  // w_d

  ControllerLimits limits = ControllerLimits::defaults();
  ControllerGains gains;
  Vec6 initial_stiffness = MetaParams::broadcast(600.0, 30.0);
  PlantConfig plant;

  double start_height = 0.005;  // m above the approach pose at run start
  std::string out_dir = "results";

  ScenarioSpec make_scenario_spec() const;
};

ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& config);

/// One parameter evaluation: the 4 perturbed initial poses, their costs, and
/// the aggregate the learners consume.
struct TrialRecord {
  int trial = 0;
  Candidate candidate;
  std::vector<double> costs;     // one per initial pose
  int success_count = 0;
  double mean_cost = 0.0;
  bool success = false;          // r: all runs inserted
  std::uint64_t seed = 0;        // per-trial seed, replay entry point
  double acquisition = 0.0;      // bo only
  double wall_time = 0.0;        // s, not part of the canonical record
  std::string diagnostic;        // set when a simulation fault aborted the trial
};

/// Skill + meta parameters decoded from one candidate.
struct AppliedCandidate {
  PegInHoleParams skill;
  MetaParams meta;
};

AppliedCandidate apply_candidate(const Candidate& candidate, const ParamDomain& domain,
                                 const PegInHoleParams& base);

/// Hole-estimate offsets used for the four runs of a trial; the key scenario
/// uses no deliberate deviation.
std::vector<Vec3> trial_perturbations(ScenarioKind kind);

struct RunResult {
  MetricResult metric;
  RunStatus status = RunStatus::failed;
  double end_time = 0.0;
  std::optional<double> first_contact;
  double max_depth = 0.0;
  std::string diagnostic;
};

/// Couples skill executor, impedance controller, and plant at the controller
/// period for a single run against one perturbed hole estimate. When
/// trace_path is set, a per-step CSV (time, pose, twist, wrench, contact,
/// stiffness, feed-forward, node) is written there.
RunResult run_single(const ExperimentConfig& config, const ScenarioSpec& scenario,
                     const AppliedCandidate& applied, const Vec3& estimate_offset,
                     Rng& rng, const std::filesystem::path* trace_path = nullptr);

/// Evaluates a candidate over the four perturbed initial poses. A simulation
/// integrity fault aborts the trial with the maximum penalty cost.
TrialRecord run_trial(const Candidate& candidate, const ExperimentConfig& config,
                      std::uint64_t trial_seed);

/// Uniform propose/report contract over the four learners.
class Learner {
 public:
  virtual ~Learner() = default;
  virtual std::vector<Candidate> propose() = 0;  // empty batch: done or stalled
  virtual void report(const std::vector<ObjectiveResult>& results) = 0;
  virtual bool stalled() const { return false; }
  virtual double last_acquisition() const { return 0.0; }
};

std::unique_ptr<Learner> make_learner(const LearnerConfig& config, const ParamDomain& domain,
                                      int budget, std::uint64_t seed);

struct ExperimentOutcome {
  std::vector<TrialRecord> records;
  bool stalled = false;
};

/// Drives one experiment (one learner execution) to its budget, appending each
/// record to the results file as it completes. Existing records in the file
/// are replayed into the learner instead of re-evaluated, which makes an
/// interrupted experiment resumable.
ExperimentOutcome run_experiment(const ExperimentConfig& config, int repetition,
                                 const std::filesystem::path& results_file);

/// Runs all configured repetitions; results land in
/// out_dir/experiment_<rep>.jsonl.
std::vector<ExperimentOutcome> run_all(const ExperimentConfig& config);

std::string record_to_json(const TrialRecord& record);
TrialRecord record_from_json(const std::string& line);

/// Loads the trial records of one results file (header line skipped).
std::vector<TrialRecord> load_records(const std::filesystem::path& results_file);

}  // namespace skillsim
