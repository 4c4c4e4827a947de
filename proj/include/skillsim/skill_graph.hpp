#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "skillsim/geometry.hpp"
#include "skillsim/plant.hpp"

namespace skillsim {

enum class ConditionKind { pre, error, success };

/// A condition is a per-sample membership test lifted to trajectory slices:
/// pre and success conditions hold when every sample is a member, error
/// conditions when any sample is. Membership sees the sample, the time since
/// the start of the evaluated slice, and the slice's first sample.
struct Condition {
  ConditionKind kind = ConditionKind::success;
  std::function<bool(const PerceptVector& sample, double t_since_start,
                     const PerceptVector& start_sample)>
      membership;
};

/// Holds iff all (pre/success) or any (error) sample satisfies membership.
/// Empty slices are rejected.
bool evaluate_condition(const Condition& cond, TrajectorySlice slice);

/// Graph node: a parameterized twist and feed-forward wrench trajectory. The
/// generators receive the percept at node entry and the time spent in the
/// node; skill parameters are bound when the graph is built.
struct ManipulationPrimitive {
  std::string name;
  std::function<Twist(const PerceptVector& entry, double t_in_node)> twist_generator;
  std::function<Wrench(const PerceptVector& entry, double t_in_node)> wrench_generator;
};

/// Edge between two primitives, activated by a success-style condition that
/// the executor evaluates on the trailing sample of the active node.
struct Transition {
  std::string from;
  std::string to;
  Condition trigger;  // success kind
};

/// One weighted term of the learning metric, evaluated on the run trajectory.
struct MetricTerm {
  double weight = 1.0;
  std::function<double(TrajectorySlice)> value;
};

struct LearningMetric {
  std::vector<MetricTerm> terms;   // empty: execution time from first contact
  double t_max = 15.0;             // s, error-condition timeout
  double penalty_weight = 1.0;     // w_d of the failure penalty
};

/// Declared bounds of one learned parameter.
struct ParameterSpec {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;  // lower == upper marks a frozen parameter
};

/// Directed skill graph: manipulation primitives, transitions, the three
/// boundary conditions, the learning metric, and the parameter declarations.
/// Every non-terminal node has an implicit error edge to the recovery node;
/// recovery terminates the skill with a failure.
struct SkillGraph {
  std::vector<ManipulationPrimitive> nodes;
  std::vector<Transition> transitions;
  Condition precondition;
  Condition error_condition;
  Condition success_condition;
  LearningMetric metric;
  std::map<std::string, double> context_params;
  std::vector<ParameterSpec> learned_params;
};

/// Structural checks: single initial and terminal primitive, acyclicity,
/// terminal reachability, presence of the boundary conditions, and bounded
/// learned-parameter domains. Returns human-readable faults, empty if valid.
std::vector<std::string> validate(const SkillGraph& graph);

enum class RunStatus { running, succeeded, failed };

struct MetricResult {
  double cost = 0.0;
  bool success = false;  // the result indicator r
};

/// Everything the cost rule needs about a finished run.
struct RunOutcome {
  Trajectory trajectory;                      // task frame
  bool success = false;
  double end_time = 0.0;                      // s
  std::optional<double> first_contact_time;   // s, from the plant
  double max_depth = 0.0;                     // m, deepest insertion reached
};

/// Cost rule: a successful run costs the weighted metric terms (by default the
/// execution time from first contact); a failed run costs
/// t_max + w_d * (remaining distance / d) * t_max.
MetricResult metric_cost(const LearningMetric& metric, const RunOutcome& run,
                         const ScenarioSpec& scenario);

/// Per-axis slopes of the command slew limiter applied on node switches.
struct SlewLimits {
  Vec6 twist_rate = Vec6::Zero();   // m/s^2 | rad/s^2
  Vec6 wrench_rate = Vec6::Zero();  // N/s | Nm/s
};

/// Sequential executor for one skill run. Evaluates the error condition
/// first, then the active node's outgoing transition, then emits the active
/// primitive's command through the slew limiter.
class SkillRuntime {
 public:
  SkillRuntime(const SkillGraph& graph, SlewLimits slew, double period);

  struct StepResult {
    Twist twist;
    Wrench wrench;
    RunStatus status = RunStatus::running;
    std::string active_node;
  };

  /// Advances the executor by one controller period. first_contact_time is
  /// the plant-side contact timestamp used by the learning metric.
  StepResult step(const PerceptVector& percept,
                  std::optional<double> first_contact_time = std::nullopt);

  RunStatus status() const { return status_; }
  const Trajectory& trajectory() const { return trajectory_; }
  const RunOutcome& outcome() const { return outcome_; }
  const std::vector<std::pair<double, std::string>>& node_timeline() const {
    return timeline_;
  }

 private:
  void enter_node(std::size_t index, const PerceptVector& percept);
  void finish(RunStatus status, const PerceptVector& percept);

  const SkillGraph& graph_;
  SlewLimits slew_;
  double period_;
  std::size_t active_ = 0;
  bool started_ = false;
  bool error_latched_ = false;
  RunStatus status_ = RunStatus::running;
  PerceptVector entry_percept_;
  double entry_time_ = 0.0;
  PerceptVector start_percept_;
  Twist last_twist_;
  Wrench last_wrench_;
  Trajectory trajectory_;
  RunOutcome outcome_;
  std::vector<std::pair<double, std::string>> timeline_;
  std::map<std::string, const Transition*> outgoing_;
  std::optional<double> first_contact_;
};

}  // namespace skillsim
