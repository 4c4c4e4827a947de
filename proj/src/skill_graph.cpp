#include "skillsim/skill_graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <stdexcept>

namespace skillsim {

bool evaluate_condition(const Condition& cond, TrajectorySlice slice) {
  if (slice.empty()) throw std::invalid_argument("evaluate_condition: empty slice");
  if (!cond.membership) throw std::invalid_argument("evaluate_condition: missing membership");
  const PerceptVector& start = slice.front();
  if (cond.kind == ConditionKind::error) {
    return std::any_of(slice.begin(), slice.end(), [&](const PerceptVector& s) {
      return cond.membership(s, s.time - start.time, start);
    });
  }
  return std::all_of(slice.begin(), slice.end(), [&](const PerceptVector& s) {
    return cond.membership(s, s.time - start.time, start);
  });
}

std::vector<std::string> validate(const SkillGraph& graph) {
  std::vector<std::string> faults;
  if (graph.nodes.empty()) {
    faults.push_back("graph has no nodes");
    return faults;
  }

  std::set<std::string> names;
  for (const auto& n : graph.nodes) {
    if (!names.insert(n.name).second) faults.push_back("duplicate node name: " + n.name);
    if (!n.twist_generator || !n.wrench_generator)
      faults.push_back("node without command generators: " + n.name);
  }

  std::map<std::string, int> in_degree, out_degree;
  for (const auto& n : graph.nodes) in_degree[n.name] = out_degree[n.name] = 0;
  for (const auto& t : graph.transitions) {
    if (!names.count(t.from) || !names.count(t.to)) {
      faults.push_back("transition references unknown node: " + t.from + " -> " + t.to);
      continue;
    }
    ++out_degree[t.from];
    ++in_degree[t.to];
    if (t.trigger.kind != ConditionKind::success)
      faults.push_back("transition trigger is not a success condition: " + t.from);
  }

  int initials = 0, terminals = 0;
  std::string initial;
  for (const auto& n : graph.nodes) {
    if (in_degree[n.name] == 0) {
      ++initials;
      initial = n.name;
    }
    if (out_degree[n.name] == 0) ++terminals;
  }
  if (initials != 1) faults.push_back("graph must have exactly one initial node");
  if (terminals != 1) faults.push_back("graph must have exactly one terminal node");

  // Kahn's algorithm; leftover nodes sit on a cycle, i.e. a backward edge.
  {
    std::map<std::string, int> degree = in_degree;
    std::deque<std::string> queue;
    for (const auto& [name, d] : degree)
      if (d == 0) queue.push_back(name);
    std::size_t visited = 0;
    while (!queue.empty()) {
      const std::string cur = queue.front();
      queue.pop_front();
      ++visited;
      for (const auto& t : graph.transitions)
        if (t.from == cur && --degree[t.to] == 0) queue.push_back(t.to);
    }
    if (visited != graph.nodes.size()) faults.push_back("backward transition");
  }

  if (initials == 1) {
    std::set<std::string> reachable{initial};
    std::deque<std::string> queue{initial};
    while (!queue.empty()) {
      const std::string cur = queue.front();
      queue.pop_front();
      for (const auto& t : graph.transitions)
        if (t.from == cur && reachable.insert(t.to).second) queue.push_back(t.to);
    }
    for (const auto& n : graph.nodes)
      if (out_degree[n.name] == 0 && !reachable.count(n.name))
        faults.push_back("terminal node not reachable from initial node");
  }

  if (!graph.precondition.membership) faults.push_back("missing precondition");
  if (!graph.error_condition.membership) faults.push_back("missing error condition");
  if (!graph.success_condition.membership) faults.push_back("missing success condition");
  if (graph.precondition.kind != ConditionKind::pre)
    faults.push_back("precondition has wrong kind");
  if (graph.error_condition.kind != ConditionKind::error)
    faults.push_back("error condition has wrong kind");
  if (graph.success_condition.kind != ConditionKind::success)
    faults.push_back("success condition has wrong kind");

  for (const auto& p : graph.learned_params) {
    if (!std::isfinite(p.lower) || !std::isfinite(p.upper) || p.lower > p.upper)
      faults.push_back("unbounded learned parameter: " + p.name);
  }
  for (const auto& t : graph.metric.terms)
    if (!(t.weight > 0.0) || t.weight > 1.0)
      faults.push_back("metric term weight outside (0, 1]");

  return faults;
}

MetricResult metric_cost(const LearningMetric& metric, const RunOutcome& run,
                         const ScenarioSpec& scenario) {
  if (run.success) {
    if (!run.first_contact_time)
      throw std::invalid_argument("metric_cost: successful run without contact");
    MetricResult res;
    res.success = true;
    if (metric.terms.empty()) {
      res.cost = run.end_time - *run.first_contact_time;
    } else {
      for (const auto& term : metric.terms)
        res.cost += term.weight * term.value(run.trajectory);
    }
    return res;
  }
  const double remaining =
      std::clamp(scenario.depth - run.max_depth, 0.0, scenario.depth);
  MetricResult res;
  res.success = false;
  res.cost = metric.t_max +
             metric.penalty_weight * (remaining / scenario.depth) * metric.t_max;
  return res;
}

SkillRuntime::SkillRuntime(const SkillGraph& graph, SlewLimits slew, double period)
    : graph_(graph), slew_(slew), period_(period) {
  if (period_ <= 0) throw std::invalid_argument("runtime period must be positive");
  for (const auto& t : graph_.transitions) {
    if (outgoing_.count(t.from))
      throw std::invalid_argument("node with multiple outgoing transitions: " + t.from);
    outgoing_[t.from] = &t;
  }
}

void SkillRuntime::enter_node(std::size_t index, const PerceptVector& percept) {
  active_ = index;
  entry_percept_ = percept;
  entry_time_ = percept.time;
  timeline_.emplace_back(percept.time, graph_.nodes[index].name);
}

void SkillRuntime::finish(RunStatus status, const PerceptVector& percept) {
  status_ = status;
  outcome_.trajectory = trajectory_;
  outcome_.success = status == RunStatus::succeeded;
  outcome_.end_time = percept.time;
  outcome_.first_contact_time = first_contact_;
}

SkillRuntime::StepResult SkillRuntime::step(const PerceptVector& percept,
                                            std::optional<double> first_contact_time) {
  StepResult out;
  if (status_ != RunStatus::running) {
    out.status = status_;
    return out;
  }
  if (first_contact_time) first_contact_ = first_contact_time;
  trajectory_.push_back(percept);
  const double depth = percept.pose.translation.z();
  outcome_.max_depth = std::max(outcome_.max_depth, depth);

  if (!started_) {
    started_ = true;
    start_percept_ = percept;
    const Trajectory initial{percept};
    if (!evaluate_condition(graph_.precondition, initial)) {
      finish(RunStatus::failed, percept);
      out.status = status_;
      return out;
    }
    enter_node(0, percept);
  }

  // Error condition dominates; once a sample is in the error set, the run is
  // a failure regardless of later samples.
  if (!error_latched_ &&
      graph_.error_condition.membership(percept, percept.time - start_percept_.time,
                                        start_percept_)) {
    error_latched_ = true;
  }
  if (error_latched_) {
    finish(RunStatus::failed, percept);
    out.status = status_;
    return out;
  }

  const double t_in_node = percept.time - entry_time_;
  const std::string& name = graph_.nodes[active_].name;
  const auto it = outgoing_.find(name);
  if (it == outgoing_.end()) {
    // Terminal primitive: the outgoing transition is the success condition.
    if (graph_.success_condition.membership(percept, t_in_node, entry_percept_)) {
      finish(RunStatus::succeeded, percept);
      out.status = status_;
      return out;
    }
  } else if (it->second->trigger.membership(percept, t_in_node, entry_percept_)) {
    const auto next = std::find_if(graph_.nodes.begin(), graph_.nodes.end(),
                                   [&](const auto& n) { return n.name == it->second->to; });
    enter_node(static_cast<std::size_t>(next - graph_.nodes.begin()), percept);
  }

  const auto& node = graph_.nodes[active_];
  const double t_active = percept.time - entry_time_;
  const Twist raw_twist = node.twist_generator(entry_percept_, t_active);
  const Wrench raw_wrench = node.wrench_generator(entry_percept_, t_active);

  const Vec6 dtw = (raw_twist.vector() - last_twist_.vector())
                       .cwiseMax(-slew_.twist_rate * period_)
                       .cwiseMin(slew_.twist_rate * period_);
  const Vec6 dwr = (raw_wrench.vector() - last_wrench_.vector())
                       .cwiseMax(-slew_.wrench_rate * period_)
                       .cwiseMin(slew_.wrench_rate * period_);
  last_twist_ = Twist::from_vector(last_twist_.vector() + dtw);
  last_wrench_ = Wrench::from_vector(last_wrench_.vector() + dwr);

  out.twist = last_twist_;
  out.wrench = last_wrench_;
  out.status = status_;
  out.active_node = node.name;
  return out;
}

}  // namespace skillsim
