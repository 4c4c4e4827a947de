#include "skillsim/experiment.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "skillsim/bayes_opt.hpp"
#include "skillsim/cma_es.hpp"
#include "skillsim/lhs.hpp"
#include "skillsim/pso.hpp"

namespace skillsim {
namespace {

using Json = nlohmann::ordered_json;

Json to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }
Json to_json(const Vec6& v) {
  Json a = Json::array();
  for (int i = 0; i < 6; ++i) a.push_back(v[i]);
  return a;
}
Json to_json(const Pose& p) {
  return Json::array({p.translation.x(), p.translation.y(), p.translation.z(),
                      p.orientation.w(), p.orientation.x(), p.orientation.y(),
                      p.orientation.z()});
}

Vec3 vec3_from(const Json& j) { return Vec3(j.at(0), j.at(1), j.at(2)); }
Vec6 vec6_from(const Json& j) {
  Vec6 v;
  for (int i = 0; i < 6; ++i) v[i] = j.at(i);
  return v;
}
Pose pose_from(const Json& j) {
  Pose p;
  p.translation = Vec3(j.at(0), j.at(1), j.at(2));
  p.orientation = Quat(j.at(3), j.at(4), j.at(5), j.at(6));
  p.canonicalize();
  return p;
}

Json vector_to_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}
Eigen::VectorXd vector_from_json(const Json& j) {
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j.at(i);
  return v;
}

double max_penalty_cost(const ExperimentConfig& config) {
  return 15.0 * (1.0 + config.penalty_weight);
}

ParamDomain domain_for(const ExperimentConfig& config) {
  const ScenarioSpec spec = config.make_scenario_spec();
  const SkillGraph graph = build_peg_in_hole(PegInHoleParams::for_scenario(spec));
  return ParamDomain(graph.learned_params);
}

class LhsLearner final : public Learner {
 public:
  LhsLearner(const ParamDomain& domain, int budget, std::uint64_t seed) {
    Rng rng(seed);
    all_ = lhs(budget, domain, rng);  // the whole design is fixed up front
  }
  std::vector<Candidate> propose() override {
    if (issued_) return {};
    issued_ = true;
    return all_;
  }
  void report(const std::vector<ObjectiveResult>&) override {}

 private:
  std::vector<Candidate> all_;
  bool issued_ = false;
};

class CmaLearner final : public Learner {
 public:
  CmaLearner(const ParamDomain& domain, const LearnerConfig& cfg, std::uint64_t seed)
      : domain_(domain), rng_(seed) {
    const Eigen::VectorXd center = Eigen::VectorXd::Constant(domain.dim(), 0.5);
    state_ = cma_init(domain, cfg.lambda, cfg.sigma0, center);
  }
  std::vector<Candidate> propose() override { return cma_ask(state_, domain_, rng_); }
  void report(const std::vector<ObjectiveResult>& results) override {
    cma_tell(state_, results);
  }

 private:
  ParamDomain domain_;
  CmaState state_;
  Rng rng_;
};

class PsoLearner final : public Learner {
 public:
  PsoLearner(const ParamDomain& domain, const LearnerConfig& cfg, std::uint64_t seed)
      : domain_(domain), rng_(seed) {
    state_ = pso_init(domain, cfg.particles, cfg.c1, cfg.c2, rng_);
    pending_ = pso_positions(state_, domain_);
  }
  std::vector<Candidate> propose() override {
    std::vector<Candidate> out;
    out.swap(pending_);
    return out;
  }
  void report(const std::vector<ObjectiveResult>& results) override {
    pending_ = pso_step(state_, results, domain_, rng_);
  }

 private:
  ParamDomain domain_;
  PsoState state_;
  Rng rng_;
  std::vector<Candidate> pending_;
};

class BoLearner final : public Learner {
 public:
  BoLearner(const ParamDomain& domain, const LearnerConfig& cfg, std::uint64_t seed)
      : domain_(domain), init_samples_(cfg.init_samples), rng_(seed) {}

  std::vector<Candidate> propose() override {
    if (stalled_) return {};
    if (!initialized_) {
      initialized_ = true;
      return lhs(init_samples_, domain_, rng_);
    }
    if (observations_.size() < 2) return {};
    Eigen::MatrixXd X(observations_.size(), domain_.dim());
    Eigen::VectorXd cost(observations_.size());
    Eigen::VectorXd succ(observations_.size());
    std::optional<double> best_feasible;
    for (std::size_t i = 0; i < observations_.size(); ++i) {
      X.row(i) = observations_[i].candidate.unit.transpose();
      cost[i] = observations_[i].cost;
      succ[i] = observations_[i].success ? 1.0 : 0.0;
      if (observations_[i].success && (!best_feasible || observations_[i].cost < *best_feasible))
        best_feasible = observations_[i].cost;
    }
    try {
      const GpModel cost_model = gp_fit(X, cost, rng_);
      const GpModel success_model = gp_fit(X, succ, rng_);
      const BoProposal p =
          bo_propose(cost_model, success_model, best_feasible, domain_, rng_);
      last_acquisition_ = p.acquisition;
      if (p.stalled) stalled_ = true;  // evaluate the fallback, then stop
      return {p.candidate};
    } catch (const std::runtime_error&) {
      stalled_ = true;  // singular surrogate; mirror the early-termination path
      return {};
    }
  }
  void report(const std::vector<ObjectiveResult>& results) override {
    observations_.insert(observations_.end(), results.begin(), results.end());
  }
  bool stalled() const override { return stalled_; }
  double last_acquisition() const override { return last_acquisition_; }

 private:
  ParamDomain domain_;
  int init_samples_;
  Rng rng_;
  bool initialized_ = false;
  bool stalled_ = false;
  double last_acquisition_ = 0.0;
  std::vector<ObjectiveResult> observations_;
};

}  // namespace

ScenarioSpec ExperimentConfig::make_scenario_spec() const {
  ScenarioSpec spec = make_scenario(scenario, hole_pose);
  if (clearance) spec.clearance = *clearance;
  if (chamfer) spec.chamfer = *chamfer;
  return spec;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path.string());
  Json j = Json::parse(in);

  ExperimentConfig cfg;
  if (j.contains("scenario")) {
    const Json& s = j["scenario"];
    if (s.contains("kind")) cfg.scenario = scenario_kind_from_string(s["kind"]);
    if (s.contains("hole_pose")) cfg.hole_pose = pose_from(s["hole_pose"]);
    if (s.contains("clearance")) cfg.clearance = s["clearance"].get<double>();
    if (s.contains("chamfer")) cfg.chamfer = s["chamfer"].get<double>();
  }
  if (j.contains("learner")) {
    const Json& l = j["learner"];
    if (l.contains("kind")) cfg.learner.kind = l["kind"];
    if (l.contains("lambda")) cfg.learner.lambda = l["lambda"];
    if (l.contains("sigma0")) cfg.learner.sigma0 = l["sigma0"];
    if (l.contains("particles")) cfg.learner.particles = l["particles"];
    if (l.contains("c1")) cfg.learner.c1 = l["c1"];
    if (l.contains("c2")) cfg.learner.c2 = l["c2"];
    if (l.contains("init_samples")) cfg.learner.init_samples = l["init_samples"];
  }
  if (j.contains("budget")) cfg.budget = j["budget"];
  if (j.contains("repetitions")) cfg.repetitions = j["repetitions"];
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("penalty_weight")) cfg.penalty_weight = j["penalty_weight"];
  if (j.contains("controller")) {
    const Json& c = j["controller"];
    if (c.contains("kappa")) cfg.gains.kappa = c["kappa"];
    if (c.contains("damping_ratio")) cfg.gains.damping_ratio = c["damping_ratio"];
    if (c.contains("period")) cfg.gains.period = c["period"];
    if (c.contains("initial_stiffness"))
      cfg.initial_stiffness = vec6_from(c["initial_stiffness"]);
    if (c.contains("limits")) {
      const Json& lim = c["limits"];
      if (lim.contains("K_max")) cfg.limits.K_max = vec6_from(lim["K_max"]);
      if (lim.contains("Kdot_max")) cfg.limits.Kdot_max = vec6_from(lim["Kdot_max"]);
      if (lim.contains("F_max")) cfg.limits.F_max = vec6_from(lim["F_max"]);
      if (lim.contains("Fdot_max")) cfg.limits.Fdot_max = vec6_from(lim["Fdot_max"]);
      if (lim.contains("e_max")) cfg.limits.e_max = vec6_from(lim["e_max"]);
      if (lim.contains("xdot_max")) cfg.limits.xdot_max = vec6_from(lim["xdot_max"]);
    }
  }
  if (j.contains("plant")) {
    const Json& p = j["plant"];
    if (p.contains("mass")) cfg.plant.mass = vec3_from(p["mass"]);
    if (p.contains("inertia")) cfg.plant.inertia = vec3_from(p["inertia"]);
    if (p.contains("contact_stiffness")) cfg.plant.contact_stiffness = p["contact_stiffness"];
    if (p.contains("contact_damping")) cfg.plant.contact_damping = p["contact_damping"];
    if (p.contains("friction")) cfg.plant.friction_coefficient = p["friction"];
    if (p.contains("force_noise")) cfg.plant.force_noise_sigma = p["force_noise"];
    if (p.contains("torque_noise")) cfg.plant.torque_noise_sigma = p["torque_noise"];
    if (p.contains("dt")) cfg.plant.step_dt = p["dt"];
  }
  if (j.contains("start_height")) cfg.start_height = j["start_height"];
  if (j.contains("out")) cfg.out_dir = j["out"];

  if (cfg.budget < 1) throw std::runtime_error("config: budget must be >= 1");
  if (cfg.repetitions < 1) throw std::runtime_error("config: repetitions must be >= 1");
  if (!cfg.plant.is_valid()) throw std::runtime_error("config: invalid plant parameters");
  if (std::abs(cfg.plant.step_dt - cfg.gains.period) > 1e-12)
    throw std::runtime_error("config: plant dt must equal the controller period");
  return cfg;
}

std::string config_to_json(const ExperimentConfig& c) {
  Json j;
  j["scenario"] = {{"kind", to_string(c.scenario)}, {"hole_pose", to_json(c.hole_pose)}};
  if (c.clearance) j["scenario"]["clearance"] = *c.clearance;
  if (c.chamfer) j["scenario"]["chamfer"] = *c.chamfer;
  j["learner"] = {{"kind", c.learner.kind},       {"lambda", c.learner.lambda},
                  {"sigma0", c.learner.sigma0},   {"particles", c.learner.particles},
                  {"c1", c.learner.c1},           {"c2", c.learner.c2},
                  {"init_samples", c.learner.init_samples}};
  j["budget"] = c.budget;
  j["repetitions"] = c.repetitions;
  j["seed"] = c.seed;
  j["penalty_weight"] = c.penalty_weight;
  j["controller"] = {{"kappa", c.gains.kappa},
                     {"damping_ratio", c.gains.damping_ratio},
                     {"period", c.gains.period},
                     {"initial_stiffness", to_json(c.initial_stiffness)},
                     {"limits",
                      {{"K_max", to_json(c.limits.K_max)},
                       {"Kdot_max", to_json(c.limits.Kdot_max)},
                       {"F_max", to_json(c.limits.F_max)},
                       {"Fdot_max", to_json(c.limits.Fdot_max)},
                       {"e_max", to_json(c.limits.e_max)},
                       {"xdot_max", to_json(c.limits.xdot_max)}}}};
  j["plant"] = {{"mass", to_json(c.plant.mass)},
                {"inertia", to_json(c.plant.inertia)},
                {"contact_stiffness", c.plant.contact_stiffness},
                {"contact_damping", c.plant.contact_damping},
                {"friction", c.plant.friction_coefficient},
                {"force_noise", c.plant.force_noise_sigma},
                {"torque_noise", c.plant.torque_noise_sigma},
                {"dt", c.plant.step_dt}};
  j["start_height"] = c.start_height;
  j["out"] = c.out_dir;
  return j.dump();
}

AppliedCandidate apply_candidate(const Candidate& candidate, const ParamDomain& domain,
                                 const PegInHoleParams& base) {
  auto v = [&](const std::string& name) { return domain.physical_value(candidate, name); };
  AppliedCandidate out;
  out.meta.alpha = MetaParams::broadcast(v("alpha_lin"), v("alpha_ang"));
  out.meta.beta = MetaParams::broadcast(v("beta_lin"), v("beta_ang"));
  out.meta.gamma_alpha = MetaParams::broadcast(v("gamma_alpha_lin"), v("gamma_alpha_ang"));
  out.meta.gamma_beta = MetaParams::broadcast(v("gamma_beta_lin"), v("gamma_beta_ang"));
  out.skill = base;
  out.skill.f_c = v("f_c");
  out.skill.s = v("s");
  out.skill.a_t = v("a_t");
  out.skill.omega_t = v("omega_t");
  out.skill.omega_r = v("omega_r");
  out.skill.phi_init = v("phi_init");
  return out;
}

std::vector<Vec3> trial_perturbations(ScenarioKind kind) {
  if (kind == ScenarioKind::key) return {Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  const double mm = 1e-3;
  return {Vec3(mm, mm, 0), Vec3(mm, -mm, 0), Vec3(-mm, mm, 0), Vec3(-mm, -mm, 0)};
}

RunResult run_single(const ExperimentConfig& config, const ScenarioSpec& scenario,
                     const AppliedCandidate& applied, const Vec3& estimate_offset,
                     Rng& rng, const std::filesystem::path* trace_path) {
  // The skill operates in the task frame, i.e. the estimated hole frame.
  Pose estimate = scenario.hole_pose;
  estimate.translation += scenario.hole_pose.orientation * estimate_offset;

  SkillGraph graph = build_peg_in_hole(applied.skill);
  graph.metric.penalty_weight = config.penalty_weight;
  SkillRuntime runtime(graph, peg_in_hole_slew(applied.skill), config.gains.period);
  ImpedanceController controller(config.limits, config.gains, applied.meta,
                                 config.initial_stiffness, config.plant.inertia6());

  Pose start_task = applied.skill.approach_pose();
  start_task.orientation = Quat::Identity();  // n1 performs the initial tilt
  start_task.translation.z() -= config.start_height;

  PlantState plant;
  plant.percept.pose = compose(estimate, start_task);
  plant.percept.grasped = true;
  controller.reset(start_task);
  const PegGeometry geom = make_peg_geometry(scenario);

  std::ofstream trace;
  if (trace_path) {
    trace.open(*trace_path);
    trace << "time,tx,ty,tz,qw,qx,qy,qz,vx,vy,vz,wx,wy,wz,fx,fy,fz,taux,tauy,tauz,"
             "contact,K1,K2,K3,K4,K5,K6,Fff1,Fff2,Fff3,Fff4,Fff5,Fff6,node\n";
  }

  const int max_steps =
      static_cast<int>((graph.metric.t_max + 2.0) / config.gains.period);
  RunResult result;
  for (int step = 0; step < max_steps; ++step) {
    const PerceptVector percept = to_task_frame(plant.percept, estimate);
    const auto cmd = runtime.step(percept, plant.first_contact_time);
    if (trace.is_open()) {
      const auto& cs = controller.state();
      trace << percept.time;
      const Pose& p = percept.pose;
      trace << ',' << p.translation.x() << ',' << p.translation.y() << ','
            << p.translation.z() << ',' << p.orientation.w() << ',' << p.orientation.x()
            << ',' << p.orientation.y() << ',' << p.orientation.z();
      for (int i = 0; i < 6; ++i) trace << ',' << percept.twist.vector()[i];
      for (int i = 0; i < 6; ++i) trace << ',' << percept.external_wrench.vector()[i];
      trace << ',' << (plant.in_contact ? 1 : 0);
      for (int i = 0; i < 6; ++i) trace << ',' << cs.K[i];
      for (int i = 0; i < 6; ++i) trace << ',' << cs.F_ff.vector()[i];
      trace << ',' << cmd.active_node << '\n';
    }
    if (cmd.status != RunStatus::running) break;
    const Wrench u_task = controller.step(cmd.twist, cmd.wrench, percept);
    Wrench u_world;
    u_world.force = estimate.orientation * u_task.force;
    u_world.torque = estimate.orientation * u_task.torque;
    plant = plant_step(plant, u_world, scenario, config.plant, rng, geom);
  }

  RunOutcome outcome = runtime.outcome();
  if (runtime.status() == RunStatus::running) {
    // Defensive stop; the timeout error condition fires first in practice.
    outcome.trajectory = runtime.trajectory();
    outcome.success = false;
    outcome.end_time = plant.percept.time;
  }
  result.metric = metric_cost(graph.metric, outcome, scenario);
  result.status = runtime.status();
  result.end_time = outcome.end_time;
  result.first_contact = outcome.first_contact_time;
  result.max_depth = outcome.max_depth;
  return result;
}

TrialRecord run_trial(const Candidate& candidate, const ExperimentConfig& config,
                      std::uint64_t trial_seed) {
  const auto t0 = std::chrono::steady_clock::now();
  const ScenarioSpec scenario = config.make_scenario_spec();
  const PegInHoleParams base = PegInHoleParams::for_scenario(scenario);
  const ParamDomain domain = domain_for(config);
  const AppliedCandidate applied = apply_candidate(candidate, domain, base);

  TrialRecord rec;
  rec.candidate = candidate;
  rec.seed = trial_seed;

  const auto perturbations = trial_perturbations(scenario.kind);
  try {
    for (std::size_t j = 0; j < perturbations.size(); ++j) {
      Rng rng = make_rng(trial_seed, j + 1);
      const RunResult run = run_single(config, scenario, applied, perturbations[j], rng);
      rec.costs.push_back(run.metric.cost);
      if (run.metric.success) ++rec.success_count;
    }
  } catch (const SimulationFault& fault) {
    rec.costs.assign(perturbations.size(), max_penalty_cost(config));
    rec.success_count = 0;
    rec.diagnostic = fault.what();
  }

  double sum = 0.0;
  for (double c : rec.costs) sum += c;
  rec.mean_cost = sum / rec.costs.size();
  rec.success = rec.success_count == static_cast<int>(perturbations.size());
  rec.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

std::unique_ptr<Learner> make_learner(const LearnerConfig& config, const ParamDomain& domain,
                                      int budget, std::uint64_t seed) {
  if (config.kind == "lhs") return std::make_unique<LhsLearner>(domain, budget, seed);
  if (config.kind == "cma-es") return std::make_unique<CmaLearner>(domain, config, seed);
  if (config.kind == "pso") return std::make_unique<PsoLearner>(domain, config, seed);
  if (config.kind == "bo") return std::make_unique<BoLearner>(domain, config, seed);
  throw std::invalid_argument("unknown learner kind: " + config.kind);
}

std::string record_to_json(const TrialRecord& r) {
  Json j;
  j["trial"] = r.trial;
  j["unit"] = vector_to_json(r.candidate.unit);
  j["physical"] = vector_to_json(r.candidate.physical);
  j["costs"] = r.costs;
  j["mean_cost"] = r.mean_cost;
  j["success_count"] = r.success_count;
  j["r"] = r.success ? 1 : 0;
  j["seed"] = r.seed;
  j["acq"] = r.acquisition;
  j["diagnostic"] = r.diagnostic;
  return j.dump();
}

TrialRecord record_from_json(const std::string& line) {
  const Json j = Json::parse(line);
  TrialRecord r;
  r.trial = j.at("trial");
  r.candidate.unit = vector_from_json(j.at("unit"));
  r.candidate.physical = vector_from_json(j.at("physical"));
  r.costs = j.at("costs").get<std::vector<double>>();
  r.mean_cost = j.at("mean_cost");
  r.success_count = j.at("success_count");
  r.success = j.at("r").get<int>() == 1;
  r.seed = j.at("seed").get<std::uint64_t>();
  r.acquisition = j.at("acq");
  r.diagnostic = j.at("diagnostic");
  return r;
}

std::vector<TrialRecord> load_records(const std::filesystem::path& results_file) {
  std::ifstream in(results_file);
  if (!in) throw std::runtime_error("cannot open results file: " + results_file.string());
  std::vector<TrialRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.find("\"type\":\"header\"") != std::string::npos) continue;
    records.push_back(record_from_json(line));
  }
  return records;
}

ExperimentOutcome run_experiment(const ExperimentConfig& config, int repetition,
                                 const std::filesystem::path& results_file) {
  const ParamDomain domain = domain_for(config);
  const std::uint64_t learner_seed = derive_seed(config.seed, 0x10000u + repetition);
  auto learner = make_learner(config.learner, domain, config.budget, learner_seed);

  std::vector<TrialRecord> existing;
  if (std::filesystem::exists(results_file)) {
    std::ifstream in(results_file);
    std::string header;
    std::getline(in, header);
    const Json h = Json::parse(header);
    if (h.value("type", "") != "header" || h.at("repetition") != repetition ||
        h.at("config").dump() != Json::parse(config_to_json(config)).dump())
      throw std::runtime_error("results file does not match this experiment: " +
                               results_file.string());
    existing = load_records(results_file);
  } else {
    if (results_file.has_parent_path())
      std::filesystem::create_directories(results_file.parent_path());
    std::ofstream out(results_file);
    Json h;
    h["type"] = "header";
    h["repetition"] = repetition;
    h["config"] = Json::parse(config_to_json(config));
    out << h.dump() << '\n';
  }

  std::ofstream out(results_file, std::ios::app);
  ExperimentOutcome outcome;
  int evaluated = 0;
  while (evaluated < config.budget) {
    std::vector<Candidate> batch = learner->propose();
    if (batch.empty()) {
      outcome.stalled = true;
      break;
    }
    const bool truncated = evaluated + static_cast<int>(batch.size()) > config.budget;
    if (truncated) batch.resize(config.budget - evaluated);

    std::vector<ObjectiveResult> results;
    for (const Candidate& cand : batch) {
      TrialRecord rec;
      if (evaluated < static_cast<int>(existing.size())) {
        rec = existing[evaluated];
        if ((rec.candidate.unit - cand.unit).norm() > 1e-9)
          throw std::runtime_error("recorded trial does not match the proposal; "
                                   "refusing to resume");
      } else {
        rec = run_trial(cand, config, derive_seed(config.seed, repetition, evaluated));
        rec.trial = evaluated;
        rec.acquisition = learner->last_acquisition();
        out << record_to_json(rec) << '\n';
        out.flush();
      }
      outcome.records.push_back(rec);
      ObjectiveResult obj;
      obj.cost = rec.mean_cost;
      obj.success = rec.success;
      obj.candidate = cand;
      results.push_back(std::move(obj));
      ++evaluated;
    }
    if (truncated) break;
    learner->report(results);
  }
  if (learner->stalled()) outcome.stalled = true;
  return outcome;
}

std::vector<ExperimentOutcome> run_all(const ExperimentConfig& config) {
  std::vector<ExperimentOutcome> out;
  for (int rep = 0; rep < config.repetitions; ++rep) {
    const auto file = std::filesystem::path(config.out_dir) /
                      ("experiment_" + std::to_string(rep) + ".jsonl");
    out.push_back(run_experiment(config, rep, file));
  }
  return out;
}

}  // namespace skillsim
