#include "doctest.h"

#include <cmath>

#include "skillsim/peg_in_hole.hpp"
#include "skillsim/skill_graph.hpp"

using namespace skillsim;

namespace {

PerceptVector sample(double t, const Vec3& pos, double fx = 0.0, double fz = 0.0,
                     bool grasped = true) {
  PerceptVector p;
  p.time = t;
  p.pose.translation = pos;
  p.external_wrench.force = Vec3(fx, 0.0, fz);
  p.grasped = grasped;
  return p;
}

PegInHoleParams test_params() {
  PegInHoleParams p;
  p.depth = 0.035;
  p.roi_radius = 0.05;
  p.f_c = 10.0;
  p.s = 0.5;
  p.a_t = 0.005;
  p.a_r = 0.035;
  p.omega_t = 3.2;
  p.omega_r = 4.5;
  p.phi_init = 0.1;
  return p;
}

}  // namespace

TEST_CASE("condition semantics: forall for pre/success, exists for error") {
  Trajectory tr;
  for (int i = 0; i < 10; ++i) tr.push_back(sample(i * 0.001, {0, 0, 0.001 * i}));

  Condition below;
  below.kind = ConditionKind::success;
  below.membership = [](const PerceptVector& s, double, const PerceptVector&) {
    return s.pose.translation.z() < 0.005;
  };
  CHECK_FALSE(evaluate_condition(below, tr));  // samples 5..9 violate it

  Condition any_deep;
  any_deep.kind = ConditionKind::error;
  any_deep.membership = [](const PerceptVector& s, double, const PerceptVector&) {
    return s.pose.translation.z() > 0.008;
  };
  CHECK(evaluate_condition(any_deep, tr));  // the final sample qualifies

  Condition none;
  none.kind = ConditionKind::error;
  none.membership = [](const PerceptVector& s, double, const PerceptVector&) {
    return s.pose.translation.z() > 1.0;
  };
  CHECK_FALSE(evaluate_condition(none, tr));

  CHECK_THROWS_AS(evaluate_condition(below, TrajectorySlice{}), std::invalid_argument);
}

TEST_CASE("error condition examples from the protocol") {
  Trajectory tr;
  for (int i = 0; i <= 15001; ++i) tr.push_back(sample(i * 0.001, {0, 0, 0}));
  Condition timeout;
  timeout.kind = ConditionKind::error;
  timeout.membership = [](const PerceptVector&, double t, const PerceptVector&) {
    return t > 15.0;
  };
  CHECK(evaluate_condition(timeout, tr));  // slice ends at 15.001 s

  Trajectory inside;
  for (int i = 0; i < 100; ++i) inside.push_back(sample(i * 0.001, {0.01, 0, 0}));
  Condition roi_exit;
  roi_exit.kind = ConditionKind::error;
  roi_exit.membership = [](const PerceptVector& s, double, const PerceptVector&) {
    return s.pose.translation.norm() > 0.05;
  };
  CHECK_FALSE(evaluate_condition(roi_exit, inside));
}

TEST_CASE("validate accepts the reference skill and flags broken graphs") {
  const SkillGraph good = build_peg_in_hole(test_params());
  CHECK(validate(good).empty());

  SUBCASE("cycle reports a backward transition") {
    SkillGraph g = build_peg_in_hole(test_params());
    Condition c;
    c.kind = ConditionKind::success;
    c.membership = [](const PerceptVector&, double, const PerceptVector&) { return false; };
    g.transitions.push_back({"n3", "n2", c});
    const auto faults = validate(g);
    bool found = false;
    for (const auto& f : faults) found |= f.find("backward transition") != std::string::npos;
    CHECK(found);
  }
  SUBCASE("unbounded learned parameter") {
    SkillGraph g = build_peg_in_hole(test_params());
    g.learned_params.push_back({"mystery", 0.0, std::numeric_limits<double>::infinity()});
    const auto faults = validate(g);
    bool found = false;
    for (const auto& f : faults)
      found |= f.find("unbounded learned parameter") != std::string::npos;
    CHECK(found);
  }
}

TEST_CASE("trapezoid profile timing") {
  SUBCASE("zero distance has zero duration") {
    const TrapezoidProfile p(Pose{}, Pose{}, 0.1, 0.5, 1.0, 10.0);
    CHECK(p.duration() == 0.0);
    CHECK(p.at(0.0).vector().norm() == 0.0);
  }
  SUBCASE("cruise phase: 0.1 m at 0.1 m/s, 0.5 m/s^2") {
    Pose goal;
    goal.translation = Vec3(0.1, 0, 0);
    const TrapezoidProfile p(Pose{}, goal, 0.1, 0.5, 1.0, 10.0);
    // t_acc = 0.2 s, cruise 0.8 s, total 1.2 s
    CHECK(p.duration() == doctest::Approx(1.2));
    CHECK(p.at(0.1).linear.x() == doctest::Approx(0.05));   // accelerating
    CHECK(p.at(0.6).linear.x() == doctest::Approx(0.1));    // cruising
    CHECK(p.at(1.15).linear.x() == doctest::Approx(0.025)); // decelerating
    CHECK(p.at(1.3).vector().norm() == 0.0);
  }
  SUBCASE("short move degenerates to a triangle") {
    Pose goal;
    goal.translation = Vec3(0.005, 0, 0);
    const TrapezoidProfile p(Pose{}, goal, 0.1, 0.5, 1.0, 10.0);
    CHECK(p.duration() == doctest::Approx(2.0 * std::sqrt(0.005 / 0.5)));
  }
  SUBCASE("distance integrates back within tolerance") {
    Pose goal;
    goal.translation = Vec3(0.07, -0.02, 0.01);
    goal.orientation = quat_exp(Vec3(0.2, 0, 0.1));
    const TrapezoidProfile p(Pose{}, goal, 0.08, 1.0, 0.5, 5.0);
    double dist = 0.0, angle = 0.0;
    const double dt = 1e-4;
    for (double t = 0.0; t < p.duration(); t += dt) {
      dist += p.at(t).linear.norm() * dt;
      angle += p.at(t).angular.norm() * dt;
    }
    CHECK(dist == doctest::Approx(goal.translation.norm()).epsilon(1e-3));
    const double rot = rotation_vector(goal.orientation).norm();
    CHECK(angle == doctest::Approx(rot).epsilon(2e-3));
  }
  SUBCASE("zero speed limit never completes") {
    Pose goal;
    goal.translation = Vec3(0.1, 0, 0);
    const TrapezoidProfile p(Pose{}, goal, 0.0, 0.5, 0.0, 10.0);
    CHECK(std::isinf(p.duration()));
    CHECK(p.at(1.0).vector().norm() == 0.0);
  }
}

TEST_CASE("manipulation primitive commands match the published vectors") {
  const PegInHoleParams p = test_params();
  const PerceptVector entry = sample(0.0, {0, 0, -0.01});

  SUBCASE("n2 descends at the scaled speed limit") {
    const auto [tw, wr] = mp_command(PegNode::n2, p, entry, 0.5);
    CHECK(tw.linear.isApprox(Vec3(0, 0, 0.5 * 0.1)));
    CHECK(wr.vector().norm() == 0.0);
  }
  SUBCASE("n3 pushes laterally while pressing down") {
    const auto [tw, wr] = mp_command(PegNode::n3, p, entry, 0.1);
    CHECK(tw.linear.x() == doctest::Approx(0.05));
    CHECK(tw.linear.tail<2>().norm() == 0.0);
    CHECK(wr.force.z() == doctest::Approx(10.0));
    CHECK(wr.force.x() == 0.0);
  }
  SUBCASE("n4 keeps both force components") {
    const auto [tw, wr] = mp_command(PegNode::n4, p, entry, 0.0);
    CHECK(wr.force.x() == doctest::Approx(10.0));
    CHECK(wr.force.z() == doctest::Approx(10.0));
    CHECK(wr.force.y() == 0.0);
  }
  SUBCASE("n5 oscillation starts at zero and peaks at the amplitude") {
    const auto [tw0, wr0] = mp_command(PegNode::n5, p, entry, 0.0);
    CHECK(tw0.linear.isApprox(Vec3(0, 0, 0.05)));
    CHECK(tw0.angular.norm() == 0.0);
    CHECK(wr0.vector().norm() == 0.0);

    const double t_peak = 1.0 / (4.0 * p.omega_t);
    const auto [twp, wrp] = mp_command(PegNode::n5, p, entry, t_peak);
    CHECK(twp.linear.x() == doctest::Approx(0.005));

    // The second channel runs at 3/4 of the base frequency.
    const auto [twq, wrq] = mp_command(PegNode::n5, p, entry, 0.123);
    CHECK(twq.linear.y() ==
          doctest::Approx(p.a_t * std::sin(2 * M_PI * 0.75 * p.omega_t * 0.123)));
    CHECK(twq.angular.y() ==
          doctest::Approx(p.a_r * std::sin(2 * M_PI * 0.75 * p.omega_r * 0.123)));
  }
  SUBCASE("emitted n5 twist stays inside the velocity envelope") {
    for (double t = 0.0; t < 3.0; t += 0.01) {
      const auto [tw, wr] = mp_command(PegNode::n5, p, entry, t);
      CHECK(std::abs(tw.linear.x()) <= p.a_t + 1e-12);
      CHECK(std::abs(tw.linear.y()) <= p.a_t + 1e-12);
      CHECK(tw.linear.z() == doctest::Approx(p.s * p.xdot_max_lin));
      CHECK(std::abs(tw.angular.x()) <= p.a_r + 1e-12);
      CHECK(tw.angular.z() == 0.0);
    }
  }
}

TEST_CASE("metric cost rule") {
  const ScenarioSpec sc = make_scenario(ScenarioKind::peg, Pose{});
  LearningMetric metric;  // t_max 15, w_d 1

  SUBCASE("success costs the time from first contact") {
    RunOutcome run;
    run.success = true;
    run.end_time = 4.0;
    run.first_contact_time = 0.8;
    const MetricResult r = metric_cost(metric, run, sc);
    CHECK(r.success);
    CHECK(r.cost == doctest::Approx(3.2));
  }
  SUBCASE("failure before entering costs twice the limit") {
    RunOutcome run;
    run.success = false;
    run.end_time = 15.0;
    run.max_depth = 0.0;
    CHECK(metric_cost(metric, run, sc).cost == doctest::Approx(30.0));
  }
  SUBCASE("failure at half depth") {
    RunOutcome run;
    run.success = false;
    run.end_time = 15.0;
    run.max_depth = sc.depth / 2.0;
    CHECK(metric_cost(metric, run, sc).cost == doctest::Approx(22.5));
  }
  SUBCASE("successful run without contact is invalid") {
    RunOutcome run;
    run.success = true;
    run.end_time = 2.0;
    CHECK_THROWS_AS(metric_cost(metric, run, sc), std::invalid_argument);
  }
  SUBCASE("weighted terms combine on success") {
    LearningMetric m2;
    m2.terms.push_back({0.5, [](TrajectorySlice s) { return s.back().time; }});
    m2.terms.push_back({0.25, [](TrajectorySlice) { return 4.0; }});
    RunOutcome run;
    run.success = true;
    run.end_time = 2.0;
    run.first_contact_time = 0.5;
    run.trajectory.push_back(sample(0.0, {0, 0, 0}));
    run.trajectory.push_back(sample(2.0, {0, 0, 0}));
    CHECK(metric_cost(m2, run, sc).cost == doctest::Approx(0.5 * 2.0 + 0.25 * 4.0));
  }
}

TEST_CASE("scripted run walks the transitions in order and succeeds") {
  PegInHoleParams p = test_params();
  p.phi_init = 0.0;  // keep the script simple: no initial tilt
  const SkillGraph g = build_peg_in_hole(p);
  SkillRuntime rt(g, peg_in_hole_slew(p), 0.001);

  const Vec3 approach(0, 0, -0.01);
  double t = 0.0;
  auto advance = [&](PerceptVector pv, std::optional<double> contact = std::nullopt) {
    pv.time = t;
    const auto r = rt.step(pv, contact);
    t += 0.001;
    return r;
  };

  // Start at the approach pose; n1 has zero length and hands over immediately.
  auto r = advance(sample(0, approach));
  CHECK(r.active_node == "n2");

  // Descend until the contact force threshold fires e2.
  for (int i = 0; i < 50; ++i) r = advance(sample(0, approach, 0, 5.0));
  CHECK(r.active_node == "n2");
  r = advance(sample(0, approach, 0, 10.5), 0.05);
  CHECK(r.active_node == "n3");

  // Lateral constraint fires e3. The firing percept already sits at the hole
  // pose, so the n4 profile has zero length and finishes on the next step.
  for (int i = 0; i < 30; ++i) r = advance(sample(0, approach, 4.0, 10.5));
  CHECK(r.active_node == "n3");
  r = advance(sample(0, Vec3(0, 0, 0.0), 10.0, 10.5));
  CHECK(r.active_node == "n4");

  r = advance(sample(0, Vec3(0, 0, 0.0)));
  CHECK(r.active_node == "n5");
  for (int i = 0; i < 20; ++i) r = advance(sample(0, Vec3(0, 0, 0.01)));
  CHECK(r.status == RunStatus::running);
  r = advance(sample(0, Vec3(0, 0, 0.0351)));
  CHECK(r.status == RunStatus::succeeded);

  const auto& timeline = rt.node_timeline();
  REQUIRE(timeline.size() == 5);
  CHECK(timeline[0].second == "n1");
  CHECK(timeline[1].second == "n2");
  CHECK(timeline[2].second == "n3");
  CHECK(timeline[3].second == "n4");
  CHECK(timeline[4].second == "n5");

  const MetricResult mr =
      metric_cost(g.metric, rt.outcome(), make_scenario(ScenarioKind::peg, Pose{}));
  CHECK(mr.success);
  CHECK(mr.cost > 0.0);
  CHECK(mr.cost <= 15.0);
}

TEST_CASE("slew limiter bounds command jumps across node switches") {
  PegInHoleParams p = test_params();
  p.phi_init = 0.0;
  const SkillGraph g = build_peg_in_hole(p);
  const SlewLimits slew = peg_in_hole_slew(p);
  SkillRuntime rt(g, slew, 0.001);

  const Vec3 approach(0, 0, -0.01);
  double t = 0.0;
  Vec6 last = Vec6::Zero();
  Vec6 last_w = Vec6::Zero();
  auto advance = [&](PerceptVector pv) {
    pv.time = t;
    auto r = rt.step(pv);
    if (r.status == RunStatus::running) {
      const Vec6 tw = r.twist.vector();
      const Vec6 wr = r.wrench.vector();
      for (int k = 0; k < 6; ++k) {
        CHECK(std::abs(tw[k] - last[k]) <= slew.twist_rate[k] * 0.001 + 1e-12);
        CHECK(std::abs(wr[k] - last_w[k]) <= slew.wrench_rate[k] * 0.001 + 1e-12);
      }
      last = tw;
      last_w = wr;
    }
    t += 0.001;
    return r;
  };

  advance(sample(0, approach));
  for (int i = 0; i < 200; ++i) advance(sample(0, approach, 0, 2.0));
  // Force the n2 -> n3 switch: commanded twist flips from +z to +x.
  advance(sample(0, approach, 0, 10.5));
  for (int i = 0; i < 200; ++i) advance(sample(0, approach, 2.0, 10.5));
}

TEST_CASE("timeout produces a failed penalized run") {
  PegInHoleParams p = test_params();
  p.phi_init = 0.0;
  const SkillGraph g = build_peg_in_hole(p);
  SkillRuntime rt(g, peg_in_hole_slew(p), 0.001);

  const Vec3 approach(0, 0, -0.01);
  SkillRuntime::StepResult r;
  for (int i = 0; i <= 15001; ++i) {
    r = rt.step(sample(i * 0.001, approach));
    if (r.status != RunStatus::running) break;
  }
  CHECK(r.status == RunStatus::failed);
  const MetricResult mr =
      metric_cost(g.metric, rt.outcome(), make_scenario(ScenarioKind::peg, Pose{}));
  CHECK_FALSE(mr.success);
  CHECK(mr.cost >= 15.0);
  CHECK(mr.cost == doctest::Approx(30.0));
}

TEST_CASE("error condition dominates simultaneous success") {
  PegInHoleParams p = test_params();
  p.phi_init = 0.0;
  const SkillGraph g = build_peg_in_hole(p);

  // A sample that is both fully inserted and beyond the time limit.
  PerceptVector both = sample(15.1, Vec3(0, 0, p.depth + 0.001));
  Trajectory tr{sample(0.0, Vec3(0, 0, -0.01)), both};
  CHECK(evaluate_condition(g.error_condition, tr));
  CHECK(evaluate_condition(g.success_condition, Trajectory{both}));

  SkillRuntime rt(g, peg_in_hole_slew(p), 0.001);
  rt.step(sample(0.0, Vec3(0, 0, -0.01)));
  const auto r = rt.step(both);
  CHECK(r.status == RunStatus::failed);
}

TEST_CASE("unmet precondition fails immediately") {
  const PegInHoleParams p = test_params();
  const SkillGraph g = build_peg_in_hole(p);
  SkillRuntime rt(g, peg_in_hole_slew(p), 0.001);
  const auto r = rt.step(sample(0.0, Vec3(0.2, 0, -0.5)));  // far from approach
  CHECK(r.status == RunStatus::failed);
  const MetricResult mr =
      metric_cost(g.metric, rt.outcome(), make_scenario(ScenarioKind::peg, Pose{}));
  CHECK_FALSE(mr.success);
}

TEST_CASE("the key variant freezes the tilt parameter") {
  const ScenarioSpec sc = make_scenario(ScenarioKind::key, Pose{});
  const PegInHoleParams p = PegInHoleParams::for_scenario(sc);
  CHECK_FALSE(p.learn_phi_init);
  const SkillGraph g = build_peg_in_hole(p);
  for (const auto& spec : g.learned_params)
    if (spec.name == "phi_init") CHECK(spec.upper == 0.0);
  CHECK(validate(g).empty());
}
