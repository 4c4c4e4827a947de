#include "doctest.h"

#include <cmath>

#include "skillsim/plant.hpp"

using namespace skillsim;

namespace {

PlantConfig quiet_config() {
  PlantConfig c;
  c.force_noise_sigma = 0.0;
  c.torque_noise_sigma = 0.0;
  return c;
}

PlantState state_at(const Vec3& tip, const Quat& q = Quat::Identity()) {
  PlantState s;
  s.percept.pose.translation = tip;
  s.percept.pose.orientation = q;
  s.percept.pose.canonicalize();
  return s;
}

double kinetic_energy(const PlantState& s, const PlantConfig& c) {
  const Vec3& v = s.percept.twist.linear;
  const Vec3& w = s.percept.twist.angular;
  return 0.5 * v.dot(c.mass.cwiseProduct(v)) + 0.5 * w.dot(c.inertia.cwiseProduct(w));
}

}  // namespace

TEST_CASE("make_scenario fills the published dimensions") {
  const Pose origin;
  const ScenarioSpec peg = make_scenario(ScenarioKind::peg, origin);
  CHECK(std::get<CylinderSection>(peg.cross_section).radius == doctest::Approx(0.01));
  CHECK(peg.depth == doctest::Approx(0.035));
  CHECK(peg.chamfer == doctest::Approx(5e-4));

  const ScenarioSpec puzzle = make_scenario(ScenarioKind::puzzle, origin);
  CHECK(std::get<TriangleSection>(puzzle.cross_section).side == doctest::Approx(0.075));
  CHECK(puzzle.depth == doctest::Approx(0.005));
  CHECK(puzzle.chamfer == 0.0);
  CHECK(puzzle.max_rot_amplitude == doctest::Approx(0.09));

  const ScenarioSpec key = make_scenario(ScenarioKind::key, origin);
  CHECK(key.depth == doctest::Approx(0.0023));
  CHECK(key.max_rot_amplitude == doctest::Approx(0.0175));

  CHECK_THROWS_AS(scenario_kind_from_string("bolt"), std::invalid_argument);
}

TEST_CASE("cross section signed distances") {
  Eigen::Vector2d grad;
  const CrossSection cyl = CylinderSection{0.01};
  CHECK(cross_section_distance(cyl, 5e-5, {0.015, 0.0}, &grad) ==
        doctest::Approx(0.015 - 0.01005));
  CHECK(grad.isApprox(Eigen::Vector2d(1, 0)));
  CHECK(cross_section_distance(cyl, 5e-5, {0.0, 0.0}, &grad) < 0);

  const CrossSection tri = TriangleSection{0.075};
  const double inradius = 0.075 / (2.0 * std::sqrt(3.0));
  CHECK(cross_section_distance(tri, 1e-4, {0.0, 0.0}, &grad) ==
        doctest::Approx(-(inradius + 1e-4)).epsilon(1e-9));

  const CrossSection plate = PlateSection{0.02, 0.002};
  CHECK(cross_section_distance(plate, 1e-4, {0.0, 0.0}, &grad) ==
        doctest::Approx(-0.0011).epsilon(1e-9));
  CHECK(cross_section_distance(plate, 1e-4, {0.02, 0.0}, &grad) ==
        doctest::Approx(0.01 - 1e-4).epsilon(1e-9));
}

TEST_CASE("contact wrench") {
  const ScenarioSpec sc = make_scenario(ScenarioKind::peg, Pose{});
  const PlantConfig cfg = quiet_config();

  SUBCASE("separated bodies produce no wrench") {
    const Wrench w = contact_wrench(state_at({0.1, 0.0, -0.001}), sc, cfg);
    CHECK(w.force.norm() == 0.0);
    CHECK(w.torque.norm() == 0.0);
  }
  SUBCASE("flat penetration follows the penalty law") {
    // Flat on the surface away from the hole, penetration 1e-4 m, zero
    // velocity: 5e4 N/m * 1e-4 m = 5 N pushing out of the material.
    const Wrench w = contact_wrench(state_at({0.1, 0.0, 1e-4}), sc, cfg);
    CHECK(w.force.z() == doctest::Approx(-5.0).epsilon(1e-9));
    CHECK(w.force.head<2>().norm() == doctest::Approx(0.0));
  }
  SUBCASE("normal force is never negative (separating contact)") {
    PlantState s = state_at({0.1, 0.0, 1e-4});
    s.percept.twist.linear = Vec3(0, 0, -10.0);  // fast retreat
    const Wrench w = contact_wrench(s, sc, cfg);
    CHECK(w.force.z() <= 0.0);
    CHECK(w.force.norm() < 1e-9);  // damping clamped at zero, friction follows
  }
}

TEST_CASE("static friction holds a lateral push below the Coulomb limit") {
  const ScenarioSpec sc = make_scenario(ScenarioKind::peg, Pose{});
  const PlantConfig cfg = quiet_config();
  Rng rng(1);

  // Start at the normal-force equilibrium for a 5 N press.
  const double pen = 5.0 / cfg.contact_stiffness;
  PlantState s = state_at({0.1, 0.0, pen});
  const double mu_n = cfg.friction_coefficient * 5.0;
  Wrench push;
  push.force = Vec3(0.005 * mu_n, 0.0, 5.0);

  const double x0 = s.percept.pose.translation.x();
  for (int i = 0; i < 1000; ++i) s = plant_step(s, push, sc, cfg, rng);
  CHECK(std::abs(s.percept.pose.translation.x() - x0) < 1e-6);
}

TEST_CASE("plant step") {
  const ScenarioSpec sc = make_scenario(ScenarioKind::peg, Pose{});
  const PlantConfig cfg = quiet_config();

  SUBCASE("free space equilibrium") {
    Rng rng(2);
    PlantState s = state_at({0.0, 0.0, -0.05});
    const PlantState out = plant_step(s, Wrench{}, sc, cfg, rng);
    CHECK(out.percept.pose.translation.isApprox(s.percept.pose.translation));
    CHECK(out.percept.twist.linear.norm() == 0.0);
    CHECK(out.percept.time == doctest::Approx(0.001));
  }
  SUBCASE("ballistic closed form") {
    Rng rng(3);
    PlantState s = state_at({0.0, 0.0, -0.1});
    Wrench f;
    f.force = Vec3(1.0, 0.0, 0.0);
    for (int i = 0; i < 100; ++i) s = plant_step(s, f, sc, cfg, rng);
    CHECK(s.percept.twist.linear.x() == doctest::Approx(0.05).epsilon(1e-6));
  }
  SUBCASE("determinism is bit exact for equal seeds") {
    PlantConfig noisy;  // default noise
    auto run = [&] {
      Rng rng(77);
      PlantState s = state_at({0.001, 0.0, -0.002});
      s.percept.twist.linear = Vec3(0, 0, 0.05);
      std::vector<double> log;
      for (int i = 0; i < 500; ++i) {
        s = plant_step(s, Wrench{}, sc, noisy, rng);
        log.push_back(s.percept.pose.translation.z());
        log.push_back(s.percept.external_wrench.force.z());
      }
      return log;
    };
    const auto a = run();
    const auto b = run();
    CHECK(a == b);
  }
  SUBCASE("deep penetration raises an integrity fault") {
    Rng rng(4);
    PlantState s = state_at({0.1, 0.0, 0.006});
    CHECK_THROWS_AS(plant_step(s, Wrench{}, sc, cfg, rng), SimulationFault);
  }
  SUBCASE("non-finite input raises an integrity fault") {
    Rng rng(5);
    PlantState s = state_at({0.1, 0.0, -0.01});
    Wrench bad;
    bad.force = Vec3(std::numeric_limits<double>::quiet_NaN(), 0, 0);
    CHECK_THROWS_AS(plant_step(s, bad, sc, cfg, rng), SimulationFault);
  }
}

TEST_CASE("first contact time is latched once") {
  const ScenarioSpec sc = make_scenario(ScenarioKind::peg, Pose{});
  const PlantConfig cfg = quiet_config();
  Rng rng(6);
  PlantState s = state_at({0.1, 0.0, -0.0005});
  s.percept.twist.linear = Vec3(0, 0, 0.05);
  std::optional<double> first;
  for (int i = 0; i < 400; ++i) {
    s = plant_step(s, Wrench{}, sc, cfg, rng);
    if (!first && s.first_contact_time) first = s.first_contact_time;
  }
  REQUIRE(first.has_value());
  CHECK(s.first_contact_time == first);
}

TEST_CASE("contact episodes dissipate kinetic energy") {
  const ScenarioSpec sc = make_scenario(ScenarioKind::peg, Pose{});
  const PlantConfig cfg = quiet_config();

  const Vec3 starts[] = {{0.1, 0.0, -0.0005}, {0.08, 0.02, -0.001}, {0.12, -0.01, -0.0002}};
  const double speeds[] = {0.02, 0.05, 0.1};
  for (const Vec3& start : starts) {
    for (double v0 : speeds) {
      Rng rng(9);
      PlantState s = state_at(start);
      s.percept.twist.linear = Vec3(0, 0, v0);
      double entry_ke = -1.0;
      for (int i = 0; i < 3000; ++i) {
        const bool was_in_contact = s.in_contact;
        const double ke_before = kinetic_energy(s, cfg);
        s = plant_step(s, Wrench{}, sc, cfg, rng);
        if (s.in_contact && !was_in_contact) entry_ke = ke_before;
        if (s.in_contact && entry_ke >= 0.0)
          CHECK(kinetic_energy(s, cfg) <= entry_ke + 1e-9);
      }
    }
  }
}

TEST_CASE("centered aligned descent reaches full depth without lateral force") {
  const ScenarioSpec sc = make_scenario(ScenarioKind::peg, Pose{});
  const PlantConfig cfg = quiet_config();
  Rng rng(10);
  PlantState s = state_at({0.0, 0.0, -0.001});
  s.percept.twist.linear = Vec3(0, 0, 0.05);
  bool reached = false;
  for (int i = 0; i < 2000; ++i) {
    s = plant_step(s, Wrench{}, sc, cfg, rng);
    CHECK(s.percept.external_wrench.force.head<2>().norm() == doctest::Approx(0.0));
    if (insertion_depth(s, sc) >= sc.depth) {
      reached = true;
      break;
    }
  }
  CHECK(reached);
}

TEST_CASE("insertion depth sign convention") {
  const ScenarioSpec sc = make_scenario(ScenarioKind::peg, Pose{});
  CHECK(insertion_depth(state_at({0, 0, 0.0}), sc) == doctest::Approx(0.0));
  CHECK(insertion_depth(state_at({0, 0, 0.035}), sc) == doctest::Approx(0.035));
  CHECK(insertion_depth(state_at({0, 0, -0.001}), sc) == doctest::Approx(-0.001));
}

TEST_CASE("insertion depth follows a displaced hole frame") {
  Pose hole;
  hole.translation = Vec3(0.3, -0.2, 0.1);
  const ScenarioSpec sc = make_scenario(ScenarioKind::peg, hole);
  PlantState s = state_at({0.3, -0.2, 0.1 + 0.01});
  CHECK(insertion_depth(s, sc) == doctest::Approx(0.01));
}
