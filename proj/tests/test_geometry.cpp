#include "doctest.h"

#include <random>

#include "skillsim/geometry.hpp"
#include "skillsim/random.hpp"

using namespace skillsim;

namespace {

Pose random_pose(Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Pose p;
  p.translation = Vec3(u(rng), u(rng), u(rng));
  p.orientation = Quat(u(rng), u(rng), u(rng), u(rng));
  if (p.orientation.norm() < 1e-3) p.orientation = Quat::Identity();
  p.canonicalize();
  return p;
}

}  // namespace

TEST_CASE("pose_error basics") {
  Pose a = Pose::identity();
  CHECK(pose_error(a, a).norm() == 0.0);

  Pose above = a;
  above.translation = Vec3(0, 0, 0.005);
  const Vec6 e = pose_error(above, a);
  CHECK(e[2] == doctest::Approx(0.005));
  CHECK(e.tail<3>().norm() == doctest::Approx(0.0));
}

TEST_CASE("pose_error rotation against exponential oracle") {
  // Reconstruct the rotation from the returned vector and compare matrices.
  Pose current = Pose::identity();
  Pose desired;
  desired.orientation = quat_exp(Vec3(0, 0, 0.2));
  const Vec6 e = pose_error(desired, current);
  CHECK(e.tail<3>().isApprox(Vec3(0, 0, 0.2), 1e-12));

  Rng rng(42);
  for (int i = 0; i < 500; ++i) {
    const Pose a = random_pose(rng);
    const Pose b = random_pose(rng);
    const Vec6 err = pose_error(a, b);
    const Quat rebuilt = quat_exp(err.tail<3>()) * b.orientation;
    CHECK((rebuilt.toRotationMatrix() - a.orientation.toRotationMatrix()).norm() < 1e-10);
    CHECK(err.tail<3>().norm() <= M_PI + 1e-12);
  }
}

TEST_CASE("pose_error antisymmetry") {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const Pose a = random_pose(rng);
    const Pose b = random_pose(rng);
    const Vec6 ab = pose_error(a, b);
    const Vec6 ba = pose_error(b, a);
    CHECK((ab.tail<3>() + ba.tail<3>()).norm() < 1e-10);
  }
}

TEST_CASE("integrate_twist") {
  const Pose p = Pose::identity();
  SUBCASE("zero twist is identity") {
    const Pose q = integrate_twist(p, Twist{}, 0.001);
    CHECK(q.translation.norm() == 0.0);
    CHECK(q.orientation.angularDistance(Quat::Identity()) == doctest::Approx(0.0));
  }
  SUBCASE("linear motion") {
    Twist t;
    t.linear = Vec3(0.1, 0, 0);
    const Pose q = integrate_twist(p, t, 0.001);
    CHECK(q.translation.x() == doctest::Approx(1e-4));
  }
  SUBCASE("half turn composed twice returns to start") {
    Twist t;
    t.angular = Vec3(0, 0, M_PI);
    Pose q = integrate_twist(p, t, 1.0);
    q = integrate_twist(q, t, 1.0);
    CHECK(q.orientation.angularDistance(p.orientation) < 1e-9);
  }
}

TEST_CASE("quaternion norm stays unit over many integration steps") {
  Pose p = Pose::identity();
  Twist t;
  t.angular = Vec3(0.3, -0.2, 0.5);
  t.linear = Vec3(0.01, 0, -0.02);
  for (int i = 0; i < 1000000; ++i) p = integrate_twist(p, t, 0.001);
  CHECK(std::abs(p.orientation.norm() - 1.0) < 1e-9);
}

TEST_CASE("task frame round trip") {
  Rng rng(3);
  SUBCASE("identity frame") {
    PerceptVector q;
    q.pose = random_pose(rng);
    q.twist.linear = Vec3(1, 2, 3);
    const PerceptVector r = to_task_frame(q, Pose::identity());
    CHECK(r.pose.translation.isApprox(q.pose.translation));
    CHECK(r.twist.linear.isApprox(q.twist.linear));
  }
  SUBCASE("pure translation frame shifts pose only") {
    Pose frame;
    frame.translation = Vec3(1, 0, 0);
    PerceptVector q;
    q.pose.translation = Vec3(0.5, 0.25, 0);
    q.twist.linear = Vec3(1, 2, 3);
    q.external_wrench.force = Vec3(4, 5, 6);
    const PerceptVector r = to_task_frame(q, frame);
    CHECK(r.pose.translation.isApprox(Vec3(-0.5, 0.25, 0)));
    CHECK(r.twist.linear.isApprox(q.twist.linear));
    CHECK(r.external_wrench.force.isApprox(q.external_wrench.force));
  }
  SUBCASE("random frames round trip") {
    for (int i = 0; i < 1000; ++i) {
      const Pose frame = random_pose(rng);
      PerceptVector q;
      q.pose = random_pose(rng);
      std::uniform_real_distribution<double> u(-2.0, 2.0);
      q.twist.linear = Vec3(u(rng), u(rng), u(rng));
      q.twist.angular = Vec3(u(rng), u(rng), u(rng));
      q.external_wrench.force = Vec3(u(rng), u(rng), u(rng));
      q.external_wrench.torque = Vec3(u(rng), u(rng), u(rng));
      q.time = i * 0.001;
      const PerceptVector r = from_task_frame(to_task_frame(q, frame), frame);
      CHECK(r.pose.translation.isApprox(q.pose.translation, 1e-10));
      CHECK(r.pose.orientation.angularDistance(q.pose.orientation) < 1e-10);
      CHECK(r.twist.linear.isApprox(q.twist.linear, 1e-10));
      CHECK(r.external_wrench.torque.isApprox(q.external_wrench.torque, 1e-10));
    }
  }
}

TEST_CASE("trajectory slice well-formedness") {
  Trajectory tr;
  for (int i = 0; i < 5; ++i) {
    PerceptVector p;
    p.time = i * 0.001;
    tr.push_back(p);
  }
  CHECK(slice_is_well_formed(tr, 0.001));
  tr[3].time = tr[2].time;  // duplicate timestamp
  CHECK_FALSE(slice_is_well_formed(tr));
}

TEST_CASE("apply_error inverts pose_error") {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const Pose base = random_pose(rng);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    Vec6 e;
    for (int k = 0; k < 6; ++k) e[k] = u(rng);
    const Pose moved = apply_error(base, e);
    CHECK((pose_error(moved, base) - e).norm() < 1e-10);
  }
}
