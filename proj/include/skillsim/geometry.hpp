#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <span>
#include <vector>

namespace skillsim {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Quat = Eigen::Quaterniond;

/// Rigid-body pose: translation in meters, unit quaternion with the scalar
/// part kept non-negative so every rotation has one canonical representative.
struct Pose {
  Vec3 translation = Vec3::Zero();
  Quat orientation = Quat::Identity();

  static Pose identity() { return {}; }

  // Renormalizes and fixes the quaternion sign.
  void canonicalize();
  bool is_valid(double tol = 1e-6) const;
};

struct Twist {
  Vec3 linear = Vec3::Zero();   // m/s
  Vec3 angular = Vec3::Zero();  // rad/s

  Vec6 vector() const;
  static Twist from_vector(const Vec6& v);
  bool is_finite() const;
};

struct Wrench {
  Vec3 force = Vec3::Zero();   // N
  Vec3 torque = Vec3::Zero();  // Nm

  Vec6 vector() const;
  static Wrench from_vector(const Vec6& v);
  bool is_finite() const;
};

/// Sensed state bundle at the end effector.
struct PerceptVector {
  Pose pose;
  Twist twist;
  Wrench external_wrench;
  double time = 0.0;  // s
  bool grasped = false;
};

using Trajectory = std::vector<PerceptVector>;
using TrajectorySlice = std::span<const PerceptVector>;

/// Checks strictly increasing timestamps and, when expected_dt > 0, uniform
/// sample spacing. Returns true for well-formed slices.
bool slice_is_well_formed(TrajectorySlice slice, double expected_dt = 0.0, double tol = 1e-9);

/// Rotation vector (axis * angle, |angle| <= pi) of a unit quaternion.
Vec3 rotation_vector(const Quat& q);

/// Unit quaternion of a rotation vector.
Quat quat_exp(const Vec3& rv);

/// 6-vector motion error: translation difference and the rotation vector of
/// desired * current^-1, both expressed in the frame the poses live in.
Vec6 pose_error(const Pose& desired, const Pose& current);

/// Advances a pose by twist * dt (linear displacement plus the exponential of
/// the angular increment applied on the left). Result is canonical.
Pose integrate_twist(const Pose& pose, const Twist& twist, double dt);

/// Applies a 6-vector error on top of a pose; inverse of pose_error in the
/// sense pose_error(apply_error(p, e), p) == e.
Pose apply_error(const Pose& pose, const Vec6& error);

/// Re-expresses a percept in the given frame. Twist and wrench components are
/// rotated only (quantities taken at the end-effector point).
PerceptVector to_task_frame(const PerceptVector& q, const Pose& frame);
PerceptVector from_task_frame(const PerceptVector& q, const Pose& frame);

Pose compose(const Pose& a, const Pose& b);  // a then b applied in a's frame
Pose inverse(const Pose& a);

}  // namespace skillsim
