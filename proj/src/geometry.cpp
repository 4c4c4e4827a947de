#include "skillsim/geometry.hpp"

#include <cmath>

namespace skillsim {

void Pose::canonicalize() {
  orientation.normalize();
  // Fix the double cover: scalar part >= 0, ties broken on the vector part.
  if (orientation.w() < 0.0 ||
      (orientation.w() == 0.0 &&
       (orientation.x() < 0.0 ||
        (orientation.x() == 0.0 &&
         (orientation.y() < 0.0 || (orientation.y() == 0.0 && orientation.z() < 0.0)))))) {
    orientation.coeffs() = -orientation.coeffs();
  }
}

bool Pose::is_valid(double tol) const {
  return translation.allFinite() && orientation.coeffs().allFinite() &&
         std::abs(orientation.norm() - 1.0) <= tol;
}

Vec6 Twist::vector() const {
  Vec6 v;
  v << linear, angular;
  return v;
}

Twist Twist::from_vector(const Vec6& v) { return {v.head<3>(), v.tail<3>()}; }

bool Twist::is_finite() const { return linear.allFinite() && angular.allFinite(); }

Vec6 Wrench::vector() const {
  Vec6 v;
  v << force, torque;
  return v;
}

Wrench Wrench::from_vector(const Vec6& v) { return {v.head<3>(), v.tail<3>()}; }

bool Wrench::is_finite() const { return force.allFinite() && torque.allFinite(); }

bool slice_is_well_formed(TrajectorySlice slice, double expected_dt, double tol) {
  for (std::size_t i = 1; i < slice.size(); ++i) {
    const double dt = slice[i].time - slice[i - 1].time;
    if (dt <= 0.0) return false;
    if (expected_dt > 0.0 && std::abs(dt - expected_dt) > tol) return false;
  }
  return true;
}

Vec3 rotation_vector(const Quat& q) {
  Quat qc = q.normalized();
  if (qc.w() < 0.0) qc.coeffs() = -qc.coeffs();
  const double vnorm = qc.vec().norm();
  if (vnorm < 1e-14) return 2.0 * qc.vec();  // small-angle limit
  const double angle = 2.0 * std::atan2(vnorm, qc.w());
  return (angle / vnorm) * qc.vec();
}

Quat quat_exp(const Vec3& rv) {
  const double angle = rv.norm();
  if (angle < 1e-14) {
    Quat q(1.0, 0.5 * rv.x(), 0.5 * rv.y(), 0.5 * rv.z());
    q.normalize();
    return q;
  }
  const Vec3 axis = rv / angle;
  return Quat(Eigen::AngleAxisd(angle, axis));
}

Vec6 pose_error(const Pose& desired, const Pose& current) {
  Vec6 e;
  e.head<3>() = desired.translation - current.translation;
  e.tail<3>() = rotation_vector(desired.orientation * current.orientation.conjugate());
  return e;
}

Pose integrate_twist(const Pose& pose, const Twist& twist, double dt) {
  Pose out;
  out.translation = pose.translation + twist.linear * dt;
  out.orientation = quat_exp(twist.angular * dt) * pose.orientation;
  out.canonicalize();
  return out;
}

Pose apply_error(const Pose& pose, const Vec6& error) {
  Pose out;
  out.translation = pose.translation + error.head<3>();
  out.orientation = quat_exp(error.tail<3>()) * pose.orientation;
  out.canonicalize();
  return out;
}

Pose compose(const Pose& a, const Pose& b) {
  Pose out;
  out.translation = a.translation + a.orientation * b.translation;
  out.orientation = a.orientation * b.orientation;
  out.canonicalize();
  return out;
}

Pose inverse(const Pose& a) {
  Pose out;
  out.orientation = a.orientation.conjugate();
  out.translation = -(out.orientation * a.translation);
  out.canonicalize();
  return out;
}

PerceptVector to_task_frame(const PerceptVector& q, const Pose& frame) {
  const Quat rinv = frame.orientation.conjugate();
  PerceptVector out = q;
  out.pose.translation = rinv * (q.pose.translation - frame.translation);
  out.pose.orientation = rinv * q.pose.orientation;
  out.pose.canonicalize();
  out.twist.linear = rinv * q.twist.linear;
  out.twist.angular = rinv * q.twist.angular;
  out.external_wrench.force = rinv * q.external_wrench.force;
  out.external_wrench.torque = rinv * q.external_wrench.torque;
  return out;
}

PerceptVector from_task_frame(const PerceptVector& q, const Pose& frame) {
  const Quat& r = frame.orientation;
  PerceptVector out = q;
  out.pose.translation = frame.translation + r * q.pose.translation;
  out.pose.orientation = r * q.pose.orientation;
  out.pose.canonicalize();
  out.twist.linear = r * q.twist.linear;
  out.twist.angular = r * q.twist.angular;
  out.external_wrench.force = r * q.external_wrench.force;
  out.external_wrench.torque = r * q.external_wrench.torque;
  return out;
}

}  // namespace skillsim
