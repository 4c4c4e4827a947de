#include "skillsim/peg_in_hole.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace skillsim {
namespace {

constexpr double kPreconditionRadius = 0.02;  // m around the approach pose

double channel_duration(double distance, double v, double a) {
  if (distance <= 0.0) return 0.0;
  const double d_full = v * v / a;  // distance covered by accel + decel at v
  if (distance < d_full) return 2.0 * std::sqrt(distance / a);
  return distance / v + v / a;
}

}  // namespace

double TrapezoidProfile::Channel::speed(double own_t) const {
  if (distance <= 0.0 || own_t < 0.0 || own_t >= own_duration) return 0.0;
  if (2.0 * t_acc >= own_duration) {
    // Triangular profile.
    const double half = own_duration / 2.0;
    return own_t < half ? a * own_t : a * (own_duration - own_t);
  }
  if (own_t < t_acc) return a * own_t;
  if (own_t > own_duration - t_acc) return a * (own_duration - own_t);
  return v;
}

TrapezoidProfile::TrapezoidProfile(const Pose& start, const Pose& goal, double v_lin,
                                   double a_lin, double v_ang, double a_ang) {
  if (a_lin <= 0 || a_ang <= 0)
    throw std::invalid_argument("trapezoid profile: accelerations must be positive");

  const Vec3 dp = goal.translation - start.translation;
  const Vec3 rv0 = rotation_vector(goal.orientation * start.orientation.conjugate());
  if ((v_lin <= 0 && dp.norm() > 1e-12) || (v_ang <= 0 && rv0.norm() > 1e-12)) {
    // A zero speed limit can never complete the move.
    duration_ = std::numeric_limits<double>::infinity();
    return;
  }
  linear_.distance = dp.norm();
  if (linear_.distance > 1e-12) linear_.direction = dp / linear_.distance;
  linear_.v = v_lin;
  linear_.a = a_lin;
  linear_.own_duration = channel_duration(linear_.distance, v_lin, a_lin);
  linear_.t_acc = std::min(v_lin / a_lin, linear_.own_duration / 2.0);

  const Vec3& rv = rv0;
  angular_.distance = rv.norm();
  if (angular_.distance > 1e-12) angular_.direction = rv / angular_.distance;
  angular_.v = v_ang;
  angular_.a = a_ang;
  angular_.own_duration = channel_duration(angular_.distance, v_ang, a_ang);
  angular_.t_acc = std::min(v_ang / a_ang, angular_.own_duration / 2.0);

  duration_ = std::max(linear_.own_duration, angular_.own_duration);
  if (duration_ > 0.0) {
    linear_.time_scale = linear_.own_duration / duration_;
    angular_.time_scale = angular_.own_duration / duration_;
  }
}

Twist TrapezoidProfile::at(double t) const {
  Twist tw;
  if (duration_ <= 0.0 || t < 0.0 || t >= duration_) return tw;
  tw.linear = linear_.direction * linear_.speed(t * linear_.time_scale) * linear_.time_scale;
  tw.angular =
      angular_.direction * angular_.speed(t * angular_.time_scale) * angular_.time_scale;
  return tw;
}

Pose PegInHoleParams::approach_pose() const {
  Pose above = hole_pose;
  above.translation -= approach_height * (hole_pose.orientation * Vec3::UnitZ());
  above.orientation = above.orientation * quat_exp(Vec3(phi_init, 0.0, 0.0));
  above.canonicalize();
  return above;
}

PegInHoleParams PegInHoleParams::for_scenario(const ScenarioSpec& scenario) {
  PegInHoleParams p;
  p.depth = scenario.depth;
  p.roi_radius = scenario.roi_radius;
  p.a_r = scenario.max_rot_amplitude;
  if (scenario.kind == ScenarioKind::key) {
    p.learn_phi_init = false;  // chamfers make the initial alignment easy
    p.phi_init = 0.0;
  }
  return p;
}

bool PegInHoleParams::is_valid() const {
  return depth > 0 && roi_radius > 0 && xdot_max_lin > 0 && xdot_max_ang > 0 &&
         xddot_max_lin > 0 && xddot_max_ang > 0 && f_c >= 0 && s >= 0 && s <= 1 &&
         a_t >= 0 && a_r >= 0 && omega_t >= 0 && omega_r >= 0 && phi_init >= 0 &&
         approach_height > 0;
}

std::pair<Twist, Wrench> mp_command(PegNode node, const PegInHoleParams& p,
                                    const PerceptVector& entry, double t) {
  Twist tw;
  Wrench wr;
  switch (node) {
    case PegNode::n1: {
      const TrapezoidProfile prof(entry.pose, p.approach_pose(), p.s * p.xdot_max_lin,
                                  p.xddot_max_lin, p.s * p.xdot_max_ang, p.xddot_max_ang);
      tw = prof.at(t);
      break;
    }
    case PegNode::n2:
      tw.linear = Vec3(0, 0, p.s * p.xdot_max_lin);
      break;
    case PegNode::n3:
      tw.linear = Vec3(p.s * p.xdot_max_lin, 0, 0);
      wr.force = Vec3(0, 0, p.f_c);
      break;
    case PegNode::n4: {
      const TrapezoidProfile prof(entry.pose, p.hole_pose, p.s * p.xdot_max_lin,
                                  p.xddot_max_lin, p.s * p.xdot_max_ang, p.xddot_max_ang);
      tw = prof.at(t);
      wr.force = Vec3(p.f_c, 0, p.f_c);
      break;
    }
    case PegNode::n5: {
      const double wt = 2.0 * M_PI * p.omega_t;
      const double wr_ = 2.0 * M_PI * p.omega_r;
      tw.linear = Vec3(p.a_t * std::sin(wt * t), p.a_t * std::sin(0.75 * wt * t),
                       p.s * p.xdot_max_lin);
      tw.angular = Vec3(p.a_r * std::sin(wr_ * t), p.a_r * std::sin(0.75 * wr_ * t), 0.0);
      break;
    }
  }
  return {tw, wr};
}

SkillGraph build_peg_in_hole(const PegInHoleParams& params) {
  if (!params.is_valid()) throw std::invalid_argument("invalid peg-in-hole parameters");

  SkillGraph g;
  const PegInHoleParams p = params;  // captured by value in every closure

  auto make_node = [&](const std::string& name, PegNode id) {
    ManipulationPrimitive mp;
    mp.name = name;
    mp.twist_generator = [p, id](const PerceptVector& entry, double t) {
      return mp_command(id, p, entry, t).first;
    };
    mp.wrench_generator = [p, id](const PerceptVector& entry, double t) {
      return mp_command(id, p, entry, t).second;
    };
    return mp;
  };
  g.nodes = {make_node("n1", PegNode::n1), make_node("n2", PegNode::n2),
             make_node("n3", PegNode::n3), make_node("n4", PegNode::n4),
             make_node("n5", PegNode::n5)};

  auto duration_trigger = [p](PegNode id) {
    Condition c;
    c.kind = ConditionKind::success;
    c.membership = [p, id](const PerceptVector&, double t, const PerceptVector& entry) {
      const Pose goal = id == PegNode::n1 ? p.approach_pose() : p.hole_pose;
      const TrapezoidProfile prof(entry.pose, goal, p.s * p.xdot_max_lin, p.xddot_max_lin,
                                  p.s * p.xdot_max_ang, p.xddot_max_ang);
      return t >= prof.duration();
    };
    return c;
  };
  auto force_trigger = [p](int axis) {
    Condition c;
    c.kind = ConditionKind::success;
    c.membership = [p, axis](const PerceptVector& s, double, const PerceptVector&) {
      return std::abs(s.external_wrench.force[axis]) >= p.f_c;
    };
    return c;
  };

  g.transitions = {
      {"n1", "n2", duration_trigger(PegNode::n1)},
      {"n2", "n3", force_trigger(2)},
      {"n3", "n4", force_trigger(0)},
      {"n4", "n5", duration_trigger(PegNode::n4)},
  };

  g.precondition.kind = ConditionKind::pre;
  g.precondition.membership = [p](const PerceptVector& s, double, const PerceptVector&) {
    return s.grasped &&
           (s.pose.translation - p.approach_pose().translation).norm() <= kPreconditionRadius;
  };

  g.error_condition.kind = ConditionKind::error;
  g.error_condition.membership = [p](const PerceptVector& s, double t, const PerceptVector&) {
    if (t > 15.0) return true;
    if ((s.pose.translation - p.hole_pose.translation).norm() > p.roi_radius) return true;
    if (s.external_wrench.force.cwiseAbs().maxCoeff() > p.safety_force) return true;
    if (s.external_wrench.torque.cwiseAbs().maxCoeff() > p.safety_torque) return true;
    return false;
  };

  g.success_condition.kind = ConditionKind::success;
  g.success_condition.membership = [p](const PerceptVector& s, double, const PerceptVector&) {
    const Vec3 in_hole = p.hole_pose.orientation.conjugate() *
                         (s.pose.translation - p.hole_pose.translation);
    return in_hole.z() >= p.depth;
  };

  g.metric.t_max = 15.0;
  g.metric.penalty_weight = 1.0;

  g.context_params = {{"depth", p.depth},
                      {"roi_radius", p.roi_radius},
                      {"a_r", p.a_r},
                      {"xdot_max_lin", p.xdot_max_lin},
                      {"xdot_max_ang", p.xdot_max_ang},
                      {"approach_height", p.approach_height}};
  g.learned_params = {
      {"alpha_lin", 0.0, 0.4},     {"alpha_ang", 0.0, 1.1765},
      {"beta_lin", 0.0, 200000.0}, {"beta_ang", 0.0, 173010.0},
      {"gamma_alpha_lin", 0.0, 5e-4}, {"gamma_alpha_ang", 0.0, 3.4e-4},
      {"gamma_beta_lin", 0.0, 0.0},   {"gamma_beta_ang", 0.0, 0.0},
      {"f_c", 5.0, 15.0},          {"s", 0.0, 1.0},
      {"a_t", 0.0, 0.005},         {"omega_t", 0.0, 3.2},
      {"omega_r", 0.0, 4.5},
      {"phi_init", 0.0, p.learn_phi_init ? 0.349 : 0.0},
  };
  return g;
}

SlewLimits peg_in_hole_slew(const PegInHoleParams& params) {
  SlewLimits s;
  s.twist_rate = MetaParams::broadcast(params.xddot_max_lin, params.xddot_max_ang);
  s.wrench_rate = MetaParams::broadcast(100.0, 10.0);
  return s;
}

}  // namespace skillsim
