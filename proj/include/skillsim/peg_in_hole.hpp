#pragma once

#include "skillsim/controller.hpp"
#include "skillsim/skill_graph.hpp"

namespace skillsim {

/// Time-synchronized point-to-point motion: both channels accelerate at their
/// scaled limits, cruise, and come to rest at the goal together. Degenerates
/// to a triangular profile for short moves.
class TrapezoidProfile {
 public:
  TrapezoidProfile() = default;
  TrapezoidProfile(const Pose& start, const Pose& goal, double v_lin, double a_lin,
                   double v_ang, double a_ang);

  double duration() const { return duration_; }
  Twist at(double t) const;

 private:
  struct Channel {
    Vec3 direction = Vec3::Zero();
    double distance = 0.0;
    double v = 0.0;
    double a = 0.0;
    double own_duration = 0.0;
    double t_acc = 0.0;
    double time_scale = 1.0;  // own time per profile time

    double speed(double own_t) const;
  };
  Channel linear_;
  Channel angular_;
  double duration_ = 0.0;
};

/// Parameters of the peg-in-hole skill, all expressed in the task frame (the
/// estimated hole frame, z axis pointing into the hole).
struct PegInHoleParams {
  Pose hole_pose;                 // T_h, estimated; identity in the task frame
  double roi_radius = 0.05;       // m
  double depth = 0.0;             // m, d
  double xdot_max_lin = 0.1;      // m/s
  double xdot_max_ang = 1.0;      // rad/s
  double xddot_max_lin = 2.0;     // m/s^2
  double xddot_max_ang = 10.0;    // rad/s^2
  double approach_height = 0.01;  // m, T_a above T_h along the hole axis
  double safety_force = 30.0;     // N, error condition
  double safety_torque = 3.0;     // Nm

  // Learned skill parameters.
  bool learn_phi_init = true;  // the key task fixes phi_init = 0
  double phi_init = 0.0;  // rad, initial tilt about the x axis
  double f_c = 10.0;      // N, contact force command and transition threshold
  double s = 0.5;         // speed factor in (0, 1]
  double a_t = 0.0;       // m, translational oscillation amplitude
  double a_r = 0.0;       // rad, rotational oscillation amplitude (context)
  double omega_t = 0.0;   // Hz
  double omega_r = 0.0;   // Hz

  /// Approach pose: approach_height above the hole along its axis, tilted by
  /// phi_init about the task x axis.
  Pose approach_pose() const;

  static PegInHoleParams for_scenario(const ScenarioSpec& scenario);
  bool is_valid() const;
};

enum class PegNode { n1, n2, n3, n4, n5 };

/// The published command vectors of the five manipulation primitives.
std::pair<Twist, Wrench> mp_command(PegNode node, const PegInHoleParams& params,
                                    const PerceptVector& entry, double t_in_node);

/// Builds the five-node skill graph with its transitions (motion primitives
/// fire on profile completion, contact primitives on the measured wrench
/// crossing f_c), boundary conditions, and the execution-time metric.
SkillGraph build_peg_in_hole(const PegInHoleParams& params);

/// Slew limits used when executing the skill.
SlewLimits peg_in_hole_slew(const PegInHoleParams& params);

}  // namespace skillsim
