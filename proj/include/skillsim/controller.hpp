#pragma once

#include "skillsim/geometry.hpp"

namespace skillsim {

/// Learning rates and forgetting factors of the adaptation laws, one entry
/// per task-space axis (x,y,z translational then rotational).
struct MetaParams {
  Vec6 alpha = Vec6::Zero();
  Vec6 beta = Vec6::Zero();
  Vec6 gamma_alpha = Vec6::Zero();
  Vec6 gamma_beta = Vec6::Zero();

  /// Broadcasts (translational, rotational) pairs onto the 6 axes.
  static Vec6 broadcast(double translational, double rotational);
};

struct ControllerLimits {
  Vec6 K_max;      // N/m | Nm/rad
  Vec6 Kdot_max;   // N/(m s) | Nm/(rad s)
  Vec6 F_max;      // N | Nm
  Vec6 Fdot_max;   // N/s | Nm/s
  Vec6 e_max;      // m | rad
  Vec6 xdot_max;   // m/s | rad/s

  static ControllerLimits defaults();
  bool is_valid() const;
};

struct ControllerGains {
  double kappa = 0.01;        // s, > 0
  double damping_ratio = 0.7; // (0, 1]
  double period = 0.001;      // s, sample time
};

/// Time-varying controller state: diagonal stiffness, adapted feed-forward
/// wrench, and the desired pose integrated from commanded twists.
struct ControllerState {
  Vec6 K = Vec6::Zero();
  Wrench F_ff;
  Pose desired_pose;
};

/// Upper bounds on the meta parameters implied by the stiffness / wrench
/// magnitude and rate limits of the plant. The stiffness bound comes from the
/// maximum adaptation speed reached at K = 0 and e = e_max; the feed-forward
/// bound is built the same way with e_max as the reference tracking error.
MetaParams meta_bounds(const ControllerLimits& limits, double period);

/// epsilon = e + kappa * edot, componentwise.
Vec6 tracking_error(const Vec6& e, const Vec6& edot, double kappa);

/// One forward-Euler adaptation step over a controller period. Rates are
/// clamped to Fdot_max / Kdot_max before integration; K and F_ff are clamped
/// to their magnitude limits afterwards.
ControllerState adapt_step(const ControllerState& state, const Vec6& eps, const Vec6& e,
                           const MetaParams& meta, const ControllerLimits& limits,
                           double period);

/// Diagonal damping from the factorization design D = 2 zeta sqrt(K * inertia).
Vec6 damping_for(const Vec6& K, const Vec6& inertia, double zeta);

/// Commanded Cartesian wrench u = F_ff + F_d + K.e + D.edot. Positive error
/// (desired ahead of current) produces a wrench driving the plant toward the
/// desired pose.
Wrench control_wrench(const ControllerState& state, const Vec6& e, const Vec6& edot,
                      const Wrench& F_d, const Vec6& D);

/// Convenience wrapper driving the adaptive impedance loop: integrates the
/// commanded twist into a desired pose (saturated to e_max around the current
/// pose), adapts K and F_ff, and returns the commanded wrench.
class ImpedanceController {
 public:
  ImpedanceController(ControllerLimits limits, ControllerGains gains, MetaParams meta,
                      Vec6 initial_K, Vec6 inertia);

  /// One control cycle. Inputs are expressed in the task frame.
  Wrench step(const Twist& commanded_twist, const Wrench& commanded_wrench,
              const PerceptVector& percept);

  void reset(const Pose& desired_pose);

  const ControllerState& state() const { return state_; }
  const ControllerLimits& limits() const { return limits_; }

 private:
  ControllerLimits limits_;
  ControllerGains gains_;
  MetaParams meta_;
  Vec6 inertia_;
  ControllerState state_;
  bool initialized_ = false;
};

}  // namespace skillsim
