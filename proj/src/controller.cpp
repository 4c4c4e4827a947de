#include "skillsim/controller.hpp"

#include <cmath>
#include <stdexcept>

namespace skillsim {

Vec6 MetaParams::broadcast(double translational, double rotational) {
  Vec6 v;
  v << translational, translational, translational, rotational, rotational, rotational;
  return v;
}

ControllerLimits ControllerLimits::defaults() {
  ControllerLimits lim;
  lim.K_max = MetaParams::broadcast(2000.0, 200.0);
  lim.Kdot_max = MetaParams::broadcast(5000.0, 500.0);
  lim.F_max = MetaParams::broadcast(10.0, 5.0);
  lim.Fdot_max = MetaParams::broadcast(1.0, 0.5);
  lim.e_max = MetaParams::broadcast(0.005, 0.017);
  lim.xdot_max = MetaParams::broadcast(0.1, 1.0);
  return lim;
}

bool ControllerLimits::is_valid() const {
  return (K_max.array() > 0).all() && (Kdot_max.array() > 0).all() &&
         (F_max.array() > 0).all() && (Fdot_max.array() > 0).all() &&
         (e_max.array() > 0).all() && (xdot_max.array() > 0).all();
}

MetaParams meta_bounds(const ControllerLimits& limits, double period) {
  if ((limits.e_max.array() <= 0).any())
    throw std::invalid_argument("meta_bounds: e_max must be positive");
  if (period <= 0) throw std::invalid_argument("meta_bounds: period must be positive");

  MetaParams b;
  b.beta = (limits.Kdot_max * period).cwiseQuotient(limits.e_max.cwiseProduct(limits.e_max));
  b.gamma_beta = limits.Kdot_max.cwiseQuotient(b.beta.cwiseProduct(limits.K_max));
  b.alpha = (limits.Fdot_max * period).cwiseQuotient(limits.e_max);
  b.gamma_alpha = limits.Fdot_max.cwiseQuotient(b.alpha.cwiseProduct(limits.F_max));
  return b;
}

Vec6 tracking_error(const Vec6& e, const Vec6& edot, double kappa) {
  return e + kappa * edot;
}

ControllerState adapt_step(const ControllerState& state, const Vec6& eps, const Vec6& e,
                           const MetaParams& meta, const ControllerLimits& limits,
                           double period) {
  const Vec6 F = state.F_ff.vector();
  Vec6 Fdot =
      (1.0 / period) * meta.alpha.cwiseProduct(eps - meta.gamma_alpha.cwiseProduct(F));
  Vec6 Kdot = (1.0 / period) *
              meta.beta.cwiseProduct(eps.cwiseProduct(e) - meta.gamma_beta.cwiseProduct(state.K));

  Fdot = Fdot.cwiseMax(-limits.Fdot_max).cwiseMin(limits.Fdot_max);
  Kdot = Kdot.cwiseMax(-limits.Kdot_max).cwiseMin(limits.Kdot_max);

  ControllerState out = state;
  out.F_ff = Wrench::from_vector(
      (F + Fdot * period).cwiseMax(-limits.F_max).cwiseMin(limits.F_max));
  out.K = (state.K + Kdot * period).cwiseMax(Vec6::Zero()).cwiseMin(limits.K_max);
  return out;
}

Vec6 damping_for(const Vec6& K, const Vec6& inertia, double zeta) {
  return 2.0 * zeta * K.cwiseProduct(inertia).cwiseSqrt();
}

Wrench control_wrench(const ControllerState& state, const Vec6& e, const Vec6& edot,
                      const Wrench& F_d, const Vec6& D) {
  const Vec6 u =
      state.F_ff.vector() + F_d.vector() + state.K.cwiseProduct(e) + D.cwiseProduct(edot);
  return Wrench::from_vector(u);
}

ImpedanceController::ImpedanceController(ControllerLimits limits, ControllerGains gains,
                                         MetaParams meta, Vec6 initial_K, Vec6 inertia)
    : limits_(std::move(limits)), gains_(gains), meta_(std::move(meta)),
      inertia_(std::move(inertia)) {
  if (!limits_.is_valid()) throw std::invalid_argument("controller limits must be positive");
  if (gains_.kappa <= 0 || gains_.period <= 0 || gains_.damping_ratio <= 0 ||
      gains_.damping_ratio > 1)
    throw std::invalid_argument("controller gains out of range");
  state_.K = initial_K.cwiseMax(Vec6::Zero()).cwiseMin(limits_.K_max);
}

void ImpedanceController::reset(const Pose& desired_pose) {
  state_.desired_pose = desired_pose;
  state_.F_ff = Wrench{};
  initialized_ = true;
}

Wrench ImpedanceController::step(const Twist& commanded_twist, const Wrench& commanded_wrench,
                                 const PerceptVector& percept) {
  if (!initialized_) reset(percept.pose);

  state_.desired_pose = integrate_twist(state_.desired_pose, commanded_twist, gains_.period);

  Vec6 e = pose_error(state_.desired_pose, percept.pose);
  const Vec6 e_sat = e.cwiseMax(-limits_.e_max).cwiseMin(limits_.e_max);
  if ((e.array() != e_sat.array()).any()) {
    // Anti-windup: keep the desired pose within e_max of the plant.
    state_.desired_pose = apply_error(percept.pose, e_sat);
    e = e_sat;
  }

  const Vec6 edot = commanded_twist.vector() - percept.twist.vector();
  const Vec6 eps = tracking_error(e, edot, gains_.kappa);

  state_ = [&] {
    ControllerState s = adapt_step(state_, eps, e, meta_, limits_, gains_.period);
    s.desired_pose = state_.desired_pose;
    return s;
  }();

  const Vec6 D = damping_for(state_.K, inertia_, gains_.damping_ratio);
  return control_wrench(state_, e, edot, commanded_wrench, D);
}

}  // namespace skillsim
