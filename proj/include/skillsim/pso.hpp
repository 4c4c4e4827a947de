#pragma once

#include <optional>

#include "skillsim/param_domain.hpp"
#include "skillsim/random.hpp"

namespace skillsim {

struct PsoState {
  int dim = 0;
  int swarm_size = 0;
  double c1 = 2.0, c2 = 2.0;
  double inertia = 1.0;

  Eigen::MatrixXd positions;   // swarm_size x dim, in the unit cube
  Eigen::MatrixXd velocities;  // swarm_size x dim
  Eigen::MatrixXd personal_best;
  Eigen::VectorXd personal_best_cost;
  Eigen::VectorXd global_best;
  double global_best_cost = 0.0;
  bool evaluated_once = false;
};

/// Positions uniform in the cube, velocities uniform in [-range, range] with
/// range equal to the cube side.
PsoState pso_init(const ParamDomain& domain, int swarm_size, double c1, double c2, Rng& rng);

std::vector<Candidate> pso_positions(const PsoState& state, const ParamDomain& domain);

/// Updates bests from the evaluated positions, then applies the velocity and
/// position update. Positions are clamped to the cube with the velocity
/// zeroed on clamped dimensions. Returns the next positions to evaluate.
std::vector<Candidate> pso_step(PsoState& state, const std::vector<ObjectiveResult>& results,
                                const ParamDomain& domain, Rng& rng);

/// Per-dimension velocity update, exposed for checking against hand-computed
/// values: v' = inertia v + c1 r1 (p - x) + c2 r2 (g - x).
double pso_velocity_update(double x, double v, double personal, double global, double c1,
                           double c2, double r1, double r2, double inertia);

}  // namespace skillsim
