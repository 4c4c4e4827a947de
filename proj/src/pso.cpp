#include "skillsim/pso.hpp"

#include <limits>
#include <stdexcept>

namespace skillsim {

PsoState pso_init(const ParamDomain& domain, int swarm_size, double c1, double c2, Rng& rng) {
  if (swarm_size < 1) throw std::invalid_argument("pso: swarm size must be >= 1");
  PsoState s;
  s.dim = domain.dim();
  s.swarm_size = swarm_size;
  s.c1 = c1;
  s.c2 = c2;
  s.positions.resize(swarm_size, s.dim);
  s.velocities.resize(swarm_size, s.dim);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_real_distribution<double> uv(-1.0, 1.0);
  for (int i = 0; i < swarm_size; ++i)
    for (int j = 0; j < s.dim; ++j) {
      s.positions(i, j) = u01(rng);
      s.velocities(i, j) = uv(rng);
    }
  s.personal_best = s.positions;
  s.personal_best_cost =
      Eigen::VectorXd::Constant(swarm_size, std::numeric_limits<double>::infinity());
  s.global_best = s.positions.row(0).transpose();
  s.global_best_cost = std::numeric_limits<double>::infinity();
  return s;
}

std::vector<Candidate> pso_positions(const PsoState& state, const ParamDomain& domain) {
  std::vector<Candidate> out;
  out.reserve(state.swarm_size);
  for (int i = 0; i < state.swarm_size; ++i)
    out.push_back(domain.from_unit(state.positions.row(i).transpose()));
  return out;
}

std::vector<Candidate> pso_step(PsoState& state, const std::vector<ObjectiveResult>& results,
                                const ParamDomain& domain, Rng& rng) {
  if (results.size() != static_cast<std::size_t>(state.swarm_size))
    throw std::logic_error("pso_step: need one result per particle");

  for (int i = 0; i < state.swarm_size; ++i) {
    const double cost = results[i].cost;
    if (cost < state.personal_best_cost[i]) {
      state.personal_best_cost[i] = cost;
      state.personal_best.row(i) = results[i].candidate.unit.transpose();
    }
    if (cost < state.global_best_cost) {
      state.global_best_cost = cost;
      state.global_best = results[i].candidate.unit;
    }
  }
  state.evaluated_once = true;

  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < state.swarm_size; ++i) {
    for (int j = 0; j < state.dim; ++j) {
      const double r1 = u01(rng);
      const double r2 = u01(rng);
      double v = pso_velocity_update(state.positions(i, j), state.velocities(i, j),
                                     state.personal_best(i, j), state.global_best[j],
                                     state.c1, state.c2, r1, r2, state.inertia);
      double x = state.positions(i, j) + v;
      if (x < 0.0) {
        x = 0.0;
        v = 0.0;
      } else if (x > 1.0) {
        x = 1.0;
        v = 0.0;
      }
      state.velocities(i, j) = v;
      state.positions(i, j) = x;
    }
  }
  return pso_positions(state, domain);
}

double pso_velocity_update(double x, double v, double personal, double global, double c1,
                           double c2, double r1, double r2, double inertia) {
  return inertia * v + c1 * r1 * (personal - x) + c2 * r2 * (global - x);
}

}  // namespace skillsim
