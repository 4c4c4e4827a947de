#pragma once

#include <optional>

#include "skillsim/gp.hpp"

namespace skillsim {

/// Expected improvement below `best` for a N(mean, var) belief; the zero
/// variance limit is max(0, best - mean).
double expected_improvement(double mean, double var, double best);

struct BoProposal {
  Candidate candidate;
  double acquisition = 0.0;
  bool stalled = false;  // degenerate model, candidate drawn uniformly
};

/// Maximizes EI(x) * Pr(success | x) over a Halton point set plus local
/// refinement around the best grid points. Without any feasible observation
/// the proposal maximizes the success probability alone.
BoProposal bo_propose(const GpModel& cost_model, const GpModel& success_model,
                      std::optional<double> best_feasible_cost, const ParamDomain& domain,
                      Rng& rng, int grid_size = 2048);

/// Halton sequence point (1-based index) in [0,1]^dim.
Eigen::VectorXd halton_point(int index, int dim);

}  // namespace skillsim
