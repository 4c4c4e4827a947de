#pragma once

#include "skillsim/param_domain.hpp"
#include "skillsim/random.hpp"

namespace skillsim {

/// State of the covariance matrix adaptation evolution strategy, searching the
/// unit cube. Strategy constants follow the standard recommended settings for
/// the given dimension and population size.
struct CmaState {
  int dim = 0;
  int lambda = 0;
  int mu = 0;
  Eigen::VectorXd weights;       // mu recombination weights, sum 1
  double mu_eff = 0.0;
  double c_sigma = 0.0, d_sigma = 0.0, c_c = 0.0, c_1 = 0.0, c_mu = 0.0, chi_n = 0.0;

  Eigen::VectorXd mean;
  double sigma = 0.0;
  Eigen::MatrixXd C;             // symmetric positive definite
  Eigen::VectorXd p_sigma, p_c;
  int generation = 0;

  // Pending ask batch, consumed by the matching tell.
  std::vector<Candidate> pending;
};

CmaState cma_init(const ParamDomain& domain, int lambda, double sigma0,
                  const Eigen::VectorXd& mean0);

/// Samples lambda candidates from N(mean, sigma^2 C), clamped to the cube.
std::vector<Candidate> cma_ask(CmaState& state, const ParamDomain& domain, Rng& rng);

/// Rank-mu update of mean, evolution paths, covariance, and step size from
/// the evaluated batch. The batch must be exactly the one returned by the
/// preceding ask; costs are minimized.
void cma_tell(CmaState& state, const std::vector<ObjectiveResult>& results);

/// Smallest covariance eigenvalue after regularization (for diagnostics).
double cma_min_eigenvalue(const CmaState& state);

}  // namespace skillsim
