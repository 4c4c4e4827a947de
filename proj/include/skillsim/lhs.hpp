#pragma once

#include "skillsim/param_domain.hpp"
#include "skillsim/random.hpp"

namespace skillsim {

/// Latin hypercube sample: for every free dimension each of the n equal-width
/// strata receives exactly one point, at a uniform offset, under a uniform
/// random stratum permutation.
std::vector<Candidate> lhs(int n, const ParamDomain& domain, Rng& rng);

}  // namespace skillsim
