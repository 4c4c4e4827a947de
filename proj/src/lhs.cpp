#include "skillsim/lhs.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace skillsim {

std::vector<Candidate> lhs(int n, const ParamDomain& domain, Rng& rng) {
  if (n < 1) throw std::invalid_argument("lhs: n must be >= 1");
  const int d = domain.dim();
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  Eigen::MatrixXd unit(n, d);
  std::vector<int> perm(n);
  for (int j = 0; j < d; ++j) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int i = 0; i < n; ++i) unit(i, j) = (perm[i] + u01(rng)) / n;
  }

  std::vector<Candidate> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(domain.from_unit(unit.row(i).transpose()));
  return out;
}

}  // namespace skillsim
