#include "skillsim/param_domain.hpp"

#include <stdexcept>

namespace skillsim {

ParamDomain::ParamDomain(std::vector<ParameterSpec> specs) : specs_(std::move(specs)) {
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    const auto& s = specs_[i];
    if (!(s.lower <= s.upper)) throw std::invalid_argument("domain bounds inverted: " + s.name);
    if (s.lower < s.upper) free_.push_back(static_cast<int>(i));
  }
}

Candidate ParamDomain::from_unit(const Eigen::VectorXd& unit) const {
  if (unit.size() != dim()) throw std::invalid_argument("unit vector has wrong dimension");
  Candidate c;
  c.unit = unit.cwiseMax(0.0).cwiseMin(1.0);
  c.physical.resize(physical_size());
  for (int i = 0; i < physical_size(); ++i) c.physical[i] = specs_[i].lower;
  for (int k = 0; k < dim(); ++k) {
    const auto& s = specs_[free_[k]];
    c.physical[free_[k]] = s.lower + c.unit[k] * (s.upper - s.lower);
  }
  return c;
}

Eigen::VectorXd ParamDomain::to_unit(const Eigen::VectorXd& physical) const {
  if (physical.size() != physical_size())
    throw std::invalid_argument("physical vector has wrong dimension");
  Eigen::VectorXd u(dim());
  for (int k = 0; k < dim(); ++k) {
    const auto& s = specs_[free_[k]];
    u[k] = (physical[free_[k]] - s.lower) / (s.upper - s.lower);
  }
  return u.cwiseMax(0.0).cwiseMin(1.0);
}

double ParamDomain::physical_value(const Candidate& c, const std::string& name) const {
  for (int i = 0; i < physical_size(); ++i)
    if (specs_[i].name == name) return c.physical[i];
  throw std::out_of_range("unknown parameter: " + name);
}

}  // namespace skillsim
