#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "skillsim/skill_graph.hpp"

namespace skillsim {

/// A point of the search space: coordinates in the unit cube over the free
/// dimensions plus the full denormalized physical vector (frozen parameters
/// included at their fixed values).
struct Candidate {
  Eigen::VectorXd unit;      // in [0,1]^dim
  Eigen::VectorXd physical;  // one entry per declared parameter
};

struct ObjectiveResult {
  double cost = 0.0;
  bool success = false;  // r
  Candidate candidate;
};

/// Ordered physical parameter bounds with a bijection to the unit cube.
/// Frozen parameters (lower == upper) are excluded from the search dimensions
/// but kept in the physical vector.
class ParamDomain {
 public:
  ParamDomain() = default;
  explicit ParamDomain(std::vector<ParameterSpec> specs);

  int dim() const { return static_cast<int>(free_.size()); }
  int physical_size() const { return static_cast<int>(specs_.size()); }
  const std::vector<ParameterSpec>& specs() const { return specs_; }

  Candidate from_unit(const Eigen::VectorXd& unit) const;
  Eigen::VectorXd to_unit(const Eigen::VectorXd& physical) const;
  double physical_value(const Candidate& c, const std::string& name) const;

 private:
  std::vector<ParameterSpec> specs_;
  std::vector<int> free_;  // indices of searchable parameters
};

}  // namespace skillsim
