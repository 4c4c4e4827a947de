#pragma once

#include <vector>

namespace skillsim {

/// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// CDF and quantile of Student's t distribution with nu degrees of freedom.
double student_t_cdf(double t, double nu);
double student_t_quantile(double p, double nu);

struct ConfidenceInterval {
  double mean = 0.0;
  double half_width = 0.0;
  bool defined = false;  // false for fewer than 2 samples
};

/// Two-sided Student-t confidence interval for the mean at the given level
/// (0.90 for the experiment reports).
ConfidenceInterval mean_confidence(const std::vector<double>& xs, double level);

}  // namespace skillsim
