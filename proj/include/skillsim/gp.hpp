#pragma once

#include <optional>

#include "skillsim/param_domain.hpp"
#include "skillsim/random.hpp"

namespace skillsim {

/// ARD Matern 5/2 covariance
///   B(x, x') = theta0 (1 + sqrt(5 r^2) + 5/3 r^2) exp(-sqrt(5 r^2)),
///   r^2 = sum_i (x_i - x'_i)^2 / theta_i^2.
double matern52(const Eigen::VectorXd& x, const Eigen::VectorXd& xp, double theta0,
                const Eigen::VectorXd& length_scales);

/// Kernel hyperparameters plus the constant mean, one draw of the posterior.
struct GpHyper {
  Eigen::VectorXd length_scales;
  double amplitude = 1.0;  // theta0
  double noise = 1e-4;     // nu, observation noise variance
  double mean = 0.0;       // constant mean m
};

/// Gaussian process regressor whose hyperparameters are integrated out over a
/// set of slice-sampling draws; predictions are the moment-matched mixture.
class GpModel {
 public:
  struct Prediction {
    double mean = 0.0;
    double var = 0.0;  // latent variance, excludes observation noise
  };

  Prediction predict(const Eigen::VectorXd& x) const;

  int sample_count() const { return static_cast<int>(samples_.size()); }
  const GpHyper& hyper(int i) const { return samples_[i].hyper; }
  double output_scale() const { return y_scale_; }

 private:
  friend GpModel gp_fit(const Eigen::MatrixXd&, const Eigen::VectorXd&, Rng&, int, int);

  struct Sample {
    GpHyper hyper;
    Eigen::LLT<Eigen::MatrixXd> chol;
    Eigen::VectorXd alpha;  // (K + nu I)^-1 (y - m)
  };

  Eigen::MatrixXd X_;
  double y_offset_ = 0.0, y_scale_ = 1.0;
  std::vector<Sample> samples_;
};

/// Fits the hyperparameters by univariate slice sampling of the log marginal
/// likelihood (log-scale parameterization, weak priors). Keeps `retained`
/// draws after `burn_in` sweeps. Throws on fewer than 2 observations or a
/// kernel matrix that stays indefinite after the maximum jitter of 1e-8.
GpModel gp_fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& outputs, Rng& rng,
               int burn_in = 20, int retained = 10);

}  // namespace skillsim
