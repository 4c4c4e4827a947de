#include "skillsim/bayes_opt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace skillsim {
namespace {

constexpr int kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37,
                           41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89};

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

double success_probability(const GpModel& success_model, const Eigen::VectorXd& x) {
  return std::clamp(success_model.predict(x).mean, 0.0, 1.0);
}

}  // namespace

double expected_improvement(double mean, double var, double best) {
  if (var <= 1e-16) return std::max(0.0, best - mean);
  const double sd = std::sqrt(var);
  const double z = (best - mean) / sd;
  return (best - mean) * normal_cdf(z) + sd * normal_pdf(z);
}

Eigen::VectorXd halton_point(int index, int dim) {
  if (dim > static_cast<int>(std::size(kPrimes)))
    throw std::invalid_argument("halton_point: dimension too large");
  Eigen::VectorXd p(dim);
  for (int j = 0; j < dim; ++j) {
    const int base = kPrimes[j];
    double f = 1.0, value = 0.0;
    for (int i = index; i > 0; i /= base) {
      f /= base;
      value += f * (i % base);
    }
    p[j] = value;
  }
  return p;
}

BoProposal bo_propose(const GpModel& cost_model, const GpModel& success_model,
                      std::optional<double> best_feasible_cost, const ParamDomain& domain,
                      Rng& rng, int grid_size) {
  const int d = domain.dim();
  auto acquisition = [&](const Eigen::VectorXd& x) {
    const double pr = success_probability(success_model, x);
    if (!best_feasible_cost) return pr;
    const auto pred = cost_model.predict(x);
    return expected_improvement(pred.mean, pred.var, *best_feasible_cost) * pr;
  };

  std::vector<std::pair<double, Eigen::VectorXd>> scored;
  scored.reserve(grid_size);
  for (int i = 1; i <= grid_size; ++i) {
    Eigen::VectorXd x = halton_point(i, d);
    scored.emplace_back(acquisition(x), std::move(x));
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });

  // Local refinement around the best grid points.
  std::normal_distribution<double> gauss(0.0, 0.05);
  double best_acq = scored.front().first;
  Eigen::VectorXd best_x = scored.front().second;
  const int seeds = std::min<std::size_t>(5, scored.size());
  for (int s = 0; s < seeds; ++s) {
    Eigen::VectorXd center = scored[s].second;
    double center_acq = scored[s].first;
    for (int it = 0; it < 20; ++it) {
      Eigen::VectorXd probe = center;
      for (int j = 0; j < d; ++j) probe[j] = std::clamp(probe[j] + gauss(rng), 0.0, 1.0);
      const double a = acquisition(probe);
      if (a > center_acq) {
        center_acq = a;
        center = probe;
      }
    }
    if (center_acq > best_acq) {
      best_acq = center_acq;
      best_x = center;
    }
  }

  BoProposal out;
  if (!std::isfinite(best_acq) || best_acq <= 1e-12) {
    // Degenerate model: nothing to gain anywhere it can see.
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    Eigen::VectorXd x(d);
    for (int j = 0; j < d; ++j) x[j] = u01(rng);
    out.candidate = domain.from_unit(x);
    out.acquisition = 0.0;
    out.stalled = true;
    return out;
  }
  out.candidate = domain.from_unit(best_x);
  out.acquisition = best_acq;
  return out;
}

}  // namespace skillsim
