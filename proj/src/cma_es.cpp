#include "skillsim/cma_es.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace skillsim {
namespace {

constexpr double kMinEigenvalue = 1e-12;

void eigen_decompose(const Eigen::MatrixXd& C, Eigen::MatrixXd& B, Eigen::VectorXd& D) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(C);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("cma-es: eigendecomposition failed");
  B = solver.eigenvectors();
  D = solver.eigenvalues().cwiseMax(kMinEigenvalue).cwiseSqrt();
}

}  // namespace

CmaState cma_init(const ParamDomain& domain, int lambda, double sigma0,
                  const Eigen::VectorXd& mean0) {
  const int n = domain.dim();
  if (n < 1) throw std::invalid_argument("cma-es: empty search space");
  if (lambda < 2) throw std::invalid_argument("cma-es: lambda must be >= 2");
  if (sigma0 <= 0) throw std::invalid_argument("cma-es: sigma0 must be positive");
  if (mean0.size() != n) throw std::invalid_argument("cma-es: mean has wrong dimension");

  CmaState s;
  s.dim = n;
  s.lambda = lambda;
  s.mu = lambda / 2;
  s.weights.resize(s.mu);
  for (int i = 0; i < s.mu; ++i)
    s.weights[i] = std::log(s.mu + 0.5) - std::log(i + 1.0);
  s.weights /= s.weights.sum();
  s.mu_eff = 1.0 / s.weights.squaredNorm();

  s.c_sigma = (s.mu_eff + 2.0) / (n + s.mu_eff + 5.0);
  s.d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((s.mu_eff - 1.0) / (n + 1.0)) - 1.0) +
              s.c_sigma;
  s.c_c = (4.0 + s.mu_eff / n) / (n + 4.0 + 2.0 * s.mu_eff / n);
  s.c_1 = 2.0 / ((n + 1.3) * (n + 1.3) + s.mu_eff);
  s.c_mu = std::min(1.0 - s.c_1, 2.0 * (s.mu_eff - 2.0 + 1.0 / s.mu_eff) /
                                     ((n + 2.0) * (n + 2.0) + s.mu_eff));
  s.chi_n = std::sqrt(static_cast<double>(n)) *
            (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));

  s.mean = mean0;
  s.sigma = sigma0;
  s.C = Eigen::MatrixXd::Identity(n, n);
  s.p_sigma = Eigen::VectorXd::Zero(n);
  s.p_c = Eigen::VectorXd::Zero(n);
  return s;
}

std::vector<Candidate> cma_ask(CmaState& state, const ParamDomain& domain, Rng& rng) {
  if (!state.pending.empty())
    throw std::logic_error("cma_ask: previous batch not reported yet");

  Eigen::MatrixXd B;
  Eigen::VectorXd D;
  eigen_decompose(state.C, B, D);

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Candidate> batch;
  batch.reserve(state.lambda);
  for (int k = 0; k < state.lambda; ++k) {
    Eigen::VectorXd z(state.dim);
    for (int i = 0; i < state.dim; ++i) z[i] = gauss(rng);
    const Eigen::VectorXd x = state.mean + state.sigma * (B * D.cwiseProduct(z).eval());
    batch.push_back(domain.from_unit(x.cwiseMax(0.0).cwiseMin(1.0)));
  }
  state.pending = batch;
  return batch;
}

void cma_tell(CmaState& state, const std::vector<ObjectiveResult>& results) {
  if (results.size() != state.pending.size() ||
      results.size() != static_cast<std::size_t>(state.lambda))
    throw std::logic_error("cma_tell: batch does not match the preceding ask");
  for (std::size_t i = 0; i < results.size(); ++i) {
    if ((results[i].candidate.unit - state.pending[i].unit).norm() > 1e-12)
      throw std::logic_error("cma_tell: candidate differs from the asked batch");
  }
  state.pending.clear();

  std::vector<int> order(results.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return results[a].cost < results[b].cost; });

  const int n = state.dim;
  const Eigen::VectorXd old_mean = state.mean;
  Eigen::VectorXd new_mean = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < state.mu; ++i)
    new_mean += state.weights[i] * results[order[i]].candidate.unit;

  const Eigen::VectorXd shift = (new_mean - old_mean) / state.sigma;

  Eigen::MatrixXd B;
  Eigen::VectorXd D;
  eigen_decompose(state.C, B, D);
  const Eigen::VectorXd c_inv_sqrt_shift =
      B * (B.transpose() * shift).cwiseQuotient(D).eval();

  state.p_sigma = (1.0 - state.c_sigma) * state.p_sigma +
                  std::sqrt(state.c_sigma * (2.0 - state.c_sigma) * state.mu_eff) *
                      c_inv_sqrt_shift;

  const double expected_decay =
      std::sqrt(1.0 - std::pow(1.0 - state.c_sigma, 2.0 * (state.generation + 1)));
  const bool hsig = state.p_sigma.norm() / expected_decay / state.chi_n <
                    1.4 + 2.0 / (n + 1.0);

  state.p_c = (1.0 - state.c_c) * state.p_c;
  if (hsig)
    state.p_c += std::sqrt(state.c_c * (2.0 - state.c_c) * state.mu_eff) * shift;

  Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < state.mu; ++i) {
    const Eigen::VectorXd y =
        (results[order[i]].candidate.unit - old_mean) / state.sigma;
    rank_mu += state.weights[i] * y * y.transpose();
  }

  const double dispersion_fix = (1.0 - (hsig ? 1.0 : 0.0)) * state.c_c * (2.0 - state.c_c);
  state.C = (1.0 - state.c_1 - state.c_mu) * state.C +
            state.c_1 * (state.p_c * state.p_c.transpose() + dispersion_fix * state.C) +
            state.c_mu * rank_mu;
  state.C = 0.5 * (state.C + state.C.transpose()).eval();

  // Keep C strictly positive definite.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(state.C);
  if (solver.eigenvalues().minCoeff() < kMinEigenvalue) {
    const Eigen::VectorXd fixed = solver.eigenvalues().cwiseMax(kMinEigenvalue);
    state.C = solver.eigenvectors() * fixed.asDiagonal() *
              solver.eigenvectors().transpose();
    state.C = 0.5 * (state.C + state.C.transpose()).eval();
  }

  state.sigma *= std::exp((state.c_sigma / state.d_sigma) *
                          (state.p_sigma.norm() / state.chi_n - 1.0));
  state.mean = new_mean;
  ++state.generation;
}

double cma_min_eigenvalue(const CmaState& state) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(state.C);
  return solver.eigenvalues().minCoeff();
}

}  // namespace skillsim
