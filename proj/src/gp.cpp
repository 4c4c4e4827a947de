#include "skillsim/gp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace skillsim {
namespace {

constexpr double kMaxJitter = 1e-8;
constexpr double kMinNoise = 1e-9;

struct HyperVector {
  // theta = [log l_1..d, log theta0, log nu, m]
  Eigen::VectorXd v;
  int d;

  GpHyper unpack() const {
    GpHyper h;
    h.length_scales = v.head(d).array().exp();
    h.amplitude = std::exp(v[d]);
    h.noise = std::max(std::exp(v[d + 1]), kMinNoise);
    h.mean = v[d + 2];
    return h;
  }
};

Eigen::MatrixXd gram(const Eigen::MatrixXd& X, const GpHyper& h) {
  const int n = static_cast<int>(X.rows());
  Eigen::MatrixXd K(n, n);
  for (int i = 0; i < n; ++i) {
    K(i, i) = h.amplitude;
    for (int j = i + 1; j < n; ++j) {
      K(i, j) = K(j, i) = matern52(X.row(i).transpose(), X.row(j).transpose(),
                                   h.amplitude, h.length_scales);
    }
  }
  return K;
}

// Cholesky of K + (nu + jitter) I, escalating jitter until success.
bool factor(const Eigen::MatrixXd& K, double noise, Eigen::LLT<Eigen::MatrixXd>& llt) {
  const int n = static_cast<int>(K.rows());
  for (double jitter = 0.0; jitter <= kMaxJitter;
       jitter = jitter == 0.0 ? 1e-12 : jitter * 10.0) {
    llt.compute(K + (noise + jitter) * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() == Eigen::Success) return true;
  }
  return false;
}

double log_prior(const HyperVector& hv) {
  double lp = 0.0;
  auto normal_lp = [](double x, double mu, double sd) {
    const double z = (x - mu) / sd;
    return -0.5 * z * z;
  };
  for (int i = 0; i < hv.d; ++i) lp += normal_lp(hv.v[i], std::log(0.5), 1.5);
  lp += normal_lp(hv.v[hv.d], 0.0, 1.0);          // log amplitude, standardized outputs
  lp += normal_lp(hv.v[hv.d + 1], std::log(1e-4), 3.0);  // log noise
  lp += normal_lp(hv.v[hv.d + 2], 0.0, 2.0);      // mean
  return lp;
}

double log_posterior(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const HyperVector& hv) {
  const GpHyper h = hv.unpack();
  // Guard the sampler against escaping to useless scales.
  for (int i = 0; i < hv.d; ++i)
    if (hv.v[i] < std::log(1e-3) || hv.v[i] > std::log(1e2))
      return -std::numeric_limits<double>::infinity();
  if (hv.v[hv.d] < std::log(1e-6) || hv.v[hv.d] > std::log(1e4))
    return -std::numeric_limits<double>::infinity();
  if (hv.v[hv.d + 1] < std::log(1e-10) || hv.v[hv.d + 1] > std::log(1e2))
    return -std::numeric_limits<double>::infinity();

  Eigen::LLT<Eigen::MatrixXd> llt;
  if (!factor(gram(X, h), h.noise, llt))
    return -std::numeric_limits<double>::infinity();

  const Eigen::VectorXd resid = y.array() - h.mean;
  const Eigen::VectorXd alpha = llt.solve(resid);
  double log_det = 0.0;
  for (int i = 0; i < X.rows(); ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
  const double ll = -0.5 * resid.dot(alpha) - 0.5 * log_det -
                    0.5 * X.rows() * std::log(2.0 * M_PI);
  return ll + log_prior(hv);
}

// Univariate slice sampling sweep over every coordinate (Neal 2003).
void slice_sweep(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, HyperVector& hv,
                 Rng& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::exponential_distribution<double> exp1(1.0);
  constexpr double kWidth = 1.0;
  constexpr int kMaxStepOut = 8;
  constexpr int kMaxShrink = 100;

  for (int j = 0; j < hv.v.size(); ++j) {
    const double x0 = hv.v[j];
    const double level = log_posterior(X, y, hv) - exp1(rng);

    double lo = x0 - kWidth * u01(rng);
    double hi = lo + kWidth;
    auto logp_at = [&](double val) {
      HyperVector probe = hv;
      probe.v[j] = val;
      return log_posterior(X, y, probe);
    };
    for (int k = 0; k < kMaxStepOut && logp_at(lo) > level; ++k) lo -= kWidth;
    for (int k = 0; k < kMaxStepOut && logp_at(hi) > level; ++k) hi += kWidth;

    for (int k = 0; k < kMaxShrink; ++k) {
      const double cand = lo + (hi - lo) * u01(rng);
      if (logp_at(cand) > level) {
        hv.v[j] = cand;
        break;
      }
      (cand < x0 ? lo : hi) = cand;
      if (k == kMaxShrink - 1) hv.v[j] = x0;  // stuck: keep the old value
    }
  }
}

}  // namespace

double matern52(const Eigen::VectorXd& x, const Eigen::VectorXd& xp, double theta0,
                const Eigen::VectorXd& length_scales) {
  if (x.size() != xp.size() || x.size() != length_scales.size())
    throw std::invalid_argument("matern52: dimension mismatch");
  const double r2 = ((x - xp).cwiseQuotient(length_scales)).squaredNorm();
  const double sr = std::sqrt(5.0 * r2);
  return theta0 * (1.0 + sr + (5.0 / 3.0) * r2) * std::exp(-sr);
}

GpModel::Prediction GpModel::predict(const Eigen::VectorXd& x) const {
  if (samples_.empty()) throw std::logic_error("gp predict: model not fitted");
  const int n = static_cast<int>(X_.rows());
  double mean_acc = 0.0, second_acc = 0.0;
  for (const auto& s : samples_) {
    Eigen::VectorXd k_star(n);
    for (int i = 0; i < n; ++i)
      k_star[i] =
          matern52(X_.row(i).transpose(), x, s.hyper.amplitude, s.hyper.length_scales);
    const double mu = s.hyper.mean + k_star.dot(s.alpha);
    const double var =
        std::max(0.0, s.hyper.amplitude - k_star.dot(s.chol.solve(k_star)));
    mean_acc += mu;
    second_acc += var + mu * mu;
  }
  const double k = static_cast<double>(samples_.size());
  Prediction out;
  const double mu_std = mean_acc / k;
  out.mean = y_offset_ + y_scale_ * mu_std;
  out.var = std::max(0.0, second_acc / k - mu_std * mu_std) * y_scale_ * y_scale_;
  return out;
}

GpModel gp_fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& outputs, Rng& rng,
               int burn_in, int retained) {
  const int n = static_cast<int>(inputs.rows());
  const int d = static_cast<int>(inputs.cols());
  if (n < 2) throw std::invalid_argument("gp_fit: need at least 2 observations");
  if (outputs.size() != n) throw std::invalid_argument("gp_fit: inputs/outputs mismatch");

  GpModel model;
  model.X_ = inputs;
  model.y_offset_ = outputs.mean();
  const double sd = std::sqrt((outputs.array() - model.y_offset_).square().sum() /
                              std::max(1, n - 1));
  model.y_scale_ = sd > 1e-12 ? sd : 1.0;
  const Eigen::VectorXd y = (outputs.array() - model.y_offset_) / model.y_scale_;

  HyperVector hv;
  hv.d = d;
  hv.v.resize(d + 3);
  for (int i = 0; i < d; ++i) hv.v[i] = std::log(0.5);
  hv.v[d] = 0.0;                // log theta0
  hv.v[d + 1] = std::log(1e-2); // log nu
  hv.v[d + 2] = 0.0;            // mean

  if (!std::isfinite(log_posterior(inputs, y, hv)))
    throw std::runtime_error("gp_fit: singular kernel at initialization");

  for (int sweep = 0; sweep < burn_in; ++sweep) slice_sweep(inputs, y, hv, rng);

  for (int k = 0; k < retained; ++k) {
    slice_sweep(inputs, y, hv, rng);
    GpModel::Sample s;
    s.hyper = hv.unpack();
    if (!factor(gram(inputs, s.hyper), s.hyper.noise, s.chol))
      throw std::runtime_error("gp_fit: singular kernel after max jitter");
    s.alpha = s.chol.solve((y.array() - s.hyper.mean).matrix());
    model.samples_.push_back(std::move(s));
  }
  return model;
}

}  // namespace skillsim
