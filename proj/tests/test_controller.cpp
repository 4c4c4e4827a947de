#include "doctest.h"

#include <cmath>
#include <random>

#include "skillsim/controller.hpp"
#include "skillsim/random.hpp"

using namespace skillsim;

TEST_CASE("meta_bounds reproduces the published domain limits") {
  ControllerLimits lim = ControllerLimits::defaults();
  lim.e_max = MetaParams::broadcast(0.005, 0.0017);
  const MetaParams b = meta_bounds(lim, 0.001);

  CHECK(b.beta[0] == 200000.0);  // 5000 * 0.001 / 0.005^2, exact in double
  CHECK(b.beta[3] == doctest::Approx(173010.0).epsilon(0.001));
  CHECK(b.gamma_beta[0] == doctest::Approx(1.25e-5).epsilon(1e-12));
  CHECK(b.alpha[0] == doctest::Approx(0.2));
  CHECK(b.gamma_alpha[0] == doctest::Approx(0.5));
}

TEST_CASE("meta_bounds consistency: beta_max reproduces Kdot_max at e_max, K=0") {
  ControllerLimits lim = ControllerLimits::defaults();
  lim.e_max = MetaParams::broadcast(0.005, 0.0017);
  const double T = 0.001;
  const MetaParams b = meta_bounds(lim, T);
  for (int i = 0; i < 6; ++i) {
    const double kdot = b.beta[i] * lim.e_max[i] * lim.e_max[i] / T;
    CHECK(kdot == doctest::Approx(lim.Kdot_max[i]).epsilon(1e-12));
  }
}

TEST_CASE("meta_bounds rejects zero e_max") {
  ControllerLimits lim = ControllerLimits::defaults();
  lim.e_max.setZero();
  CHECK_THROWS_AS(meta_bounds(lim, 0.001), std::invalid_argument);
}

TEST_CASE("tracking error") {
  CHECK(tracking_error(Vec6::Zero(), Vec6::Zero(), 0.1).norm() == 0.0);
  Vec6 e = Vec6::Zero();
  e[0] = 0.01;
  CHECK(tracking_error(e, Vec6::Zero(), 0.01)[0] == doctest::Approx(0.01));
  Vec6 e2 = Vec6::Constant(0.002);
  Vec6 ed = Vec6::Constant(0.001);
  CHECK(tracking_error(e2, ed, 0.5)[0] == doctest::Approx(0.0025));
}

TEST_CASE("adapt_step hand-computed increments") {
  const ControllerLimits lim = ControllerLimits::defaults();
  const double T = 0.001;
  ControllerState st;

  SUBCASE("no drive, no forgetting: unchanged") {
    MetaParams m;
    m.alpha = MetaParams::broadcast(0.2, 0.2);
    m.beta = MetaParams::broadcast(1e5, 1e5);
    st.K = MetaParams::broadcast(500, 50);
    st.F_ff.force = Vec3(1, 0, 0);
    const ControllerState out = adapt_step(st, Vec6::Zero(), Vec6::Zero(), m, lim, T);
    CHECK(out.K.isApprox(st.K));
    CHECK(out.F_ff.vector().isApprox(st.F_ff.vector()));
  }
  SUBCASE("stiffness increment 3.2 N/m") {
    MetaParams m;
    m.beta = MetaParams::broadcast(200000, 0);
    const Vec6 e = MetaParams::broadcast(0.004, 0);
    const ControllerState out = adapt_step(st, e, e, m, lim, T);
    // Kdot = 200000/0.001 * 1.6e-5 = 3200 N/(m s) <= 5000, so dK = 3.2
    CHECK(out.K[0] == doctest::Approx(3.2).epsilon(1e-12));
  }
  SUBCASE("feed-forward increment 8e-4 N") {
    MetaParams m;
    m.alpha = MetaParams::broadcast(0.2, 0);
    const Vec6 eps = MetaParams::broadcast(0.004, 0);
    const ControllerState out = adapt_step(st, eps, Vec6::Zero(), m, lim, T);
    CHECK(out.F_ff.force[0] == doctest::Approx(8e-4).epsilon(1e-12));
  }
}

TEST_CASE("adaptation bound preservation under fuzzing") {
  const ControllerLimits lim = ControllerLimits::defaults();
  const double T = 0.001;
  MetaParams meta = meta_bounds(lim, T);  // meta at its bounds

  Rng rng(123);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < 100000; ++i) {
    ControllerState st;
    for (int k = 0; k < 6; ++k) {
      st.K[k] = u01(rng) * lim.K_max[k];
    }
    Vec6 e, edot;
    for (int k = 0; k < 6; ++k) {
      e[k] = (2 * u01(rng) - 1) * lim.e_max[k];
      edot[k] = (2 * u01(rng) - 1) * lim.xdot_max[k];
    }
    const Vec6 eps = tracking_error(e, edot, 0.01);
    const ControllerState out = adapt_step(st, eps, e, meta, lim, T);
    for (int k = 0; k < 6; ++k) {
      CHECK(std::abs(out.K[k] - st.K[k]) <= lim.Kdot_max[k] * T + 1e-12);
      CHECK(out.K[k] >= 0.0);
      CHECK(out.K[k] <= lim.K_max[k]);
      CHECK(std::abs(out.F_ff.vector()[k]) <= lim.F_max[k]);
    }
  }
}

TEST_CASE("scalar fixed point matches the analytic solution") {
  // Kdot = (beta/T)(eps e - gamma K) with constant eps = e converges to
  // eps*e/gamma with time constant T/(beta gamma).
  ControllerLimits lim = ControllerLimits::defaults();
  const double T = 0.001;
  const double beta = 5000.0, gamma = 1e-5;
  const double e = std::sqrt(1e-5);  // eps*e = 1e-5 -> K_inf = 1000
  MetaParams meta;
  meta.beta = MetaParams::broadcast(beta, beta);
  meta.gamma_beta = MetaParams::broadcast(gamma, gamma);

  const double K_inf = e * e / gamma;
  const double tau = T / (beta * gamma);
  ControllerState st;
  const Vec6 ev = MetaParams::broadcast(e, 0);
  double t = 0.0;
  const double t_end = 5.0 * tau;
  while (t < t_end) {
    st = adapt_step(st, ev, ev, meta, lim, T);
    t += T;
  }
  const double analytic = K_inf * (1.0 - std::exp(-t / tau));
  CHECK(st.K[0] == doctest::Approx(analytic).epsilon(0.01));
  CHECK(st.K[0] == doctest::Approx(K_inf).epsilon(0.01));
}

TEST_CASE("forgetting decays stiffness monotonically to zero") {
  ControllerLimits lim = ControllerLimits::defaults();
  MetaParams meta;
  meta.beta = MetaParams::broadcast(5000, 500);
  meta.gamma_beta = MetaParams::broadcast(1e-5, 1e-5);
  ControllerState st;
  st.K = lim.K_max;
  double prev = st.K[0];
  for (int i = 0; i < 200000; ++i) {
    st = adapt_step(st, Vec6::Zero(), Vec6::Zero(), meta, lim, 0.001);
    CHECK(st.K[0] <= prev + 1e-15);
    prev = st.K[0];
  }
  CHECK(st.K[0] < 1e-6);
}

TEST_CASE("damping design") {
  CHECK(damping_for(Vec6::Zero(), Vec6::Ones(), 0.7).norm() == 0.0);
  Vec6 K = MetaParams::broadcast(2000, 0);
  Vec6 m = MetaParams::broadcast(2, 1);
  CHECK(damping_for(K, m, 0.7)[0] == doctest::Approx(2 * 0.7 * std::sqrt(4000.0)));
  Vec6 K2 = MetaParams::broadcast(100, 0);
  CHECK(damping_for(K2, Vec6::Ones(), 1.0)[0] == doctest::Approx(20.0));
}

TEST_CASE("control wrench") {
  ControllerState st;
  SUBCASE("all zero") {
    CHECK(control_wrench(st, Vec6::Zero(), Vec6::Zero(), Wrench{}, Vec6::Zero())
              .vector()
              .norm() == 0.0);
  }
  SUBCASE("spring term") {
    st.K = MetaParams::broadcast(1000, 0);
    Vec6 e = Vec6::Zero();
    e[0] = 0.005;
    const Wrench u = control_wrench(st, e, Vec6::Zero(), Wrench{}, Vec6::Zero());
    CHECK(u.force[0] == doctest::Approx(5.0));
  }
  SUBCASE("superposition in the error") {
    st.K = MetaParams::broadcast(800, 40);
    const Vec6 D = MetaParams::broadcast(50, 5);
    Rng rng(5);
    std::uniform_real_distribution<double> u(-0.01, 0.01);
    Vec6 e1, e2;
    for (int k = 0; k < 6; ++k) {
      e1[k] = u(rng);
      e2[k] = u(rng);
    }
    const Vec6 lhs =
        control_wrench(st, e1 + e2, Vec6::Zero(), Wrench{}, D).vector();
    const Vec6 rhs = control_wrench(st, e1, Vec6::Zero(), Wrench{}, D).vector() +
                     control_wrench(st, e2, Vec6::Zero(), Wrench{}, D).vector();
    CHECK((lhs - rhs).norm() < 1e-12);
  }
}
