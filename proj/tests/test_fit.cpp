#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "msts/fit.hpp"
#include "msts/stats.hpp"

using namespace msts;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

Poly make_poly(std::initializer_list<double> c) {
  Poly p(static_cast<int>(c.size()));
  int i = 0;
  for (double v : c) p(i++) = v;
  return p;
}

ModelSpec llm_model(int N, int T) {
  ModelSpec m = make_model(N, T);
  m = add_component(m, {}, ComponentKind::kArma, {0, 0}, std::nullopt, "trend",
                    make_poly({1, -1}));
  m = add_component(m, {}, ComponentKind::kArma, {0, 0}, std::nullopt,
                    "irregular", make_poly({1}));
  return mean_init(m, 0);
}

// Kolmogorov-Smirnov distance to the uniform distribution.
double ks_uniform(std::vector<double> p) {
  std::sort(p.begin(), p.end());
  double d = 0.0;
  const int n = static_cast<int>(p.size());
  for (int i = 0; i < n; ++i) {
    d = std::max(d, std::abs(p[i] - (i + 1.0) / n));
    d = std::max(d, std::abs(p[i] - static_cast<double>(i) / n));
  }
  return d;
}

}  // namespace

TEST_CASE("stats utilities") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(normal_cdf(1.959963985) == doctest::Approx(0.975).epsilon(1e-8));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963985).epsilon(1e-7));
  CHECK(normal_quantile(normal_cdf(1.234)) ==
        doctest::Approx(1.234).epsilon(1e-9));
  // chi-square quantile anchors
  CHECK(chi2_cdf(3.841458821, 1) == doctest::Approx(0.95).epsilon(1e-8));
  CHECK(chi2_cdf(18.30703805, 10) == doctest::Approx(0.95).epsilon(1e-8));
}

TEST_CASE("shapiro_wilk calibration") {
  std::mt19937 rng(157);
  std::normal_distribution<double> nd;
  SUBCASE("null p-values are close to uniform") {
    std::vector<double> ps;
    for (int rep = 0; rep < 200; ++rep) {
      VectorXd x(500);
      for (int i = 0; i < 500; ++i) x(i) = nd(rng);
      ps.push_back(shapiro_wilk(x).p_value);
    }
    CHECK(ks_uniform(ps) < 1.36 / std::sqrt(200.0));  // 5% critical value
  }
  SUBCASE("heavy tails are rejected") {
    std::student_t_distribution<double> t3(3.0);
    int rejected = 0;
    for (int rep = 0; rep < 40; ++rep) {
      VectorXd x(500);
      for (int i = 0; i < 500; ++i) x(i) = t3(rng);
      if (shapiro_wilk(x).p_value < 0.01) ++rejected;
    }
    CHECK(rejected >= 32);
  }
  SUBCASE("statistic is scale and location free") {
    VectorXd x(50);
    for (int i = 0; i < 50; ++i) x(i) = nd(rng);
    auto a = shapiro_wilk(x);
    auto b = shapiro_wilk((x.array() * 7.0 + 3.0).matrix());
    CHECK(a.w == doctest::Approx(b.w).epsilon(1e-12));
  }
}

TEST_CASE("mle_fit") {
  ModelSpec m = llm_model(1, 300);
  VectorXd psi_true(psi_length(m));
  psi_true << std::log(0.3), std::log(1.0), 0.1;
  ParamSet truth = psi_to_par(psi_true, m);
  MatrixXd data = simulate(m, truth, 300, 100, 20240501);

  SUBCASE("fitted divergence does not exceed the truth") {
    FitResult fit = mle_fit(data, psi_to_par(VectorXd::Zero(3), m),
                            Constraint{}, m, {}, false);
    CHECK(fit.divergence <= lik(psi_true, m, data) + 1e-8);
    CHECK(fit.divergence ==
          doctest::Approx(lik(fit.psi_hat, m, data)).epsilon(1e-10));
    CHECK(fit.converged);
  }
  SUBCASE("AR(1) estimate lands near the truth") {
    ModelSpec ma = make_model(1, 800);
    ma = add_component(ma, {}, ComponentKind::kArma, {1, 0}, std::nullopt,
                       "a", Poly::Ones(1));
    ma = mean_init(ma, 0);
    VectorXd psi0(psi_length(ma));
    psi0 << 0.0, pacf_unmap(VectorXd::Constant(1, 0.55))(0), 0.0;
    ParamSet gen = psi_to_par(psi0, ma);
    MatrixXd y = simulate(ma, gen, 800, 100, 77);
    FitResult fit =
        mle_fit(y, psi_to_par(VectorXd::Zero(3), ma), Constraint{}, ma);
    double phi_hat = psi_to_par(fit.psi_hat, ma).serial[0].ar(0);
    // asymptotic s.e. of the AR coefficient
    double se = std::sqrt((1 - 0.55 * 0.55) / 800.0);
    CHECK(std::abs(phi_hat - 0.55) < 3.0 * se);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(fit.hessian);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }
  SUBCASE("equality constraint is enforced exactly") {
    ModelSpec m2 = llm_model(2, 120);
    VectorXd psi2 = VectorXd::Zero(psi_length(m2));
    psi2(psi_length(m2) - 2) = 0.4;
    psi2(psi_length(m2) - 1) = 0.4;
    ParamSet gen = psi_to_par(psi2, m2);
    MatrixXd y = simulate(m2, gen, 120, 100, 99);
    Constraint con = constrain_reg(m2, {{0}, {0}});
    FitResult fit =
        mle_fit(y, default_param(m2, con), con, m2, {}, false);
    const int off = psi_length(m2) - 2;
    CHECK(fit.psi_hat(off) == doctest::Approx(fit.psi_hat(off + 1)).epsilon(1e-12));
    CHECK((con.C * fit.psi_hat - con.b).cwiseAbs().maxCoeff() < 1e-8);
  }
  SUBCASE("initial constraint violations are reported") {
    Constraint con;
    con.C = MatrixXd::Zero(1, psi_length(m));
    con.C(0, 0) = 1.0;
    con.b = VectorXd::Constant(1, 5.0);
    CHECK_THROWS_WITH_AS(
        mle_fit(data, psi_to_par(VectorXd::Zero(3), m), con, m),
        doctest::Contains("constraint row 0"), std::invalid_argument);
  }
}

TEST_CASE("mom_fit") {
  SUBCASE("white-noise component recovers the sample covariance") {
    ModelSpec m = make_model(2, 150);
    m = add_component(m, {}, ComponentKind::kWhiteNoise, {}, std::nullopt,
                      "wn", Poly::Ones(1));
    m = mean_init(m, 0);
    std::mt19937 rng(163);
    std::normal_distribution<double> nd;
    MatrixXd data(150, 2);
    for (int t = 0; t < 150; ++t)
      for (int c = 0; c < 2; ++c) data(t, c) = nd(rng) + (c ? 2.0 : -1.0);
    ParamSet fit = mom_fit(data, default_param(m, Constraint{}), m);
    // sample covariance of the demeaned data
    MatrixXd mu = regression_mean(m, fit.beta);
    MatrixXd e = data - mu;
    MatrixXd s = e.transpose() * e / 150.0;
    CHECK((fit.covars[0].sigma() - s).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("local level model estimates near the truth") {
    ModelSpec m = llm_model(1, 5000);
    VectorXd psi(psi_length(m));
    psi << std::log(0.5), std::log(2.0), 0.0;
    ParamSet truth = psi_to_par(psi, m);
    MatrixXd y = simulate(m, truth, 5000, 100, 5150);
    ParamSet fit = mom_fit(y, default_param(m, Constraint{}), m);
    CHECK(fit.covars[0].sigma()(0, 0) ==
          doctest::Approx(0.5).epsilon(0.2));
    CHECK(fit.covars[1].sigma()(0, 0) ==
          doctest::Approx(2.0).epsilon(0.2));
  }
  SUBCASE("indefinite estimates reduce to a model with finite divergence") {
    // Tiny trend innovation: the trend covariance estimate is frequently
    // indefinite in short samples.
    ModelSpec m = llm_model(2, 60);
    VectorXd psi(psi_length(m));
    psi << std::log(1e-6), 0.0, std::log(1e-6), std::log(1.0), std::log(1.0),
        0.0, 0.0, 0.0;
    ParamSet truth = psi_to_par(psi, m);
    MatrixXd y = simulate(m, truth, 60, 100, 661);
    ParamSet fit = mom_fit(y, default_param(m, Constraint{}), m);
    ReduceResult red = reduce(m, fit, -6.22, true);
    VectorXd psi_red = par_to_psi(red.par, red.mdl);
    double div = lik(psi_red, red.mdl, y);
    CHECK(std::isfinite(div));
  }
  SUBCASE("rejects missing values") {
    ModelSpec m = llm_model(1, 20);
    MatrixXd y = MatrixXd::Zero(20, 1);
    y(3, 0) = na_value();
    CHECK_THROWS(mom_fit(y, default_param(m, Constraint{}), m));
  }
}

TEST_CASE("portmanteau") {
  std::mt19937 rng(167);
  std::normal_distribution<double> nd;
  SUBCASE("null calibration") {
    std::vector<double> ps;
    for (int rep = 0; rep < 150; ++rep) {
      MatrixXd e(300, 1);
      for (int t = 0; t < 300; ++t) e(t, 0) = nd(rng);
      ps.push_back(portmanteau(e, 12, 0).second);
    }
    CHECK(ks_uniform(ps) < 1.36 / std::sqrt(150.0));
  }
  SUBCASE("detects serial correlation") {
    MatrixXd e(400, 1);
    double prev = 0.0;
    for (int t = 0; t < 400; ++t) {
      double v = nd(rng);
      e(t, 0) = 0.5 * prev + v;
      prev = e(t, 0);
    }
    auto [stat, p] = portmanteau(e, 12, 0);
    CHECK(p < 0.01);
    CHECK(stat > 0.0);
  }
  SUBCASE("bivariate output shape") {
    MatrixXd e(200, 2);
    for (int t = 0; t < 200; ++t)
      for (int c = 0; c < 2; ++c) e(t, c) = nd(rng);
    auto [stat, p] = portmanteau(e, 8, 3);
    CHECK(std::isfinite(stat));
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
  }
}

TEST_CASE("gauss_check shape and power") {
  std::mt19937 rng(173);
  std::normal_distribution<double> nd;
  std::student_t_distribution<double> t3(3.0);
  MatrixXd e(500, 2);
  for (int t = 0; t < 500; ++t) {
    e(t, 0) = nd(rng);
    e(t, 1) = t3(rng);
  }
  VectorXd p = gauss_check(e);
  REQUIRE(p.size() == 2);
  CHECK(p(0) > 0.001);
  CHECK(p(1) < 0.05);
}

TEST_CASE("tstats") {
  ModelSpec m = llm_model(1, 30);  // psi length 3
  SUBCASE("non-positive-definite Hessian gives infinities") {
    MatrixXd h = -MatrixXd::Identity(3, 3);
    VectorXd psi(3);
    psi << 1.0, -2.0, 0.5;
    VectorXd t = tstats(m, psi, h, Constraint{});
    CHECK(std::isinf(t(0)));
    CHECK(t(1) < 0);
    CHECK(std::isinf(t(1)));
  }
  SUBCASE("diagonal Hessian closed form") {
    VectorXd psi(3);
    psi << 1.0, -2.0, 0.5;
    Eigen::Vector3d d(4.0, 9.0, 16.0);
    VectorXd t = tstats(m, psi, MatrixXd(d.asDiagonal()), Constraint{});
    for (int i = 0; i < 3; ++i)
      CHECK(t(i) == doctest::Approx(psi(i) * std::sqrt(d(i) / 2.0)));
  }
  SUBCASE("invariant to row scaling of the constraint matrix") {
    ModelSpec m2 = llm_model(2, 30);  // psi length 8
    const int len = psi_length(m2);
    Constraint con1;
    con1.C = MatrixXd::Zero(1, len);
    con1.C(0, len - 2) = 1.0;
    con1.C(0, len - 1) = -1.0;
    con1.b = VectorXd::Zero(1);
    Constraint con2 = con1;
    con2.C *= 37.5;
    std::mt19937 rng(179);
    std::normal_distribution<double> nd;
    const int k = len - 1;
    MatrixXd a(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) a(i, j) = nd(rng);
    MatrixXd h = a * a.transpose() + MatrixXd::Identity(k, k);
    VectorXd eta = VectorXd::Ones(k);
    VectorXd psi = eta_to_psi(eta, con1, len);
    VectorXd t1 = tstats(m2, psi, h, con1);
    VectorXd t2 = tstats(m2, psi, h, con2);
    CHECK((t1 - t2).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("glr") {
  ModelSpec m = llm_model(1, 60);
  VectorXd psi(3);
  psi << -0.2, 0.1, 0.3;
  ParamSet par = psi_to_par(psi, m);
  MatrixXd y = simulate(m, par, 60, 100, 404);
  SUBCASE("identical models give zero") {
    auto [stat, dof] = glr(y, psi, psi, m, m);
    CHECK(stat == doctest::Approx(0.0));
    CHECK(dof == 0);
  }
  SUBCASE("antisymmetry") {
    VectorXd psi2 = psi;
    psi2(0) = 0.7;
    auto [s12, d12] = glr(y, psi, psi2, m, m);
    auto [s21, d21] = glr(y, psi2, psi, m, m);
    CHECK(s12 == doctest::Approx(-s21).epsilon(1e-12));
  }
  SUBCASE("interior nesting is approximately chi-square") {
    // White noise inside AR(1): the statistic has mean near dof = 1.
    ModelSpec wn = make_model(1, 400);
    wn = add_component(wn, {}, ComponentKind::kWhiteNoise, {}, std::nullopt,
                       "wn", Poly::Ones(1));
    wn = mean_init(wn, 0);
    ModelSpec ar = make_model(1, 400);
    ar = add_component(ar, {}, ComponentKind::kArma, {1, 0}, std::nullopt,
                       "a", Poly::Ones(1));
    ar = mean_init(ar, 0);
    std::vector<double> stats;
    for (int rep = 0; rep < 40; ++rep) {
      ParamSet gen = psi_to_par(VectorXd::Zero(2), wn);
      MatrixXd data = simulate(wn, gen, 400, 50, 1000 + rep);
      FitResult f0 = mle_fit(data, gen, Constraint{}, wn, {}, false);
      FitResult f1 = mle_fit(data, psi_to_par(VectorXd::Zero(3), ar),
                             Constraint{}, ar, {}, false);
      auto [stat, dof] = glr(data, f0.psi_hat, f1.psi_hat, wn, ar);
      CHECK(dof == 1);
      stats.push_back(stat);
    }
    double mean = 0.0;
    int below_median = 0;
    for (double s : stats) {
      mean += s;
      if (s < 0.4549) ++below_median;  // median of chi-square(1)
    }
    mean /= stats.size();
    CHECK(mean > 0.4);
    CHECK(mean < 2.2);
    CHECK(below_median >= 12);
    CHECK(below_median <= 28);
  }
}

TEST_CASE("ar_spectrum") {
  std::mt19937 rng(181);
  std::normal_distribution<double> nd;
  SUBCASE("white noise is flat") {
    MatrixXd y(2048, 1);
    for (int t = 0; t < 2048; ++t) y(t, 0) = nd(rng);
    ArSpectrum sp = ar_spectrum(y, 0, false);
    CHECK(sp.density.maxCoeff() / sp.density.minCoeff() < 3.0);
  }
  SUBCASE("seasonal process peaks at seasonal frequencies") {
    ModelSpec m = make_model(1, 4096);
    m = add_component(m, {}, ComponentKind::kSarma, {0, 0, 1, 0, 12},
                      std::nullopt, "s", Poly::Ones(1));
    m = mean_init(m, 0);
    VectorXd psi(psi_length(m));
    psi << 0.0, pacf_unmap(VectorXd::Constant(1, 0.92))(0), 0.0;
    ParamSet par = psi_to_par(psi, m);
    MatrixXd y = simulate(m, par, 4096, 200, 888);
    ArSpectrum sp = ar_spectrum(y, 0, false, 600);
    auto density_at = [&](double lam) {
      int idx = static_cast<int>(std::round(lam / std::numbers::pi * 600));
      return sp.density(std::clamp(idx, 0, 600));
    };
    for (int k = 1; k <= 6; ++k) {
      double peak = density_at(2.0 * std::numbers::pi * k / 12.0);
      double valley = density_at(2.0 * std::numbers::pi * (k - 0.5) / 12.0);
      CHECK(peak > 4.0 * valley);
    }
  }
  SUBCASE("diff flag applies first differencing") {
    MatrixXd y(512, 1);
    double acc = 0.0;
    for (int t = 0; t < 512; ++t) {
      acc += nd(rng);
      y(t, 0) = acc;
    }
    MatrixXd dy(511, 1);
    for (int t = 1; t < 512; ++t) dy(t - 1, 0) = y(t, 0) - y(t - 1, 0);
    ArSpectrum a = ar_spectrum(y, 0, true);
    ArSpectrum b = ar_spectrum(dy, 0, false);
    CHECK((a.density - b.density).cwiseAbs().maxCoeff() < 1e-10);
  }
}
