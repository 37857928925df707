#include "msts/fit.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "msts/stats.hpp"

namespace msts {

using Eigen::MatrixXd;
using Eigen::VectorXd;

FitResult mle_fit(const MatrixXd& data, const ParamSet& init,
                  const Constraint& constraint, const ModelSpec& mdl,
                  const OptimOptions& opts, bool want_hessian) {
  const int len = psi_length(mdl);
  VectorXd psi0 = par_to_psi(init, mdl);
  if (!constraint.empty()) {
    VectorXd resid = constraint.C * psi0 - constraint.b;
    for (int r = 0; r < resid.size(); ++r)
      if (std::abs(resid(r)) > 1e-8) {
        std::ostringstream msg;
        msg << "mle_fit: initial psi violates constraint row " << r
            << " (residual " << resid(r) << ")";
        throw std::invalid_argument(msg.str());
      }
  }
  VectorXd eta0 = psi_to_eta(psi0, constraint);
  auto objective = [&](const VectorXd& eta) {
    return lik(eta_to_psi(eta, constraint, len), mdl, data);
  };
  OptimResult opt = minimize_bfgs(objective, eta0, opts);
  FitResult out;
  out.eta_hat = opt.x;
  out.psi_hat = eta_to_psi(opt.x, constraint, len);
  out.param_hat = psi_to_par(out.psi_hat, mdl);
  out.divergence = opt.f;
  out.converged = opt.converged;
  out.evaluations = opt.evaluations;
  if (want_hessian && opt.x.size() > 0)
    out.hessian = numeric_hessian(
        [&](const VectorXd& eta) {
          try {
            return objective(eta);
          } catch (...) {
            return std::numeric_limits<double>::infinity();
          }
        },
        opt.x, opts.fd_step);
  return out;
}

ParamSet mom_fit(const MatrixXd& data, const ParamSet& init,
                 const ModelSpec& mdl) {
  const int T = mdl.T, N = mdl.N;
  for (int t = 0; t < T; ++t)
    for (int c = 0; c < N; ++c)
      if (is_na(data(t, c)))
        throw std::invalid_argument("mom_fit: missing values not supported");

  ParamSet out = init;
  // OLS regression removal, one series at a time.
  int bpos = 0;
  MatrixXd mu = MatrixXd::Zero(T, N);
  for (int j = 0; j < N; ++j) {
    const int rj = static_cast<int>(mdl.regressors[j].size());
    if (rj == 0) continue;
    MatrixXd z(T, rj);
    for (int r = 0; r < rj; ++r) z.col(r) = mdl.regressors[j][r].values;
    VectorXd beta =
        (z.transpose() * z).ldlt().solve(z.transpose() * data.col(j));
    out.beta.segment(bpos, rj) = beta;
    mu.col(j) = z * beta;
    bpos += rj;
  }

  const Poly delta = mdl.full_delta();
  MatrixXd w = difference_matrix(data - mu, delta);
  const int Tw = static_cast<int>(w.rows());

  int L = 0;
  for (const auto& comp : mdl.components)
    L = std::max(L, static_cast<int>(comp.delta.size()) - 1 + 5);
  L = std::min(L, Tw - 1);

  // Sample autocovariances, symmetrized in the matrix sense.
  std::vector<MatrixXd> sample(L + 1, MatrixXd::Zero(N, N));
  for (int h = 0; h <= L; ++h) {
    for (int t = h; t < Tw; ++t)
      sample[h] += w.row(t).transpose() * w.row(t - h);
    sample[h] /= static_cast<double>(Tw);
    sample[h] = 0.5 * (sample[h] + sample[h].transpose()).eval();
  }

  // Moment design: with the serial dynamics fixed at the initial values the
  // model autocovariance at lag h is sum_k c_k(h) Sigma^(k).
  const int K = static_cast<int>(mdl.components.size());
  MatrixXd design(L + 1, K);
  for (int k = 0; k < K; ++k) {
    ParamSet unit = init;
    unit.covars[k].L = MatrixXd::Identity(N, N);
    unit.covars[k].d = VectorXd::Ones(N);
    ModelSpec full_rank = mdl;
    full_rank.components[k].vrank.clear();
    for (int j = 0; j < N; ++j) full_rank.components[k].vrank.push_back(j);
    MatPoly ck = component_acvf(full_rank, unit, k, L);
    for (int h = 0; h <= L; ++h) design(h, k) = ck[h](0, 0);
  }
  Eigen::ColPivHouseholderQR<MatrixXd> qr(design);

  // Solve entrywise least squares for the component covariances.
  std::vector<MatrixXd> sigma(K, MatrixXd::Zero(N, N));
  VectorXd rhs(L + 1);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j <= i; ++j) {
      for (int h = 0; h <= L; ++h) rhs(h) = sample[h](i, j);
      VectorXd sol = qr.solve(rhs);
      for (int k = 0; k < K; ++k) sigma[k](i, j) = sigma[k](j, i) = sol(k);
    }

  // Raw generalized Cholesky factors restricted to each rank configuration;
  // pivots may be nonpositive here.
  for (int k = 0; k < K; ++k) {
    GcdResult g = gcd_decompose(sigma[k]);
    const auto& vrank = mdl.components[k].vrank;
    GcdPair pair;
    pair.L.resize(N, vrank.size());
    pair.d.resize(vrank.size());
    for (std::size_t c = 0; c < vrank.size(); ++c) {
      pair.L.col(c) = g.L.col(vrank[c]);
      pair.d(c) = g.d(vrank[c]);
    }
    out.covars[k] = pair;
  }
  return out;
}

std::pair<double, double> portmanteau(const MatrixXd& resids, int lag,
                                      int num_params) {
  const int T = static_cast<int>(resids.rows());
  const int N = static_cast<int>(resids.cols());
  if (lag >= T) throw std::invalid_argument("portmanteau: lag >= T");
  MatrixXd mean = resids.colwise().mean();
  MatrixXd e = resids.rowwise() - mean.row(0);
  std::vector<MatrixXd> c(lag + 1, MatrixXd::Zero(N, N));
  for (int h = 0; h <= lag; ++h) {
    for (int t = h; t < T; ++t)
      c[h] += e.row(t).transpose() * e.row(t - h);
    c[h] /= static_cast<double>(T);
  }
  Eigen::LDLT<MatrixXd> c0(c[0]);
  double q = 0.0;
  for (int h = 1; h <= lag; ++h) {
    MatrixXd a = c0.solve(c[h]);            // C0^-1 C_h
    MatrixXd b = c0.solve(c[h].transpose());
    q += (a * b).trace() / (T - h);
  }
  q *= static_cast<double>(T) * T;
  int dof = std::max(1, N * N * lag - num_params);
  double p = 1.0 - chi2_cdf(q, dof);
  return {q, p};
}

VectorXd gauss_check(const MatrixXd& resids) {
  const int T = static_cast<int>(resids.rows());
  VectorXd p(resids.cols());
  for (int j = 0; j < resids.cols(); ++j) {
    VectorXd col = resids.col(j);
    if (T > 5000) {
      VectorXd sub(5000);
      for (int i = 0; i < 5000; ++i)
        sub(i) = col(static_cast<int>(static_cast<long>(i) * T / 5000));
      col = sub;
    }
    p(j) = shapiro_wilk(col).p_value;
  }
  return p;
}

VectorXd tstats(const ModelSpec& mdl, const VectorXd& psi,
                const MatrixXd& hessian, const Constraint& constraint) {
  const int len = psi_length(mdl);
  VectorXd t(len);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(hessian);
  const double inf = std::numeric_limits<double>::infinity();
  if (hessian.rows() == 0 || es.eigenvalues().minCoeff() <= 0.0) {
    for (int i = 0; i < len; ++i) t(i) = psi(i) >= 0 ? inf : -inf;
    return t;
  }
  MatrixXd v = 2.0 * hessian.inverse();
  ConstraintAffine aff = constraint_affine(constraint, len);
  MatrixXd psi_cov = aff.A * v * aff.A.transpose();
  for (int i = 0; i < len; ++i) {
    double var = psi_cov(i, i);
    if (var > 1e-300)
      t(i) = psi(i) / std::sqrt(var);
    else
      t(i) = psi(i) == 0.0 ? 0.0 : (psi(i) > 0 ? inf : -inf);
  }
  return t;
}

std::pair<double, int> glr(const MatrixXd& data, const VectorXd& psi_nested,
                           const VectorXd& psi_nesting,
                           const ModelSpec& mdl_nested,
                           const ModelSpec& mdl_nesting) {
  double stat =
      lik(psi_nested, mdl_nested, data) - lik(psi_nesting, mdl_nesting, data);
  int dof = static_cast<int>(psi_nesting.size() - psi_nested.size());
  return {stat, dof};
}

ArSpectrum ar_spectrum(const MatrixXd& data, int series, bool diff,
                       int grid) {
  VectorXd x = data.col(series);
  std::vector<double> clean;
  for (int t = 0; t < x.size(); ++t)
    if (!is_na(x(t))) clean.push_back(x(t));
  const int n0 = static_cast<int>(clean.size());
  VectorXd y(n0);
  for (int t = 0; t < n0; ++t) y(t) = clean[t];
  if (diff) {
    VectorXd d(n0 - 1);
    for (int t = 1; t < n0; ++t) d(t - 1) = y(t) - y(t - 1);
    y = d;
  }
  const int T = static_cast<int>(y.size());
  y.array() -= y.mean();
  const int pmax = std::min(T - 2, static_cast<int>(10 * std::log10(T)));
  VectorXd gamma = VectorXd::Zero(pmax + 1);
  for (int h = 0; h <= pmax; ++h) {
    for (int t = h; t < T; ++t) gamma(h) += y(t) * y(t - h);
    gamma(h) /= T;
  }
  // Levinson recursion with AIC order selection.
  VectorXd phi_best(0);
  double best_aic = T * std::log(gamma(0));
  int best_p = 0;
  double v = gamma(0);
  VectorXd phi(0);
  for (int p = 1; p <= pmax; ++p) {
    double acc = gamma(p);
    for (int j = 1; j < p; ++j) acc -= phi(j - 1) * gamma(p - j);
    double k = acc / v;
    VectorXd nphi(p);
    for (int j = 1; j < p; ++j) nphi(j - 1) = phi(j - 1) - k * phi(p - j - 1);
    nphi(p - 1) = k;
    phi = nphi;
    v *= (1.0 - k * k);
    double aic = T * std::log(v) + 2.0 * p;
    if (aic < best_aic) {
      best_aic = aic;
      best_p = p;
      phi_best = phi;
    }
  }
  // Density of the selected fit.
  double vp = gamma(0);
  if (best_p > 0) {
    // innovation variance from the recursion at the selected order
    VectorXd ph(0);
    vp = gamma(0);
    for (int p = 1; p <= best_p; ++p) {
      double acc = gamma(p);
      for (int j = 1; j < p; ++j) acc -= ph(j - 1) * gamma(p - j);
      double k = acc / vp;
      VectorXd nphi(p);
      for (int j = 1; j < p; ++j) nphi(j - 1) = ph(j - 1) - k * ph(p - j - 1);
      nphi(p - 1) = k;
      ph = nphi;
      vp *= (1.0 - k * k);
    }
  }
  ArSpectrum out;
  out.order = best_p;
  out.freq.resize(grid + 1);
  out.density.resize(grid + 1);
  for (int m = 0; m <= grid; ++m) {
    double lam = std::numbers::pi * m / grid;
    std::complex<double> denom(1.0, 0.0);
    for (int j = 1; j <= best_p; ++j)
      denom -= phi_best(j - 1) *
               std::exp(std::complex<double>(0.0, -lam * j));
    out.freq(m) = lam;
    out.density(m) = vp / std::norm(denom);
  }
  return out;
}

}  // namespace msts
