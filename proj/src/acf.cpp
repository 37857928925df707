#include "msts/acf.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace msts {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using std::complex;

constexpr double kPi = std::numbers::pi;

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double v = 1.0;
  for (int i = 0; i < k; ++i) v = v * (n - i) / (i + 1);
  return v;
}

// psi-weights of ar(B) X = ma(B) eps up to lag n.
VectorXd psi_weights(const Poly& ar, const Poly& ma, int n) {
  VectorXd psi = VectorXd::Zero(n + 1);
  for (int k = 0; k <= n; ++k) {
    double v = (k < ma.size()) ? ma(k) : 0.0;
    for (int i = 1; i < ar.size() && i <= k; ++i) v -= ar(i) * psi(k - i);
    psi(k) = v;
  }
  return psi;
}

// Minus-convention coefficients to a full lag polynomial (1, -c_1, ...).
Poly minus_poly(const VectorXd& coef) {
  Poly p(coef.size() + 1);
  p(0) = 1.0;
  for (int i = 0; i < coef.size(); ++i) p(i + 1) = -coef(i);
  return p;
}

// Seasonal expansion: minus-convention coefficients at multiples of s.
Poly seasonal_poly(const VectorXd& coef, int s) {
  Poly p = Poly::Zero(coef.size() * s + 1);
  p(0) = 1.0;
  for (int i = 0; i < coef.size(); ++i) p((i + 1) * s) = -coef(i);
  return p;
}

MatPoly minus_poly_mat(const std::vector<MatrixXd>& coef, int N) {
  MatPoly p(coef.size() + 1, MatrixXd::Identity(N, N));
  for (std::size_t i = 0; i < coef.size(); ++i) p[i + 1] = -coef[i];
  return p;
}

MatPoly seasonal_poly_mat(const std::vector<MatrixXd>& coef, int N, int s) {
  MatPoly p(coef.size() * s + 1, MatrixXd::Zero(N, N));
  p[0].setIdentity();
  for (std::size_t i = 0; i < coef.size(); ++i) p[(i + 1) * s] = -coef[i];
  return p;
}

double poly_abs2(const Poly& p, double lambda) {
  complex<double> z = std::exp(complex<double>(0.0, -lambda));
  return std::norm(poly_eval(p, z));
}

}  // namespace

VectorXd arma_acvf(const Poly& ar, const Poly& ma, double sigma2,
                   int max_lag) {
  const int p = static_cast<int>(ar.size()) - 1;
  const int q = static_cast<int>(ma.size()) - 1;
  VectorXd psi = psi_weights(ar, ma, q);
  // r(h) = sigma2 * sum_{j=h..q} m_j psi_{j-h}
  VectorXd r = VectorXd::Zero(std::max(p, q) + 1);
  for (int h = 0; h <= q; ++h) {
    double v = 0.0;
    for (int j = h; j <= q; ++j) v += ma(j) * psi(j - h);
    r(h) = sigma2 * v;
  }
  VectorXd gamma = VectorXd::Zero(max_lag + 1);
  if (p == 0) {
    for (int h = 0; h <= std::min(q, max_lag); ++h) gamma(h) = r(h);
    return gamma;
  }
  // Linear system over gamma(0..p) using gamma(-k) = gamma(k).
  MatrixXd A = MatrixXd::Zero(p + 1, p + 1);
  VectorXd b = VectorXd::Zero(p + 1);
  for (int h = 0; h <= p; ++h) {
    for (int i = 0; i <= p; ++i) A(h, std::abs(h - i)) += ar(i);
    if (h < r.size()) b(h) = r(h);
  }
  VectorXd head = A.partialPivLu().solve(b);
  std::vector<double> full(head.data(), head.data() + p + 1);
  for (int h = p + 1; h <= max_lag; ++h) {
    double v = (h < r.size()) ? r(h) : 0.0;
    for (int i = 1; i <= p; ++i) v -= ar(i) * full[h - i];
    full.push_back(v);
  }
  for (int h = 0; h <= max_lag; ++h) gamma(h) = full[h];
  return gamma;
}

MatPoly varma_acvf(const MatPoly& ar, const MatPoly& ma,
                   const MatrixXd& innov_cov, int max_lag) {
  const int N = static_cast<int>(innov_cov.rows());
  const int p = static_cast<int>(ar.size()) - 1;
  const int q = static_cast<int>(ma.size()) - 1;
  MatPoly psi(q + 1, MatrixXd::Zero(N, N));
  for (int k = 0; k <= q; ++k) {
    MatrixXd v = ma[k];
    for (int i = 1; i <= std::min(p, k); ++i) v -= ar[i] * psi[k - i];
    psi[k] = v;
  }
  // R(h) = sum_{j=h..q} M_j Sigma Psi_{j-h}'
  MatPoly R(std::max(p, q) + 1, MatrixXd::Zero(N, N));
  for (int h = 0; h <= q; ++h)
    for (int j = h; j <= q; ++j)
      R[h] += ma[j] * innov_cov * psi[j - h].transpose();

  std::vector<MatrixXd> full;
  if (p == 0) {
    for (int h = 0; h <= max_lag; ++h)
      full.push_back(h <= q ? R[h] : MatrixXd::Zero(N, N));
  } else {
    // Vectorized linear system over Gamma(0..p), Gamma(-k) = Gamma(k)'.
    const int n2 = N * N;
    MatrixXd K = MatrixXd::Zero(n2, n2);  // vec(G') = K vec(G)
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) K(j * N + i, i * N + j) = 1.0;
    MatrixXd big = MatrixXd::Zero(n2 * (p + 1), n2 * (p + 1));
    VectorXd rhs = VectorXd::Zero(n2 * (p + 1));
    for (int h = 0; h <= p; ++h) {
      for (int i = 0; i <= p; ++i) {
        MatrixXd kron = MatrixXd::Zero(n2, n2);
        for (int c = 0; c < N; ++c) kron.block(c * N, c * N, N, N) = ar[i];
        const int lag = h - i;
        if (lag >= 0)
          big.block(h * n2, lag * n2, n2, n2) += kron;
        else
          big.block(h * n2, (-lag) * n2, n2, n2) += kron * K;
      }
      if (h < static_cast<int>(R.size()))
        rhs.segment(h * n2, n2) = Eigen::Map<const VectorXd>(R[h].data(), n2);
    }
    VectorXd sol = big.partialPivLu().solve(rhs);
    for (int h = 0; h <= p; ++h)
      full.push_back(Eigen::Map<const MatrixXd>(sol.data() + h * n2, N, N));
    for (int h = p + 1; h <= max_lag; ++h) {
      MatrixXd v = (h < static_cast<int>(R.size())) ? R[h]
                                                    : MatrixXd::Zero(N, N);
      for (int i = 1; i <= p; ++i) {
        int lag = h - i;
        v -= ar[i] *
             (lag >= 0 ? full[lag] : MatrixXd(full[-lag].transpose()));
      }
      full.push_back(v);
    }
  }
  full.resize(max_lag + 1, MatrixXd::Zero(N, N));
  return {full.begin(), full.end()};
}

CycleArma cycle_polys(const CycleParams& cp) {
  Poly quad(3);
  quad << 1.0, -2.0 * cp.rho * std::cos(cp.omega), cp.rho * cp.rho;
  Poly ar = Poly::Ones(1);
  for (int i = 0; i < cp.n; ++i) ar = poly_mult(ar, quad);
  if (!cp.balanced) {
    Poly lin(2);
    lin << 1.0, -cp.rho * std::cos(cp.omega);
    Poly ma = Poly::Ones(1);
    for (int i = 0; i < cp.n; ++i) ma = poly_mult(ma, lin);
    return {ar, ma, cp.sigma2};
  }
  // Balanced: factorize the moving-average autocovariances upsilon_h.
  VectorXd ups = VectorXd::Zero(cp.n + 1);
  for (int h = 0; h <= cp.n; ++h) {
    double s = 0.0;
    for (int k = 0; k + h <= cp.n; ++k)
      s += binom(cp.n, k + h) * binom(cp.n, k) * std::pow(-cp.rho, 2 * k + h);
    ups(h) = std::cos(cp.omega * h) * s;
  }
  SpecFactResult fac = spec_fact(ups);
  return {ar, fac.ma, cp.sigma2 * fac.innov_var};
}

VectorXd balanced_acvf(const CycleParams& cp, int max_lag) {
  const int n = cp.n;
  const double r2 = cp.rho * cp.rho;
  VectorXd alpha = VectorXd::Zero(n + 1);  // alpha_k, k = 1..n
  for (int k = 1; k <= n; ++k) {
    double s = 0.0;
    for (int r = 0; r <= k - 1; ++r)
      s += binom(k - 1, r) * binom(n - 1, r + n - k) * std::pow(r2, r);
    alpha(k) = std::pow(1.0 - r2, n - k) * s;
  }
  VectorXd gamma(max_lag + 1);
  const double scale = std::pow(1.0 - r2, 1 - 2 * n) * cp.sigma2;
  for (int h = 0; h <= max_lag; ++h) {
    double s = 0.0;
    for (int j = 0; j <= std::min(n - 1, h); ++j)
      s += binom(h, j) * alpha(n - j);
    gamma(h) = std::pow(cp.rho, h) * std::cos(h * cp.omega) * s * scale;
  }
  return gamma;
}

double cycle_density(const CycleParams& cp, double lambda) {
  if (cp.balanced) {
    auto g = [&](double lam) {
      return std::pow(
          1.0 - 2.0 * cp.rho * std::cos(cp.omega - lam) + cp.rho * cp.rho,
          -cp.n);
    };
    return 0.5 * (g(lambda) + g(-lambda)) * cp.sigma2;
  }
  Poly quad(3);
  quad << 1.0, -2.0 * cp.rho * std::cos(cp.omega), cp.rho * cp.rho;
  Poly lin(2);
  lin << 1.0, -cp.rho * std::cos(cp.omega);
  return cp.sigma2 * std::pow(poly_abs2(lin, lambda), cp.n) /
         std::pow(poly_abs2(quad, lambda), cp.n);
}

StabilizeResult stabilize(const CycleParams& cp, int max_lag) {
  double c = std::min(cycle_density(cp, 0.0), cycle_density(cp, kPi));
  if (!cp.balanced) {
    // Interior critical points via the closed-form cosine; fall back to the
    // endpoints when the candidates leave [-1, 1].
    const double cw = std::cos(cp.omega), sw = std::sin(cp.omega);
    const double denom = 2.0 * cp.rho * cw;
    const double disc =
        sw * sw + (1.0 - cp.rho * cp.rho) * (1.0 - cp.rho * cp.rho) * cw * cw;
    if (std::abs(denom) > 1e-12) {
      const double root = sw * std::sqrt(disc);
      for (double z : {(1.0 + cp.rho * cp.rho * cw * cw + root) / denom,
                       (1.0 + cp.rho * cp.rho * cw * cw - root) / denom})
        if (std::abs(z) <= 1.0)
          c = std::min(c, cycle_density(cp, std::acos(z)));
    } else if (cp.rho > 0.0) {
      c = std::min(c, cycle_density(cp, kPi / 2.0));
    }
  }
  StabilizeResult out;
  if (cp.balanced) {
    out.acvf = balanced_acvf(cp, max_lag);
  } else {
    CycleArma rep = cycle_polys(cp);
    out.acvf = arma_acvf(rep.ar, rep.ma, rep.innov_var, max_lag);
  }
  out.acvf(0) -= c;
  out.c = c;
  return out;
}

CanonizeResult canonize(const Poly& ar, const Poly& ma, double sigma2,
                        int max_lag) {
  auto density = [&](double lam) {
    return sigma2 * poly_abs2(ma, lam) / poly_abs2(ar, lam);
  };
  const int grid = 4096;
  double best = 0.0, fbest = density(0.0);
  for (int m = 1; m <= grid; ++m) {
    double lam = kPi * m / grid;
    double f = density(lam);
    if (f < fbest) {
      fbest = f;
      best = lam;
    }
  }
  // Golden-section refinement inside the best cell.
  double a = std::max(0.0, best - kPi / grid);
  double b = std::min(kPi, best + kPi / grid);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = density(x1), f2 = density(x2);
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = density(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = density(x2);
    }
  }
  const double c = std::min(fbest, std::min(f1, f2));

  // New numerator autocovariances: sigma2 (ma ma~) - c (ar ar~).
  const int p = static_cast<int>(ar.size()) - 1;
  const int q = static_cast<int>(ma.size()) - 1;
  const int deg = std::max(p, q);
  VectorXd nu = VectorXd::Zero(deg + 1);
  for (int h = 0; h <= deg; ++h) {
    double vm = 0.0, va = 0.0;
    for (int i = 0; i + h <= q; ++i) vm += ma(i) * ma(i + h);
    for (int i = 0; i + h <= p; ++i) va += ar(i) * ar(i + h);
    nu(h) = sigma2 * vm - c * va;
  }
  CanonizeResult out;
  SpecFactResult fac = spec_fact(nu);
  out.ma = fac.ma;
  out.innov_var = fac.innov_var;
  out.acvf = arma_acvf(ar, ma, sigma2, max_lag);
  out.acvf(0) -= c;
  out.c = c;
  return out;
}

namespace {

// Stationary core of one component: either a unit-variance scalar acvf to be
// scaled by the component covariance, or a full matrix sequence for VARMA
// classes (which couple the innovation covariance non-separably).
struct CoreAcvf {
  bool scalar = true;
  VectorXd uni;
  MatPoly multi;
};

CycleParams cycle_from(const LatentComponent& comp, const SerialParams& sp) {
  CycleParams cp;
  cp.balanced = comp.kind == ComponentKind::kBalanced ||
                comp.kind == ComponentKind::kBalancedStab;
  cp.n = comp.order.at(0);
  cp.rho = sp.rho;
  cp.omega = sp.omega;
  cp.sigma2 = 1.0;
  return cp;
}

CoreAcvf core_acvf(const LatentComponent& comp, const SerialParams& sp,
                   const MatrixXd& sigma, int N, int max_lag) {
  CoreAcvf out;
  switch (comp.kind) {
    case ComponentKind::kWhiteNoise: {
      out.uni = VectorXd::Zero(max_lag + 1);
      out.uni(0) = 1.0;
      break;
    }
    case ComponentKind::kArma:
      out.uni = arma_acvf(minus_poly(sp.ar), minus_poly(sp.ma), 1.0, max_lag);
      break;
    case ComponentKind::kSarma: {
      const int s = comp.order.at(4);
      Poly ar = poly_mult(minus_poly(sp.ar), seasonal_poly(sp.sar, s));
      Poly ma = poly_mult(minus_poly(sp.ma), seasonal_poly(sp.sma, s));
      out.uni = arma_acvf(ar, ma, 1.0, max_lag);
      break;
    }
    case ComponentKind::kDampedTrend: {
      Poly ar(2);
      ar << 1.0, -sp.phi1;
      out.uni = arma_acvf(ar, Poly::Ones(1), 1.0, max_lag);
      break;
    }
    case ComponentKind::kButterworth:
    case ComponentKind::kBalanced: {
      CycleParams cp = cycle_from(comp, sp);
      if (cp.balanced) {
        out.uni = balanced_acvf(cp, max_lag);
      } else {
        CycleArma rep = cycle_polys(cp);
        out.uni = arma_acvf(rep.ar, rep.ma, rep.innov_var, max_lag);
      }
      break;
    }
    case ComponentKind::kButterworthStab:
    case ComponentKind::kBalancedStab:
      out.uni = stabilize(cycle_from(comp, sp), max_lag).acvf;
      break;
    case ComponentKind::kVarma: {
      out.scalar = false;
      out.multi = varma_acvf(minus_poly_mat(sp.arM, N),
                             minus_poly_mat(sp.maM, N), sigma, max_lag);
      break;
    }
    case ComponentKind::kSvarma: {
      out.scalar = false;
      const int s = comp.order.at(4);
      MatPoly ar = poly_mult_mat(minus_poly_mat(sp.arM, N),
                                 seasonal_poly_mat(sp.sarM, N, s));
      MatPoly ma = poly_mult_mat(minus_poly_mat(sp.maM, N),
                                 seasonal_poly_mat(sp.smaM, N, s));
      out.multi = varma_acvf(ar, ma, sigma, max_lag);
      break;
    }
  }
  return out;
}

}  // namespace

MatPoly component_acvf(const ModelSpec& mdl, const ParamSet& par, int k,
                       int max_lag) {
  return component_acvf_filtered(mdl, par, k, mdl.omitted_delta(k), max_lag);
}

MatPoly component_acvf_filtered(const ModelSpec& mdl, const ParamSet& par,
                                int k, const Poly& om, int max_lag) {
  const int N = mdl.N;
  const int d = static_cast<int>(om.size()) - 1;
  const auto& comp = mdl.components[k];
  const MatrixXd sigma = par.covars[k].sigma();
  CoreAcvf core = core_acvf(comp, par.serial[k], sigma, N, max_lag + d);

  auto core_at = [&](int lag) -> MatrixXd {
    const int a = std::abs(lag);
    if (core.scalar) return core.uni(a) * sigma;
    MatrixXd g = core.multi[a];
    if (lag < 0) g.transposeInPlace();
    return g;
  };
  MatPoly out(max_lag + 1, MatrixXd::Zero(N, N));
  for (int h = 0; h <= max_lag; ++h) {
    MatrixXd acc = MatrixXd::Zero(N, N);
    for (int i = 0; i <= d; ++i)
      for (int j = 0; j <= d; ++j)
        acc += om(i) * om(j) * core_at(h + j - i);
    out[h] = acc;
  }
  return out;
}

MatPoly total_acvf(const ModelSpec& mdl, const ParamSet& par, int max_lag) {
  MatPoly sum(max_lag + 1, MatrixXd::Zero(mdl.N, mdl.N));
  for (std::size_t k = 0; k < mdl.components.size(); ++k) {
    MatPoly g = component_acvf(mdl, par, static_cast<int>(k), max_lag);
    for (int h = 0; h <= max_lag; ++h) sum[h] += g[h];
  }
  return sum;
}

MatrixXcd component_spectrum_at(const ModelSpec& mdl, const ParamSet& par,
                                int k, double lambda) {
  return poly_abs2(mdl.omitted_delta(k), lambda) *
         component_core_spectrum_at(mdl, par, k, lambda);
}

MatrixXcd component_core_spectrum_at(const ModelSpec& mdl,
                                     const ParamSet& par, int k,
                                     double lambda) {
  const int N = mdl.N;
  const auto& comp = mdl.components[k];
  const SerialParams& sp = par.serial[k];
  const double dom2 = 1.0;
  const complex<double> z = std::exp(complex<double>(0.0, -lambda));

  if (comp.kind == ComponentKind::kVarma ||
      comp.kind == ComponentKind::kSvarma) {
    MatPoly ar, ma;
    if (comp.kind == ComponentKind::kVarma) {
      ar = minus_poly_mat(sp.arM, N);
      ma = minus_poly_mat(sp.maM, N);
    } else {
      const int s = comp.order.at(4);
      ar = poly_mult_mat(minus_poly_mat(sp.arM, N),
                         seasonal_poly_mat(sp.sarM, N, s));
      ma = poly_mult_mat(minus_poly_mat(sp.maM, N),
                         seasonal_poly_mat(sp.smaM, N, s));
    }
    MatrixXcd psi =
        poly_eval_mat(ar, z).partialPivLu().solve(poly_eval_mat(ma, z));
    MatrixXcd sig = par.covars[k].sigma().cast<complex<double>>();
    return dom2 * (psi * sig * psi.adjoint());
  }

  double g = 0.0;
  switch (comp.kind) {
    case ComponentKind::kWhiteNoise: g = 1.0; break;
    case ComponentKind::kArma:
      g = poly_abs2(minus_poly(sp.ma), lambda) /
          poly_abs2(minus_poly(sp.ar), lambda);
      break;
    case ComponentKind::kSarma: {
      const int s = comp.order.at(4);
      g = poly_abs2(minus_poly(sp.ma), lambda) *
          poly_abs2(seasonal_poly(sp.sma, s), lambda) /
          (poly_abs2(minus_poly(sp.ar), lambda) *
           poly_abs2(seasonal_poly(sp.sar, s), lambda));
      break;
    }
    case ComponentKind::kDampedTrend: {
      Poly ar(2);
      ar << 1.0, -sp.phi1;
      g = 1.0 / poly_abs2(ar, lambda);
      break;
    }
    case ComponentKind::kButterworth:
    case ComponentKind::kBalanced:
      g = cycle_density(cycle_from(comp, sp), lambda);
      break;
    case ComponentKind::kButterworthStab:
    case ComponentKind::kBalancedStab: {
      CycleParams cp = cycle_from(comp, sp);
      g = cycle_density(cp, lambda) - stabilize(cp, 0).c;
      break;
    }
    default: break;
  }
  MatrixXcd sig = par.covars[k].sigma().cast<complex<double>>();
  return (dom2 * g) * sig;
}

std::vector<MatrixXcd> component_spectrum(const ModelSpec& mdl,
                                          const ParamSet& par, int k,
                                          int grid) {
  std::vector<MatrixXcd> out;
  out.reserve(grid + 1);
  for (int m = 0; m <= grid; ++m)
    out.push_back(component_spectrum_at(mdl, par, k, kPi * m / grid));
  return out;
}

}  // namespace msts
