#include "msts/param.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace msts {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

int zetalen(const LatentComponent& comp, int N) {
  const auto& o = comp.order;
  switch (comp.kind) {
    case ComponentKind::kArma: return o.at(0) + o.at(1);
    case ComponentKind::kSarma: return o.at(0) + o.at(1) + o.at(2) + o.at(3);
    case ComponentKind::kVarma: return (o.at(0) + o.at(1)) * N * N;
    case ComponentKind::kSvarma:
      return (o.at(0) + o.at(1) + o.at(2) + o.at(3)) * N * N;
    case ComponentKind::kButterworth:
    case ComponentKind::kBalanced:
    case ComponentKind::kButterworthStab:
    case ComponentKind::kBalancedStab: return 2;
    case ComponentKind::kDampedTrend: return 1;
    case ComponentKind::kWhiteNoise: return 0;
  }
  return 0;
}

int xilen(int N, const std::vector<int>& vrank) {
  int n = static_cast<int>(vrank.size());
  for (int j : vrank) n += N - 1 - j;
  return n;
}

int xilen(const LatentComponent& comp, int N) { return xilen(N, comp.vrank); }

int psi_length(const ModelSpec& mdl) { return psi_layout(mdl).total; }

PsiLayout psi_layout(const ModelSpec& mdl) {
  PsiLayout lay;
  lay.xi_offset = 0;
  int pos = 0;
  for (const auto& c : mdl.components) {
    lay.comp_xi.push_back(pos);
    pos += xilen(c, mdl.N);
  }
  lay.zeta_offset = pos;
  for (const auto& c : mdl.components) {
    lay.comp_zeta.push_back(pos);
    pos += zetalen(c, mdl.N);
  }
  lay.beta_offset = pos;
  lay.total = pos + mdl.regressor_count();
  return lay;
}

// --- pacf map ---------------------------------------------------------------

Eigen::VectorXd pacf_map(const Eigen::VectorXd& zeta) {
  const int p = static_cast<int>(zeta.size());
  Eigen::VectorXd phi(p);
  for (int j = 1; j <= p; ++j) {
    const double r = std::tanh(zeta(j - 1) / 2.0);  // (e^z - 1)/(e^z + 1)
    Eigen::VectorXd prev = phi.head(j - 1);
    for (int k = 1; k < j; ++k) phi(k - 1) = prev(k - 1) - r * prev(j - k - 1);
    phi(j - 1) = r;
  }
  return phi;
}

Eigen::VectorXd pacf_unmap(const Eigen::VectorXd& phi_in) {
  const int p = static_cast<int>(phi_in.size());
  Eigen::VectorXd phi = phi_in, zeta(p);
  for (int j = p; j >= 1; --j) {
    const double r = phi(j - 1);
    if (std::abs(r) >= 1.0)
      throw std::domain_error("pacf_unmap: unstable polynomial");
    zeta(j - 1) = std::log((1.0 + r) / (1.0 - r));
    Eigen::VectorXd cur = phi.head(j - 1);
    for (int k = 1; k < j; ++k)
      phi(k - 1) = (cur(k - 1) + r * cur(j - k - 1)) / (1.0 - r * r);
  }
  return zeta;
}

// --- VAR map ----------------------------------------------------------------

namespace {

// Contraction with singular values tanh(s/2) via the SVD; invertible by
// 2 atanh on the singular values.
Eigen::MatrixXd contract(const Eigen::MatrixXd& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::VectorXd s = svd.singularValues();
  for (int i = 0; i < s.size(); ++i) s(i) = std::tanh(s(i) / 2.0);
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

Eigen::MatrixXd uncontract(const Eigen::MatrixXd& p) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      p, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::VectorXd s = svd.singularValues();
  for (int i = 0; i < s.size(); ++i) {
    if (s(i) >= 1.0)
      throw std::domain_error("var_unmap: partial autocorrelation not < 1");
    s(i) = 2.0 * std::atanh(s(i));
  }
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

Eigen::MatrixXd chol_lower(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw std::domain_error("var map: covariance not positive definite");
  return llt.matrixL();
}

// Durbin-Levinson style construction of stable VAR coefficients from partial
// autocorrelation matrices, with unit stationary variance normalization.
std::vector<Eigen::MatrixXd> coeffs_from_pacf(
    const std::vector<Eigen::MatrixXd>& pacf, int N) {
  const int p = static_cast<int>(pacf.size());
  Eigen::MatrixXd vf = Eigen::MatrixXd::Identity(N, N), vb = vf;
  std::vector<Eigen::MatrixXd> fwd, bwd;
  for (int s = 1; s <= p; ++s) {
    Eigen::MatrixXd lf = chol_lower(vf), lb = chol_lower(vb);
    Eigen::MatrixXd phi_ss =
        lf * pacf[s - 1] *
        lb.triangularView<Eigen::Lower>().solve(
            Eigen::MatrixXd::Identity(N, N));
    Eigen::MatrixXd phib_ss =
        lb * pacf[s - 1].transpose() *
        lf.triangularView<Eigen::Lower>().solve(
            Eigen::MatrixXd::Identity(N, N));
    std::vector<Eigen::MatrixXd> fwd_new(s), bwd_new(s);
    for (int k = 0; k < s - 1; ++k) {
      fwd_new[k] = fwd[k] - phi_ss * bwd[s - 2 - k];
      bwd_new[k] = bwd[k] - phib_ss * fwd[s - 2 - k];
    }
    fwd_new[s - 1] = phi_ss;
    bwd_new[s - 1] = phib_ss;
    Eigen::MatrixXd vf_new = vf - phi_ss * vb * phi_ss.transpose();
    Eigen::MatrixXd vb_new = vb - phib_ss * vf * phib_ss.transpose();
    vf = 0.5 * (vf_new + vf_new.transpose());
    vb = 0.5 * (vb_new + vb_new.transpose());
    fwd = std::move(fwd_new);
    bwd = std::move(bwd_new);
  }
  return fwd;
}

Eigen::MatrixXd companion(const std::vector<Eigen::MatrixXd>& phi, int N) {
  const int p = static_cast<int>(phi.size());
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(N * p, N * p);
  for (int j = 0; j < p; ++j) f.block(0, j * N, N, N) = phi[j];
  if (p > 1)
    f.block(N, 0, N * (p - 1), N * (p - 1)).setIdentity();
  return f;
}

// Stationary covariance blocks Gamma(0..p) of a VAR(p) with the given
// innovation covariance, via the companion-form Lyapunov equation.
std::vector<Eigen::MatrixXd> var_acvf_lyapunov(
    const std::vector<Eigen::MatrixXd>& phi, const Eigen::MatrixXd& sigma,
    int N) {
  const int p = static_cast<int>(phi.size());
  const int m = N * p;
  Eigen::MatrixXd f = companion(phi, N);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(m, m);
  q.topLeftCorner(N, N) = sigma;
  Eigen::MatrixXd kron = Eigen::MatrixXd::Identity(m * m, m * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      kron.block(i * m, j * m, m, m) -= f(i, j) * f;
  Eigen::VectorXd vecq = Eigen::Map<Eigen::VectorXd>(q.data(), m * m);
  Eigen::VectorXd vecw = kron.partialPivLu().solve(vecq);
  Eigen::MatrixXd w = Eigen::Map<Eigen::MatrixXd>(vecw.data(), m, m);
  std::vector<Eigen::MatrixXd> gamma(p + 1);
  for (int j = 0; j < p; ++j) gamma[j] = w.block(0, j * N, N, N);
  gamma[p] = Eigen::MatrixXd::Zero(N, N);
  for (int j = 1; j <= p; ++j) {
    const Eigen::MatrixXd& g = gamma[p - j];
    gamma[p] += phi[j - 1] * (p - j >= 0 ? g : g.transpose());
  }
  return gamma;
}

}  // namespace

std::vector<Eigen::MatrixXd> var_map(const Eigen::VectorXd& zeta, int N,
                                     int p) {
  if (zeta.size() != p * N * N)
    throw std::invalid_argument("var_map: zeta length mismatch");
  std::vector<Eigen::MatrixXd> pacf(p);
  for (int s = 0; s < p; ++s) {
    Eigen::MatrixXd a(N, N);
    for (int c = 0; c < N; ++c)
      a.col(c) = zeta.segment(s * N * N + c * N, N);
    pacf[s] = contract(a);
  }
  return coeffs_from_pacf(pacf, N);
}

Eigen::VectorXd var_unmap(const std::vector<Eigen::MatrixXd>& phi) {
  const int p = static_cast<int>(phi.size());
  if (p == 0) return Eigen::VectorXd(0);
  const int N = static_cast<int>(phi[0].rows());
  {  // stability check
    Eigen::MatrixXd f = companion(phi, N);
    double rad = 0.0;
    Eigen::VectorXcd ev = f.eigenvalues();
    for (int i = 0; i < ev.size(); ++i) rad = std::max(rad, std::abs(ev(i)));
    if (rad >= 1.0) throw std::domain_error("var_unmap: unstable VAR");
  }
  // Innovation covariance making the stationary variance the identity:
  // solve the linear system over symmetric matrices.
  const int m = N * p;
  Eigen::MatrixXd f = companion(phi, N);
  Eigen::MatrixXd kron = Eigen::MatrixXd::Identity(m * m, m * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      kron.block(i * m, j * m, m, m) -= f(i, j) * f;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(kron);
  const int nsym = N * (N + 1) / 2;
  Eigen::MatrixXd sys(nsym, nsym);
  auto vech_index = [N](int i, int j) {  // i >= j
    return j * N - j * (j - 1) / 2 + (i - j);
  };
  for (int j = 0, col = 0; j < N; ++j)
    for (int i = j; i < N; ++i, ++col) {
      Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(N, N);
      basis(i, j) = basis(j, i) = 1.0;
      Eigen::MatrixXd q = Eigen::MatrixXd::Zero(m, m);
      q.topLeftCorner(N, N) = basis;
      Eigen::VectorXd vecw =
          lu.solve(Eigen::Map<Eigen::VectorXd>(q.data(), m * m));
      Eigen::MatrixXd w = Eigen::Map<Eigen::MatrixXd>(vecw.data(), m, m);
      for (int jj = 0; jj < N; ++jj)
        for (int ii = jj; ii < N; ++ii)
          sys(vech_index(ii, jj), col) = w(ii, jj);
    }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nsym);
  for (int j = 0; j < N; ++j) rhs(vech_index(j, j)) = 1.0;
  Eigen::VectorXd sol = sys.partialPivLu().solve(rhs);
  Eigen::MatrixXd sigma(N, N);
  for (int j = 0, col = 0; j < N; ++j)
    for (int i = j; i < N; ++i, ++col) sigma(i, j) = sigma(j, i) = sol(col);

  std::vector<Eigen::MatrixXd> gamma = var_acvf_lyapunov(phi, sigma, N);
  // Whittle recursion extracting the partial autocorrelation matrices.
  Eigen::MatrixXd vf = gamma[0], vb = gamma[0];
  std::vector<Eigen::MatrixXd> fwd, bwd, pacf;
  for (int s = 1; s <= p; ++s) {
    Eigen::MatrixXd delta = gamma[s];
    for (int j = 1; j < s; ++j) delta -= fwd[j - 1] * gamma[s - j];
    vf = 0.5 * (vf + vf.transpose());
    vb = 0.5 * (vb + vb.transpose());
    Eigen::MatrixXd lf = chol_lower(vf), lb = chol_lower(vb);
    Eigen::MatrixXd phi_ss =
        vb.ldlt().solve(delta.transpose()).transpose();  // delta * inv(vb)
    Eigen::MatrixXd phib_ss = vf.ldlt().solve(delta);    // delta' * inv(vf)
    phib_ss.transposeInPlace();
    pacf.push_back(lf.triangularView<Eigen::Lower>().solve(phi_ss * lb));
    std::vector<Eigen::MatrixXd> fwd_new(s), bwd_new(s);
    for (int k = 0; k < s - 1; ++k) {
      fwd_new[k] = fwd[k] - phi_ss * bwd[s - 2 - k];
      bwd_new[k] = bwd[k] - phib_ss * fwd[s - 2 - k];
    }
    fwd_new[s - 1] = phi_ss;
    bwd_new[s - 1] = phib_ss;
    Eigen::MatrixXd vf_prev = vf, vb_prev = vb;
    vf = vf_prev - phi_ss * vb_prev * phi_ss.transpose();
    vb = vb_prev - phib_ss * vf_prev * phib_ss.transpose();
    fwd = std::move(fwd_new);
    bwd = std::move(bwd_new);
  }
  const int N2 = N * N;
  Eigen::VectorXd zeta(p * N2);
  for (int s = 0; s < p; ++s) {
    Eigen::MatrixXd a = uncontract(pacf[s]);
    for (int c = 0; c < N; ++c) zeta.segment(s * N2 + c * N, N) = a.col(c);
  }
  return zeta;
}

// --- bounded map ------------------------------------------------------------

double bounded_map(double zeta, double lo, double hi) {
  return lo + (hi - lo) / (1.0 + std::exp(-zeta));
}

double bounded_unmap(double x, double lo, double hi) {
  if (x <= lo || x >= hi)
    throw std::domain_error("bounded_unmap: value outside open interval");
  return std::log((x - lo) / (hi - x));
}

// --- xi map -----------------------------------------------------------------

GcdPair xi_map(const Eigen::VectorXd& xi, int N,
               const std::vector<int>& vrank) {
  const int r = static_cast<int>(vrank.size());
  GcdPair g;
  g.L = Eigen::MatrixXd::Zero(N, r);
  g.d = Eigen::VectorXd::Zero(r);
  int pos = 0;
  for (int c = 0; c < r; ++c) {
    const int j = vrank[c];
    g.L(j, c) = 1.0;
    for (int i = j + 1; i < N; ++i) g.L(i, c) = xi(pos++);
  }
  for (int c = 0; c < r; ++c) g.d(c) = std::exp(xi(pos++));
  return g;
}

Eigen::VectorXd xi_unmap(const GcdPair& gcd, int N,
                         const std::vector<int>& vrank) {
  const int r = static_cast<int>(vrank.size());
  Eigen::VectorXd xi(xilen(N, vrank));
  int pos = 0;
  for (int c = 0; c < r; ++c) {
    const int j = vrank[c];
    for (int i = j + 1; i < N; ++i) xi(pos++) = gcd.L(i, c);
  }
  for (int c = 0; c < r; ++c) {
    if (!(gcd.d(c) > 0.0))
      throw std::domain_error("xi_unmap: nonpositive pivot (reduce first)");
    xi(pos++) = std::log(gcd.d(c));
  }
  return xi;
}

// --- zeta map ---------------------------------------------------------------

SerialParams zeta_map(const Eigen::VectorXd& zeta, const LatentComponent& comp,
                      int N) {
  SerialParams sp;
  const auto& o = comp.order;
  switch (comp.kind) {
    case ComponentKind::kArma:
      sp.ar = pacf_map(zeta.head(o[0]));
      sp.ma = pacf_map(zeta.segment(o[0], o[1]));
      break;
    case ComponentKind::kSarma: {
      int pos = 0;
      sp.ar = pacf_map(zeta.segment(pos, o[0])); pos += o[0];
      sp.ma = pacf_map(zeta.segment(pos, o[1])); pos += o[1];
      sp.sar = pacf_map(zeta.segment(pos, o[2])); pos += o[2];
      sp.sma = pacf_map(zeta.segment(pos, o[3]));
      break;
    }
    case ComponentKind::kVarma: {
      const int n2 = N * N;
      sp.arM = var_map(zeta.head(o[0] * n2), N, o[0]);
      sp.maM = var_map(zeta.segment(o[0] * n2, o[1] * n2), N, o[1]);
      break;
    }
    case ComponentKind::kSvarma: {
      const int n2 = N * N;
      int pos = 0;
      sp.arM = var_map(zeta.segment(pos, o[0] * n2), N, o[0]); pos += o[0] * n2;
      sp.maM = var_map(zeta.segment(pos, o[1] * n2), N, o[1]); pos += o[1] * n2;
      sp.sarM = var_map(zeta.segment(pos, o[2] * n2), N, o[2]); pos += o[2] * n2;
      sp.smaM = var_map(zeta.segment(pos, o[3] * n2), N, o[3]);
      break;
    }
    case ComponentKind::kButterworth:
    case ComponentKind::kBalanced:
    case ComponentKind::kButterworthStab:
    case ComponentKind::kBalancedStab:
      sp.rho = bounded_map(zeta(0), comp.bounds.rho_lo, comp.bounds.rho_hi);
      sp.omega =
          bounded_map(zeta(1), comp.bounds.omega_lo, comp.bounds.omega_hi);
      break;
    case ComponentKind::kDampedTrend:
      sp.phi1 = bounded_map(zeta(0), comp.bounds.rho_lo, comp.bounds.rho_hi);
      break;
    case ComponentKind::kWhiteNoise:
      break;
  }
  return sp;
}

Eigen::VectorXd zeta_unmap(const SerialParams& sp, const LatentComponent& comp,
                           int N) {
  Eigen::VectorXd zeta(zetalen(comp, N));
  switch (comp.kind) {
    case ComponentKind::kArma:
      zeta << pacf_unmap(sp.ar), pacf_unmap(sp.ma);
      break;
    case ComponentKind::kSarma:
      zeta << pacf_unmap(sp.ar), pacf_unmap(sp.ma), pacf_unmap(sp.sar),
          pacf_unmap(sp.sma);
      break;
    case ComponentKind::kVarma:
      zeta << var_unmap(sp.arM), var_unmap(sp.maM);
      break;
    case ComponentKind::kSvarma:
      zeta << var_unmap(sp.arM), var_unmap(sp.maM), var_unmap(sp.sarM),
          var_unmap(sp.smaM);
      break;
    case ComponentKind::kButterworth:
    case ComponentKind::kBalanced:
    case ComponentKind::kButterworthStab:
    case ComponentKind::kBalancedStab:
      zeta(0) = bounded_unmap(sp.rho, comp.bounds.rho_lo, comp.bounds.rho_hi);
      zeta(1) =
          bounded_unmap(sp.omega, comp.bounds.omega_lo, comp.bounds.omega_hi);
      break;
    case ComponentKind::kDampedTrend:
      zeta(0) = bounded_unmap(sp.phi1, comp.bounds.rho_lo, comp.bounds.rho_hi);
      break;
    case ComponentKind::kWhiteNoise:
      break;
  }
  return zeta;
}

// --- psi <-> param ----------------------------------------------------------

ParamSet psi_to_par(const Eigen::VectorXd& psi, const ModelSpec& mdl) {
  PsiLayout lay = psi_layout(mdl);
  if (psi.size() != lay.total)
    throw std::invalid_argument("psi_to_par: psi length mismatch");
  ParamSet par;
  for (std::size_t k = 0; k < mdl.components.size(); ++k) {
    const auto& comp = mdl.components[k];
    par.covars.push_back(
        xi_map(psi.segment(lay.comp_xi[k], xilen(comp, mdl.N)), mdl.N,
               comp.vrank));
    par.serial.push_back(zeta_map(
        psi.segment(lay.comp_zeta[k], zetalen(comp, mdl.N)), comp, mdl.N));
  }
  par.beta = psi.tail(mdl.regressor_count());
  return par;
}

Eigen::VectorXd par_to_psi(const ParamSet& par, const ModelSpec& mdl) {
  PsiLayout lay = psi_layout(mdl);
  Eigen::VectorXd psi(lay.total);
  for (std::size_t k = 0; k < mdl.components.size(); ++k) {
    const auto& comp = mdl.components[k];
    psi.segment(lay.comp_xi[k], xilen(comp, mdl.N)) =
        xi_unmap(par.covars[k], mdl.N, comp.vrank);
    psi.segment(lay.comp_zeta[k], zetalen(comp, mdl.N)) =
        zeta_unmap(par.serial[k], comp, mdl.N);
  }
  psi.tail(mdl.regressor_count()) = par.beta;
  return psi;
}

ParamSet default_param(const ModelSpec& mdl, const Constraint& constraint) {
  const int len = psi_length(mdl);
  const int k = static_cast<int>(constraint.C.rows());
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(len - k);
  return psi_to_par(eta_to_psi(eta, constraint, len), mdl);
}

// --- constraints ------------------------------------------------------------

namespace {

struct QrParts {
  Eigen::MatrixXd r1inv_r2;    // R1^{-1} R2, k x (m-k)
  Eigen::VectorXd r1inv_qb;    // R1^{-1} Q' b, k
  Eigen::PermutationMatrix<Eigen::Dynamic> perm;  // Pi^{-1}
  int k = 0, m = 0;
};

QrParts qr_parts(const Constraint& con) {
  const int k = static_cast<int>(con.C.rows());
  const int m = static_cast<int>(con.C.cols());
  if (k >= m)
    throw std::invalid_argument("constraint: row count must be < psi length");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(con.C);
  if (qr.rank() < k)
    throw std::invalid_argument("constraint: C is rank deficient");
  Eigen::MatrixXd r =
      qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  Eigen::MatrixXd q = qr.householderQ();
  QrParts parts;
  parts.k = k;
  parts.m = m;
  Eigen::MatrixXd r1 = r.leftCols(k);
  parts.r1inv_r2 = r1.triangularView<Eigen::Upper>().solve(r.rightCols(m - k));
  parts.r1inv_qb = r1.triangularView<Eigen::Upper>().solve(
      q.transpose().topRows(k) * con.b);
  parts.perm = qr.colsPermutation();
  return parts;
}

}  // namespace

ConstraintAffine constraint_affine(const Constraint& con, int psi_len) {
  ConstraintAffine aff;
  if (con.empty()) {
    aff.A = Eigen::MatrixXd::Identity(psi_len, psi_len);
    aff.c = Eigen::VectorXd::Zero(psi_len);
    return aff;
  }
  QrParts p = qr_parts(con);
  Eigen::MatrixXd top = -p.r1inv_r2;
  Eigen::MatrixXd stacked(p.m, p.m - p.k);
  stacked.topRows(p.k) = top;
  stacked.bottomRows(p.m - p.k) =
      Eigen::MatrixXd::Identity(p.m - p.k, p.m - p.k);
  aff.A = p.perm * stacked;
  Eigen::VectorXd cst = Eigen::VectorXd::Zero(p.m);
  cst.head(p.k) = p.r1inv_qb;
  aff.c = p.perm * cst;
  return aff;
}

Eigen::VectorXd eta_to_psi(const Eigen::VectorXd& eta,
                           const Constraint& constraint, int psi_len) {
  if (constraint.empty()) return eta;
  ConstraintAffine aff = constraint_affine(constraint, psi_len);
  return aff.A * eta + aff.c;
}

Eigen::VectorXd psi_to_eta(const Eigen::VectorXd& psi,
                           const Constraint& constraint) {
  if (constraint.empty()) return psi;
  QrParts p = qr_parts(constraint);
  Eigen::VectorXd permuted = p.perm.inverse() * psi;
  return permuted.tail(p.m - p.k);
}

Constraint constrain_reg(const ModelSpec& mdl,
                         const std::vector<std::vector<int>>& regindex,
                         const std::vector<Eigen::VectorXd>& combos) {
  PsiLayout lay = psi_layout(mdl);
  std::vector<int> coords;
  int flat = 0;
  for (int j = 0; j < mdl.N; ++j) {
    for (int r = 0; r < static_cast<int>(mdl.regressors[j].size()); ++r) {
      if (j < static_cast<int>(regindex.size()))
        for (int want : regindex[j])
          if (want == r) coords.push_back(lay.beta_offset + flat);
      ++flat;
    }
  }
  const int k = static_cast<int>(coords.size());
  Constraint con;
  if (combos.empty()) {
    if (k < 2) return con;
    con.C = Eigen::MatrixXd::Zero(k - 1, lay.total);
    con.b = Eigen::VectorXd::Zero(k - 1);
    for (int i = 1; i < k; ++i) {
      con.C(i - 1, coords[0]) = 1.0;
      con.C(i - 1, coords[i]) = -1.0;
    }
    return con;
  }
  con.C = Eigen::MatrixXd::Zero(combos.size(), lay.total);
  con.b = Eigen::VectorXd::Zero(combos.size());
  for (std::size_t r = 0; r < combos.size(); ++r) {
    if (combos[r].size() != k + 1)
      throw std::invalid_argument("constrain_reg: combo row length mismatch");
    con.b(r) = combos[r](0);
    for (int i = 0; i < k; ++i) con.C(r, coords[i]) = combos[r](i + 1);
  }
  return con;
}

Constraint stack_constraints(const Constraint& a, const Constraint& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  if (a.C.cols() != b.C.cols())
    throw std::invalid_argument("stack_constraints: width mismatch");
  Constraint out;
  out.C.resize(a.C.rows() + b.C.rows(), a.C.cols());
  out.C << a.C, b.C;
  out.b.resize(a.b.size() + b.b.size());
  out.b << a.b, b.b;
  return out;
}

Constraint read_constraint_csv(const std::string& path, int psi_len) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open constraint file: " + path);
  std::vector<Eigen::VectorXd> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r\n,") == std::string::npos) continue;
    std::istringstream ss(line);
    std::vector<double> vals;
    std::string cell;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    if (static_cast<int>(vals.size()) != psi_len + 1)
      throw std::runtime_error("constraint row length != 1 + psi length");
    rows.push_back(Eigen::Map<Eigen::VectorXd>(vals.data(), vals.size()));
  }
  Constraint con;
  con.C.resize(rows.size(), psi_len);
  con.b.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    con.b(i) = rows[i](0);
    con.C.row(i) = rows[i].tail(psi_len).transpose();
  }
  return con;
}

// --- conditioning -----------------------------------------------------------

Eigen::VectorXd conditions(const Eigen::MatrixXd& sigma) {
  const int n = static_cast<int>(sigma.rows());
  GcdResult g = gcd_decompose(sigma);
  Eigen::VectorXd tau(n);
  for (int j = 0; j < n; ++j) {
    if (g.d(j) > 0.0 && sigma(j, j) > 0.0)
      tau(j) = std::log(g.d(j) / sigma(j, j));
    else
      tau(j) = -kInf;
  }
  return tau;
}

Eigen::MatrixXd render_pd(const Eigen::MatrixXd& sigma, double alpha) {
  const int n = static_cast<int>(sigma.rows());
  GcdResult g = gcd_decompose(sigma);
  const double scale = std::max(std::abs(sigma.trace()), 1e-300);
  Eigen::VectorXd dtil = g.d;
  for (int j = 0; j < n; ++j) {
    double x = 0.0;  // link variance l' Dtil l over preceding entries
    for (int k = 0; k < j; ++k) x += g.L(j, k) * g.L(j, k) * dtil(k);
    const double dj = g.d(j);
    bool low = !(dj > 0.0) || (x > 0.0 && -std::log1p(x / dj) < alpha);
    if (!low) continue;
    if (x > 0.0)
      dtil(j) = x / (std::exp(-alpha) - 1.0);
    else if (!(dj > 0.0))
      dtil(j) = 1e-8 * scale;  // degenerate leading pivot, no links to scale by
    if (dtil(j) < dj) dtil(j) = dj;
  }
  return g.L * dtil.asDiagonal() * g.L.transpose();
}

ReduceResult reduce(const ModelSpec& mdl, const ParamSet& par, double thresh,
                    bool model_flag) {
  ReduceResult out{mdl, par};
  for (std::size_t k = 0; k < mdl.components.size(); ++k) {
    const auto& comp = mdl.components[k];
    Eigen::MatrixXd sigma = par.covars[k].sigma();
    if (!model_flag) {
      Eigen::MatrixXd fixed = render_pd(sigma, thresh);
      GcdResult g = gcd_decompose(fixed);
      GcdPair pair;
      const int r = static_cast<int>(comp.vrank.size());
      pair.L.resize(mdl.N, r);
      pair.d.resize(r);
      for (int c = 0; c < r; ++c) {
        pair.L.col(c) = g.L.col(comp.vrank[c]);
        pair.d(c) = g.d(comp.vrank[c]);
      }
      out.par.covars[k] = pair;
      continue;
    }
    Eigen::VectorXd tau = conditions(sigma);
    GcdResult g = gcd_decompose(sigma);
    std::vector<int> kept;
    std::vector<int> kept_cols;
    for (int c = 0; c < static_cast<int>(comp.vrank.size()); ++c) {
      int j = comp.vrank[c];
      if (g.d(j) > 0.0 && tau(j) >= thresh) {
        kept.push_back(j);
        kept_cols.push_back(c);
      }
    }
    double floor_d = 1e-8 * std::max(std::abs(sigma.trace()), 1e-300);
    if (kept.empty()) {
      // keep the best-conditioned single index so the component survives
      int best = comp.vrank[0];
      for (int j : comp.vrank)
        if (g.d(j) > g.d(best)) best = j;
      kept.push_back(best);
    }
    GcdPair pair;
    pair.L.resize(mdl.N, kept.size());
    pair.d.resize(kept.size());
    for (std::size_t c = 0; c < kept.size(); ++c) {
      pair.L.col(c) = g.L.col(kept[c]);
      pair.d(c) = std::max(g.d(kept[c]), floor_d);
    }
    out.mdl.components[k].vrank = kept;
    out.par.covars[k] = pair;
  }
  return out;
}

}  // namespace msts
