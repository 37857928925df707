#include "msts/gauss.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace msts {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kPi = std::numbers::pi;

Poly minus_poly(const VectorXd& coef) {
  Poly p(coef.size() + 1);
  p(0) = 1.0;
  for (int i = 0; i < coef.size(); ++i) p(i + 1) = -coef(i);
  return p;
}

Poly seasonal_poly(const VectorXd& coef, int s) {
  Poly p = Poly::Zero(coef.size() * s + 1);
  p(0) = 1.0;
  for (int i = 0; i < coef.size(); ++i) p((i + 1) * s) = -coef(i);
  return p;
}

}  // namespace

double DlResult::cast_cov_at(int row1, int col1, int row2, int col2) const {
  int i = -1, j = -1;
  for (std::size_t k = 0; k < cast_coords.size(); ++k) {
    if (cast_coords[k] == std::make_pair(row1, col1)) i = static_cast<int>(k);
    if (cast_coords[k] == std::make_pair(row2, col2)) j = static_cast<int>(k);
  }
  if (i < 0 || j < 0) return 0.0;
  return cast_cov(i, j);
}

DlResult dl_midcast(const MatPoly& acvf, const MatrixXd& diffdata, int span,
                    bool need_cov) {
  const int T = static_cast<int>(diffdata.rows());
  const int N = static_cast<int>(diffdata.cols());
  const int n = T + 2 * span;
  if (static_cast<int>(acvf.size()) < n)
    throw std::invalid_argument("dl_midcast: acvf does not cover the span");
  const double scale = std::max(acvf[0].trace(), 1e-300);

  MatrixXd wz = MatrixXd::Zero(n, N);
  std::vector<std::pair<int, int>> miss;
  for (int t = 0; t < n; ++t)
    for (int c = 0; c < N; ++c) {
      if (t < span || t >= span + T) {
        miss.emplace_back(t, c);
      } else if (is_na(diffdata(t - span, c))) {
        miss.emplace_back(t, c);
      } else {
        wz(t, c) = diffdata(t - span, c);
      }
    }
  const int m = static_cast<int>(miss.size());

  DlResult out;
  out.innovations_valid = (m == 0);
  if (out.innovations_valid) {
    out.innovations.resize(n, N);
    out.innovation_covs.reserve(n);
  }

  // Predictor coefficients in reversed layout: block p of frev multiplies
  // w_p in the order-t prediction of w_t (so block p holds Phi_{t,t-p});
  // brev is the backward analogue.  The layout keeps the prediction and the
  // next-order cross-covariance as single contiguous products.
  const int blk = std::max(1, (n - 1) * N);
  MatrixXd frev = MatrixXd::Zero(N, blk), brev = MatrixXd::Zero(N, blk);
  MatrixXd fnew = frev, bnew = brev;
  MatrixXd gstack(n * N, N);  // Gamma(k) at rows k N
  for (int k = 0; k < n; ++k) gstack.middleRows(k * N, N) = acvf[k];
  VectorXd wstack(n * N);  // w_t stacked by time
  for (int t = 0; t < n; ++t) wstack.segment(t * N, N) = wz.row(t).transpose();

  MatrixXd vf = acvf[0], vb = acvf[0];
  double logdet = 0.0, quad = 0.0;
  MatrixXd pmm = MatrixXd::Zero(m, m);
  VectorXd qv = VectorXd::Zero(m);
  MatrixXd abuf = MatrixXd::Zero(N, m);  // unit-load innovations per slot
  int active = 0;  // missing slots with time index <= t (miss is time-sorted)

  for (int t = 0; t < n; ++t) {
    VectorXd bt = wstack.segment(t * N, N);
    if (t > 0) bt.noalias() -= frev.leftCols(t * N) * wstack.head(t * N);

    Eigen::LDLT<MatrixXd> vchol(vf);
    if (vchol.info() != Eigen::Success ||
        vchol.vectorD().minCoeff() <= 1e-13 * scale)
      throw std::runtime_error(
          "dl_midcast: degenerate innovation covariance (model is not "
          "invertible enough for this sample length)");
    for (int i = 0; i < N; ++i) logdet += std::log(vchol.vectorD()(i));
    VectorXd gb = vchol.solve(bt);
    quad += bt.dot(gb);
    if (out.innovations_valid) {
      Eigen::LLT<MatrixXd> llt(vf);
      out.innovations.row(t) = llt.matrixL().solve(bt).transpose();
      out.innovation_covs.push_back(vf);
    }

    while (active < m && miss[active].first <= t) ++active;
    if (active > 0) {
      auto A = abuf.leftCols(active);
      for (int i = 0; i < active; ++i) {
        const auto& [tau, c] = miss[i];
        if (tau == t) {
          A.col(i).setZero();
          A(c, i) = 1.0;
        } else {
          A.col(i) = -frev.col(tau * N + c);
        }
      }
      MatrixXd ga = vchol.solve(A);
      pmm.topLeftCorner(active, active).noalias() += A.transpose() * ga;
      qv.head(active).noalias() += A.transpose() * gb;
    }

    if (t + 1 < n) {  // extend the predictor order
      MatrixXd delta = acvf[t + 1];
      if (t > 0)
        delta.noalias() -= frev.leftCols(t * N) * gstack.middleRows(N, t * N);
      MatrixXd phi = vb.ldlt().solve(delta.transpose()).transpose();
      MatrixXd phib = vf.ldlt().solve(delta);
      phib.transposeInPlace();
      // Shifted coefficient update in the reversed layout.
      if (N == 1) {
        fnew.row(0).segment(1, t) =
            frev.row(0).head(t) -
            phi(0, 0) * brev.row(0).head(t).reverse();
        bnew.row(0).segment(1, t) =
            brev.row(0).head(t) -
            phib(0, 0) * frev.row(0).head(t).reverse();
      } else {
        for (int p = 1; p <= t; ++p) {
          fnew.middleCols(p * N, N).noalias() =
              frev.middleCols((p - 1) * N, N) -
              phi * brev.middleCols((t - p) * N, N);
          bnew.middleCols(p * N, N).noalias() =
              brev.middleCols((p - 1) * N, N) -
              phib * frev.middleCols((t - p) * N, N);
        }
      }
      fnew.leftCols(N) = phi;
      bnew.leftCols(N) = phib;
      std::swap(frev, fnew);
      std::swap(brev, bnew);
      MatrixXd vf_new = vf - phi * vb * phi.transpose();
      MatrixXd vb_new = vb - phib * vf * phib.transpose();
      vf = 0.5 * (vf_new + vf_new.transpose());
      vb = 0.5 * (vb_new + vb_new.transpose());
    }
  }

  out.patched = wz;
  out.cast_coords = miss;
  if (m > 0) {
    pmm = 0.5 * (pmm + pmm.transpose());
    Eigen::LDLT<MatrixXd> pchol(pmm);
    if (pchol.info() != Eigen::Success || pchol.vectorD().minCoeff() <= 0.0)
      throw std::runtime_error("dl_midcast: cast precision not positive");
    VectorXd casts = -pchol.solve(qv);
    double logdet_p = 0.0;
    for (int i = 0; i < m; ++i) logdet_p += std::log(pchol.vectorD()(i));
    // Marginalization identity: -2 log f(obs) = -2 log f(completed)
    // + log det of the conditional precision of the missing block.
    out.divergence = logdet + quad + qv.dot(casts) + logdet_p;
    for (int i = 0; i < m; ++i)
      out.patched(miss[i].first, miss[i].second) = casts(i);
    if (need_cov) out.cast_cov = pchol.solve(MatrixXd::Identity(m, m));
  } else {
    out.divergence = logdet + quad;
  }
  return out;
}

MatrixXd forecast(const MatPoly& acvf, const MatrixXd& diffdata, int horizon) {
  const int T = static_cast<int>(diffdata.rows());
  const int N = static_cast<int>(diffdata.cols());
  MatrixXd padded(T + horizon, N);
  padded.topRows(T) = diffdata;
  padded.bottomRows(horizon).setConstant(na_value());
  DlResult dl = dl_midcast(acvf, padded, 0, /*need_cov=*/false);
  return dl.patched;
}

namespace {

// Differenced, regression-adjusted data: delta(B) X - delta(B) z' beta,
// with NaN propagation through every window that touches a missing value.
MatrixXd diff_demeaned(const Eigen::VectorXd& psi, const ModelSpec& mdl,
                       const MatrixXd& data, ParamSet* par_out) {
  ParamSet par = psi_to_par(psi, mdl);
  const Poly delta = mdl.full_delta();
  MatrixXd diff = difference_matrix(data, delta);
  MatrixXd mu = regression_mean(mdl, par.beta);
  MatrixXd mu_diff = difference_matrix(mu, delta);
  diff -= mu_diff;  // NaN entries stay NaN
  if (par_out) *par_out = std::move(par);
  return diff;
}

}  // namespace

double lik(const Eigen::VectorXd& psi, const ModelSpec& mdl,
           const MatrixXd& data) {
  ParamSet par;
  MatrixXd w = diff_demeaned(psi, mdl, data, &par);
  MatPoly acvf = total_acvf(mdl, par, static_cast<int>(w.rows()) - 1);
  return dl_midcast(acvf, w, 0, /*need_cov=*/false).divergence;
}

double whittle(const Eigen::VectorXd& psi, const ModelSpec& mdl,
               const MatrixXd& data) {
  ParamSet par;
  MatrixXd w = diff_demeaned(psi, mdl, data, &par);
  const int n = static_cast<int>(w.rows());
  const int N = mdl.N;
  for (int t = 0; t < n; ++t)
    for (int c = 0; c < N; ++c)
      if (is_na(w(t, c)))
        throw std::invalid_argument("whittle: missing values not supported");
  double div = 0.0;
  for (int mfreq = 0; mfreq < n; ++mfreq) {
    const double lam = 2.0 * kPi * mfreq / n;
    Eigen::VectorXcd d = Eigen::VectorXcd::Zero(N);
    for (int t = 0; t < n; ++t)
      d += std::exp(std::complex<double>(0.0, -lam * (t + 1))) *
           w.row(t).transpose().cast<std::complex<double>>();
    MatrixXcd I = d * d.adjoint() / static_cast<double>(n);
    MatrixXcd F = MatrixXcd::Zero(N, N);
    for (std::size_t k = 0; k < mdl.components.size(); ++k)
      F += component_spectrum_at(mdl, par, static_cast<int>(k), lam);
    Eigen::PartialPivLU<MatrixXcd> lu(F);
    std::complex<double> ld = 0.0;
    MatrixXcd u = lu.matrixLU();
    for (int i = 0; i < N; ++i) ld += std::log(u(i, i));
    div += ld.real() + lu.solve(I).trace().real();
  }
  return div;
}

ResidResult resid(const Eigen::VectorXd& psi, const ModelSpec& mdl,
                  const MatrixXd& data) {
  ParamSet par;
  MatrixXd w = diff_demeaned(psi, mdl, data, &par);
  MatPoly acvf = total_acvf(mdl, par, static_cast<int>(w.rows()) - 1);
  DlResult dl = dl_midcast(acvf, w, 0, /*need_cov=*/false);
  if (!dl.innovations_valid)
    dl = dl_midcast(acvf, dl.patched, 0, /*need_cov=*/false);
  ResidResult out;
  out.residuals = dl.innovations;
  out.model_acvf = acvf;
  return out;
}

double NormalSampler::operator()() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Box-Muller on uniforms from the 64-bit twister.
  double u1 = 0.0;
  while (u1 <= 1e-300)
    u1 = static_cast<double>(state_()) / 18446744073709551616.0;
  double u2 = static_cast<double>(state_()) / 18446744073709551616.0;
  double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * kPi * u2);
  have_spare_ = true;
  return r * std::cos(2.0 * kPi * u2);
}

namespace {

// Scalar ARMA representation used for simulation of identity-scaled
// component classes.
struct SimArma {
  Poly ar;
  Poly ma;
  double innov_var = 1.0;
};

SimArma sim_representation(const LatentComponent& comp, const SerialParams& sp) {
  switch (comp.kind) {
    case ComponentKind::kWhiteNoise:
      return {Poly::Ones(1), Poly::Ones(1), 1.0};
    case ComponentKind::kArma:
      return {minus_poly(sp.ar), minus_poly(sp.ma), 1.0};
    case ComponentKind::kSarma: {
      const int s = comp.order.at(4);
      return {poly_mult(minus_poly(sp.ar), seasonal_poly(sp.sar, s)),
              poly_mult(minus_poly(sp.ma), seasonal_poly(sp.sma, s)), 1.0};
    }
    case ComponentKind::kDampedTrend: {
      Poly ar(2);
      ar << 1.0, -sp.phi1;
      return {ar, Poly::Ones(1), 1.0};
    }
    case ComponentKind::kButterworth:
    case ComponentKind::kBalanced: {
      CycleParams cp;
      cp.balanced = comp.kind == ComponentKind::kBalanced;
      cp.n = comp.order.at(0);
      cp.rho = sp.rho;
      cp.omega = sp.omega;
      CycleArma rep = cycle_polys(cp);
      return {rep.ar, rep.ma, rep.innov_var};
    }
    case ComponentKind::kButterworthStab:
    case ComponentKind::kBalancedStab: {
      CycleParams cp;
      cp.balanced = comp.kind == ComponentKind::kBalancedStab;
      cp.n = comp.order.at(0);
      cp.rho = sp.rho;
      cp.omega = sp.omega;
      // Factor the noise-subtracted numerator.
      StabilizeResult st = stabilize(cp, 0);
      CycleArma rep = cycle_polys(cp);
      const int p = static_cast<int>(rep.ar.size()) - 1;
      const int q = static_cast<int>(rep.ma.size()) - 1;
      const int deg = std::max(p, q);
      VectorXd nu = VectorXd::Zero(deg + 1);
      for (int h = 0; h <= deg; ++h) {
        double vm = 0.0, va = 0.0;
        for (int i = 0; i + h <= q; ++i) vm += rep.ma(i) * rep.ma(i + h);
        for (int i = 0; i + h <= p; ++i) va += rep.ar(i) * rep.ar(i + h);
        nu(h) = rep.innov_var * vm - st.c * va;
      }
      SpecFactResult fac = spec_fact(nu);
      return {rep.ar, fac.ma, fac.innov_var};
    }
    default:
      throw std::logic_error("sim_representation: matrix class");
  }
}

}  // namespace

MatrixXd simulate(const ModelSpec& mdl, const ParamSet& par, int T, int burn,
                  std::uint64_t seed) {
  const int N = mdl.N;
  NormalSampler normal(seed);
  MatrixXd y = MatrixXd::Zero(T, N);
  for (std::size_t k = 0; k < mdl.components.size(); ++k) {
    const auto& comp = mdl.components[k];
    const GcdPair& g = par.covars[k];
    const int r = static_cast<int>(g.d.size());
    const int d = static_cast<int>(comp.delta.size()) - 1;
    const int len = burn + d + T;
    // Driving noise with covariance L diag(d) L'.
    auto draw_eps = [&]() {
      VectorXd z(r);
      for (int i = 0; i < r; ++i)
        z(i) = normal() * std::sqrt(std::max(g.d(i), 0.0));
      return VectorXd(g.L * z);
    };
    MatrixXd core(len, N);
    if (comp.kind == ComponentKind::kVarma ||
        comp.kind == ComponentKind::kSvarma) {
      const SerialParams& sp = par.serial[k];
      MatPoly ar, ma;
      std::vector<MatrixXd> id{MatrixXd::Identity(N, N)};
      if (comp.kind == ComponentKind::kVarma) {
        ar = MatPoly{MatrixXd::Identity(N, N)};
        for (const auto& a : sp.arM) ar.push_back(-a);
        ma = MatPoly{MatrixXd::Identity(N, N)};
        for (const auto& a : sp.maM) ma.push_back(-a);
      } else {
        const int s = comp.order.at(4);
        MatPoly arr{MatrixXd::Identity(N, N)}, maa{MatrixXd::Identity(N, N)};
        for (const auto& a : sp.arM) arr.push_back(-a);
        for (const auto& a : sp.maM) maa.push_back(-a);
        MatPoly sar(sp.sarM.size() * s + 1, MatrixXd::Zero(N, N));
        sar[0].setIdentity();
        for (std::size_t i = 0; i < sp.sarM.size(); ++i)
          sar[(i + 1) * s] = -sp.sarM[i];
        MatPoly sma(sp.smaM.size() * s + 1, MatrixXd::Zero(N, N));
        sma[0].setIdentity();
        for (std::size_t i = 0; i < sp.smaM.size(); ++i)
          sma[(i + 1) * s] = -sp.smaM[i];
        ar = poly_mult_mat(arr, sar);
        ma = poly_mult_mat(maa, sma);
      }
      std::vector<VectorXd> eps;
      for (int t = 0; t < len; ++t) {
        eps.push_back(draw_eps());
        VectorXd v = ma[0] * eps[t];
        for (std::size_t j = 1; j < ma.size(); ++j)
          if (t >= static_cast<int>(j)) v += ma[j] * eps[t - j];
        for (std::size_t i = 1; i < ar.size(); ++i)
          if (t >= static_cast<int>(i))
            v -= ar[i] * core.row(t - i).transpose();
        core.row(t) = v.transpose();
      }
    } else {
      SimArma rep = sim_representation(comp, par.serial[k]);
      const double sd = std::sqrt(std::max(rep.innov_var, 0.0));
      std::vector<VectorXd> eps;
      for (int t = 0; t < len; ++t) {
        eps.push_back(draw_eps() * sd);
        VectorXd v = rep.ma(0) * eps[t];
        for (int j = 1; j < rep.ma.size(); ++j)
          if (t >= j) v += rep.ma(j) * eps[t - j];
        for (int i = 1; i < rep.ar.size(); ++i)
          if (t >= i) v -= rep.ar(i) * core.row(t - i).transpose();
        core.row(t) = v.transpose();
      }
    }
    // Integrate through the component's differencing operator with zero
    // initial conditions, then keep the last T rows.
    MatrixXd level = MatrixXd::Zero(d + T, N);
    for (int t = 0; t < d + T; ++t) {
      VectorXd v = core.row(burn + t).transpose();
      for (int i = 1; i <= d; ++i)
        if (t >= i) v -= comp.delta(i) * level.row(t - i).transpose();
      level.row(t) = v.transpose();
    }
    y += level.bottomRows(T);
  }
  if (mdl.regressor_count() > 0) y += regression_mean(mdl, par.beta);
  return y;
}

LevelCasts integrate_casts(const Poly& delta, const MatrixXd& level_data,
                           int span, const DlResult& dl) {
  const int T = static_cast<int>(level_data.rows());
  const int N = static_cast<int>(level_data.cols());
  const int d = static_cast<int>(delta.size()) - 1;
  const int n_lev = T + 2 * span;
  const int m_w = static_cast<int>(dl.cast_coords.size());

  // Index of each differenced cast slot.
  auto w_index = [&](int wrow, int col) -> int {
    for (std::size_t i = 0; i < dl.cast_coords.size(); ++i)
      if (dl.cast_coords[i] == std::make_pair(wrow, col))
        return static_cast<int>(i);
    return -1;
  };

  LevelCasts out;
  out.patched = MatrixXd::Constant(n_lev, N, na_value());
  for (int t = 0; t < T; ++t) out.patched.row(span + t) = level_data.row(t);

  std::vector<std::pair<int, int>> coords;
  std::vector<VectorXd> coef_rows;

  for (int c = 0; c < N; ++c) {
    auto known = [&](int g) { return !is_na(out.patched(g, c)); };
    // Anchor: first run of d consecutive observed values (any run for d=0).
    int anchor = -1;
    for (int g = span; g + d <= span + T; ++g) {
      bool ok = true;
      for (int i = 0; i < d; ++i) ok = ok && known(g + i);
      if (ok) {
        anchor = g;
        break;
      }
    }
    std::vector<VectorXd> col_coefs(n_lev);
    if (anchor < 0) {
      // No usable initial values: zero initial conditions before the data.
      anchor = span;
      for (int i = 0; i < d; ++i)
        if (span + i < n_lev && !known(span + i)) {
          out.patched(span + i, c) = 0.0;
          col_coefs[span + i] = VectorXd::Zero(m_w);
          coords.emplace_back(span + i, c);
          coef_rows.push_back(col_coefs[span + i]);
        }
    }
    // Forward fill at and beyond the anchor.
    for (int g = anchor; g < n_lev; ++g) {
      if (known(g)) continue;
      const int wrow = g - d;  // window ends at level slot g
      if (wrow < 0) continue;  // handled by the backward sweep
      double v = dl.patched(wrow, c);
      VectorXd row = VectorXd::Zero(m_w);
      int wi = w_index(wrow, c);
      if (wi >= 0) row(wi) = 1.0;
      for (int i = 1; i <= d; ++i) {
        v -= delta(i) * out.patched(g - i, c);
        if (col_coefs[g - i].size() > 0) row -= delta(i) * col_coefs[g - i];
      }
      out.patched(g, c) = v;
      col_coefs[g] = row;
      coords.emplace_back(g, c);
      coef_rows.push_back(row);
    }
    // Backward fill before the anchor.
    for (int g = anchor - 1; g >= 0; --g) {
      if (known(g)) continue;
      const int wrow = g;  // window starting at level slot g
      double v = dl.patched(wrow, c);
      VectorXd row = VectorXd::Zero(m_w);
      int wi = w_index(wrow, c);
      if (wi >= 0) row(wi) = 1.0;
      for (int i = 0; i < d; ++i) {
        v -= delta(i) * out.patched(g + d - i, c);
        if (col_coefs[g + d - i].size() > 0)
          row -= delta(i) * col_coefs[g + d - i];
      }
      out.patched(g, c) = v / delta(d);
      col_coefs[g] = row / delta(d);
      coords.emplace_back(g, c);
      coef_rows.push_back(col_coefs[g]);
    }
  }

  out.coords = std::move(coords);
  const int m_l = static_cast<int>(out.coords.size());
  MatrixXd A(m_l, m_w);
  for (int i = 0; i < m_l; ++i) A.row(i) = coef_rows[i].transpose();
  if (dl.cast_cov.rows() == m_w && m_w > 0)
    out.cov = A * dl.cast_cov * A.transpose();
  else
    out.cov = MatrixXd::Zero(m_l, m_l);
  return out;
}

namespace {

// Power of the polynomial trend regressor encoded by a label, or -1.
int trend_power(const std::string& label, int unit_roots) {
  if (label == "Trend") return unit_roots > 0 ? unit_roots : 0;
  if (label.rfind("Trend^", 0) == 0) return std::stoi(label.substr(6));
  return -1;
}

}  // namespace

ExtractionTriple cast_extract(const MatrixXd& data, const ModelSpec& mdl,
                              const ParamSet& par, int span) {
  const int T = mdl.T, N = mdl.N;
  const Poly delta = mdl.full_delta();
  MatrixXd mu = regression_mean(mdl, par.beta);
  MatrixXd demeaned = data - mu;
  MatrixXd w = difference_matrix(demeaned, delta);
  const int n = static_cast<int>(w.rows()) + 2 * span;
  MatPoly acvf = total_acvf(mdl, par, n - 1);
  DlResult dl = dl_midcast(acvf, w, span, /*need_cov=*/true);
  LevelCasts lc = integrate_casts(delta, demeaned, span, dl);

  const int unit_roots = unit_root_multiplicity(delta);
  ExtractionTriple out;
  out.point.resize(T + 2 * span, N);
  out.upper.resize(T + 2 * span, N);
  out.lower.resize(T + 2 * span, N);
  for (int g = 0; g < T + 2 * span; ++g) {
    const int t = g - span;  // 0-based position in the original sample
    for (int c = 0; c < N; ++c) {
      double effect = 0.0;
      if (t >= 0 && t < T) {
        effect = mu(t, c);
      } else {
        int bi = 0;
        for (int j = 0; j < N; ++j)
          for (const auto& reg : mdl.regressors[j]) {
            int p = trend_power(reg.label, unit_roots);
            if (j == c && p >= 0)
              effect += par.beta(bi) * std::pow(t + 1.0, p);
            ++bi;
          }
      }
      out.point(g, c) = lc.patched(g, c) + effect;
      out.upper(g, c) = out.point(g, c);
      out.lower(g, c) = out.point(g, c);
    }
  }
  for (std::size_t i = 0; i < lc.coords.size(); ++i) {
    auto [g, c] = lc.coords[i];
    double se = std::sqrt(std::max(lc.cov(i, i), 0.0));
    out.upper(g, c) += 2.0 * se;
    out.lower(g, c) -= 2.0 * se;
  }
  return out;
}

}  // namespace msts
