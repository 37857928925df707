#include "msts/extract.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "msts/acf.hpp"

namespace msts {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using std::complex;

constexpr double kPi = std::numbers::pi;

std::vector<int> complement(const std::vector<int>& sig, int K) {
  std::vector<int> out;
  for (int k = 0; k < K; ++k)
    if (std::find(sig.begin(), sig.end(), k) == sig.end()) out.push_back(k);
  return out;
}

// Banded differencing matrix: (T-d) N x T N, time-major stacking.
MatrixXd differencing_matrix(const Poly& delta, int T, int N) {
  const int d = static_cast<int>(delta.size()) - 1;
  MatrixXd out = MatrixXd::Zero((T - d) * N, T * N);
  for (int i = 0; i + d < T; ++i)
    for (int l = 0; l <= d; ++l)
      for (int c = 0; c < N; ++c)
        out(i * N + c, (i + d - l) * N + c) = delta(l);
  return out;
}

// Autocovariances of the differenced aggregate of a component subset, where
// each member is filtered by the product of the other members' deltas.
MatPoly subset_diff_acvf(const ModelSpec& mdl, const ParamSet& par,
                         const std::vector<int>& subset, int max_lag) {
  MatPoly sum(max_lag + 1, MatrixXd::Zero(mdl.N, mdl.N));
  for (int k : subset) {
    Poly omit = Poly::Ones(1);
    for (int j : subset)
      if (j != k) omit = poly_mult(omit, mdl.components[j].delta);
    MatPoly g = component_acvf_filtered(mdl, par, k, omit, max_lag);
    for (int h = 0; h <= max_lag; ++h) sum[h] += g[h];
  }
  return sum;
}

MatrixXd block_toeplitz_sym(const MatPoly& acvf, int T) {
  std::vector<MatrixXd> blocks;
  for (int lag = -(T - 1); lag <= T - 1; ++lag)
    blocks.push_back(lag >= 0 ? acvf[lag] : MatrixXd(acvf[-lag].transpose()));
  return block_toeplitz(blocks);
}

}  // namespace

SignalMatrices signal_matrix(const ModelSpec& mdl, const ParamSet& par,
                             const std::vector<int>& sigcomps) {
  const int T = mdl.T, N = mdl.N;
  const int K = static_cast<int>(mdl.components.size());
  const std::vector<int> noise = complement(sigcomps, K);
  SignalMatrices out;
  if (noise.empty()) {
    out.filter = MatrixXd::Identity(T * N, T * N);
    out.error_cov = MatrixXd::Zero(T * N, T * N);
    return out;
  }
  if (sigcomps.empty()) {
    out.filter = MatrixXd::Zero(T * N, T * N);
    out.error_cov = MatrixXd::Zero(T * N, T * N);
    return out;
  }
  Poly delta_s = Poly::Ones(1), delta_n = Poly::Ones(1);
  for (int k : sigcomps) delta_s = poly_mult(delta_s, mdl.components[k].delta);
  for (int k : noise) delta_n = poly_mult(delta_n, mdl.components[k].delta);
  const int ds = static_cast<int>(delta_s.size()) - 1;
  const int dn = static_cast<int>(delta_n.size()) - 1;

  MatrixXd ds_mat = differencing_matrix(delta_s, T, N);
  MatrixXd dn_mat = differencing_matrix(delta_n, T, N);
  MatrixXd sig_s = block_toeplitz_sym(
      subset_diff_acvf(mdl, par, sigcomps, T - ds - 1), T - ds);
  MatrixXd sig_n = block_toeplitz_sym(
      subset_diff_acvf(mdl, par, noise, T - dn - 1), T - dn);

  MatrixXd an = dn_mat.transpose() * sig_n.ldlt().solve(dn_mat);
  MatrixXd as = ds_mat.transpose() * sig_s.ldlt().solve(ds_mat);
  Eigen::LDLT<MatrixXd> m_chol(as + an);
  out.filter = m_chol.solve(an);
  out.error_cov = m_chol.solve(MatrixXd::Identity(T * N, T * N));
  return out;
}

ExtractionTriple extract(const MatrixXd& data, const SignalMatrices& sm,
                         const ModelSpec& mdl, const ParamSet& par) {
  const int T = mdl.T, N = mdl.N;
  for (int t = 0; t < T; ++t)
    for (int c = 0; c < N; ++c)
      if (is_na(data(t, c)))
        throw std::invalid_argument(
            "extract: missing values present (patch them with casts first)");
  MatrixXd demeaned = data - regression_mean(mdl, par.beta);
  VectorXd y(T * N);
  for (int t = 0; t < T; ++t)
    y.segment(t * N, N) = demeaned.row(t).transpose();
  VectorXd point = sm.filter * y;
  ExtractionTriple out;
  out.point.resize(T, N);
  out.upper.resize(T, N);
  out.lower.resize(T, N);
  for (int t = 0; t < T; ++t)
    for (int c = 0; c < N; ++c) {
      double v = point(t * N + c);
      double se = std::sqrt(std::max(sm.error_cov(t * N + c, t * N + c), 0.0));
      out.point(t, c) = v;
      out.upper(t, c) = v + 2.0 * se;
      out.lower(t, c) = v - 2.0 * se;
    }
  return out;
}

std::vector<MatrixXcd> frf(const ModelSpec& mdl, const ParamSet& par,
                           const std::vector<int>& sigcomps, int grid,
                           const MatPoly& target) {
  const int N = mdl.N;
  const int K = static_cast<int>(mdl.components.size());
  std::vector<MatrixXcd> out;
  out.reserve(grid + 1);
  for (int m = 0; m <= grid; ++m) {
    const double lam = kPi * m / grid;
    MatrixXcd s_sig = MatrixXcd::Zero(N, N), s_tot = MatrixXcd::Zero(N, N);
    for (int k = 0; k < K; ++k) {
      MatrixXcd f = component_spectrum_at(mdl, par, k, lam);
      s_tot += f;
      if (std::find(sigcomps.begin(), sigcomps.end(), k) != sigcomps.end())
        s_sig += f;
    }
    // Upsilon = s_sig s_tot^{-1}; both are Hermitian.
    MatrixXcd ups =
        s_tot.partialPivLu().solve(s_sig.adjoint()).adjoint();
    if (!target.empty())
      ups = poly_eval_mat(target,
                          std::exp(complex<double>(0.0, -lam))) *
            ups;
    out.push_back(ups);
  }
  return out;
}

WkFilter wk_coeffs(const ModelSpec& mdl, const ParamSet& par,
                   const std::vector<int>& sigcomps, const MatPoly& target,
                   int grid, int len) {
  const int N = mdl.N;
  const int K = static_cast<int>(mdl.components.size());
  std::vector<MatrixXcd> ups = frf(mdl, par, sigcomps, grid, target);

  WkFilter out;
  out.kernel.shift = len;
  out.kernel.coeffs.assign(2 * len + 1, MatrixXd::Zero(N, N));
  for (int h = -len; h <= len; ++h) {
    MatrixXd acc = 0.5 * ups[0].real();  // lambda = 0 endpoint
    for (int m = 1; m < grid; ++m) {
      const double lam = kPi * m / grid;
      const complex<double> rot = std::exp(complex<double>(0.0, lam * h));
      acc += (rot * ups[m]).real();
    }
    acc += 0.5 * (std::exp(complex<double>(0.0, kPi * h)) * ups[grid]).real();
    out.kernel.coeffs[h + len] = acc / grid;
  }

  // Bi-infinite error spectrum in cancellation form: every unit root of the
  // total density is divided out analytically before the ratio is taken.
  const std::vector<int> noise = complement(sigcomps, K);
  MatrixXd mse = MatrixXd::Zero(N, N);
  if (!noise.empty() && !sigcomps.empty()) {
    std::vector<std::vector<Poly>> omit_pair(K, std::vector<Poly>(K));
    for (int k : sigcomps)
      for (int j : noise) {
        Poly p = Poly::Ones(1);
        for (int i = 0; i < K; ++i)
          if (i != k && i != j) p = poly_mult(p, mdl.components[i].delta);
        omit_pair[k][j] = p;
      }
    auto err_at = [&](double lam) -> MatrixXd {
      MatrixXcd s_tot = MatrixXcd::Zero(N, N);
      for (int k = 0; k < K; ++k)
        s_tot += component_spectrum_at(mdl, par, k, lam);
      Eigen::PartialPivLU<MatrixXcd> lu(s_tot);
      const complex<double> z = std::exp(complex<double>(0.0, -lam));
      MatrixXcd acc = MatrixXcd::Zero(N, N);
      for (int k : sigcomps) {
        MatrixXcd fk = component_core_spectrum_at(mdl, par, k, lam);
        for (int j : noise) {
          MatrixXcd fj = component_core_spectrum_at(mdl, par, j, lam);
          acc += std::norm(poly_eval(omit_pair[k][j], z)) *
                 (fk * lu.solve(fj));
        }
      }
      if (!target.empty()) {
        MatrixXcd xi = poly_eval_mat(target, z);
        acc = xi * acc * xi.adjoint();
      }
      return acc.real();
    };
    mse = 0.5 * err_at(0.0);
    for (int m = 1; m < grid; ++m) mse += err_at(kPi * m / grid);
    mse += 0.5 * err_at(kPi);
    mse /= grid;
  }
  out.mse = 0.5 * (mse + mse.transpose());

  // Geometric tail estimate for the truncation warning.
  auto norm1 = [](const MatrixXd& m) { return m.cwiseAbs().sum(); };
  double last = norm1(out.kernel.coeffs.front()) +
                norm1(out.kernel.coeffs.back());
  double prev = norm1(out.kernel.coeffs[1]) +
                norm1(out.kernel.coeffs[2 * len - 1]);
  double ratio = prev > 1e-300 ? std::min(last / prev, 0.999) : 0.0;
  out.tail_bound = last * ratio / (1.0 - ratio);
  return out;
}

namespace {

// Shared patch-extend-filter pipeline with casting-error propagation.
ExtractionTriple filter_with_casts(const FilterKernel& ker,
                                   const LevelCasts& lc, int T, int N,
                                   int span, int horizon, bool need_mse,
                                   const MatrixXd* base_mse) {
  const int n_lev = T + 2 * span;
  const int rows = T + 2 * horizon;
  // cast lookup per (extended row, column)
  std::vector<int> cast_idx(static_cast<std::size_t>(n_lev) * N, -1);
  std::vector<char> row_has_cast(n_lev, 0);
  for (std::size_t i = 0; i < lc.coords.size(); ++i) {
    auto [g, c] = lc.coords[i];
    cast_idx[static_cast<std::size_t>(g) * N + c] = static_cast<int>(i);
    row_has_cast[g] = 1;
  }
  ExtractionTriple out;
  out.point.resize(rows, N);
  out.upper.resize(rows, N);
  out.lower.resize(rows, N);
  const int offset = span - horizon;  // extended row of the first output row
  for (int o = 0; o < rows; ++o) {
    const int g = o + offset;
    VectorXd u = VectorXd::Zero(N);
    for (int h = ker.min_lag(); h <= ker.max_lag(); ++h) {
      const int src = g - h;
      if (src < 0 || src >= n_lev)
        throw std::logic_error("filter_with_casts: span too small");
      u += ker.at_lag(h) * lc.patched.row(src).transpose();
    }
    MatrixXd mse = base_mse ? *base_mse : MatrixXd::Zero(N, N);
    if (need_mse && lc.coords.size() > 0) {
      for (int h1 = ker.min_lag(); h1 <= ker.max_lag(); ++h1) {
        const int g1 = g - h1;
        if (!row_has_cast[g1]) continue;
        for (int h2 = ker.min_lag(); h2 <= ker.max_lag(); ++h2) {
          const int g2 = g - h2;
          if (!row_has_cast[g2]) continue;
          MatrixXd block = MatrixXd::Zero(N, N);
          bool any = false;
          for (int a = 0; a < N; ++a) {
            int ia = cast_idx[static_cast<std::size_t>(g1) * N + a];
            if (ia < 0) continue;
            for (int b = 0; b < N; ++b) {
              int ib = cast_idx[static_cast<std::size_t>(g2) * N + b];
              if (ib < 0) continue;
              block(a, b) = lc.cov(ia, ib);
              any = true;
            }
          }
          if (any)
            mse += ker.at_lag(h1) * block * ker.at_lag(h2).transpose();
        }
      }
    }
    for (int c = 0; c < N; ++c) {
      out.point(o, c) = u(c);
      double se = need_mse ? std::sqrt(std::max(mse(c, c), 0.0)) : 0.0;
      out.upper(o, c) = u(c) + 2.0 * se;
      out.lower(o, c) = u(c) - 2.0 * se;
    }
  }
  return out;
}

}  // namespace

ExtractionTriple wk_extract(const Eigen::VectorXd& psi, const ModelSpec& mdl,
                            const MatrixXd& data,
                            const std::vector<int>& sigcomps,
                            const MatPoly& target, int grid, int window,
                            int horizon, bool need_mse) {
  ParamSet par = psi_to_par(psi, mdl);
  const Poly delta = mdl.full_delta();
  MatrixXd demeaned = data - regression_mean(mdl, par.beta);
  MatrixXd w = difference_matrix(demeaned, delta);
  const int span = window + horizon;
  const int n = static_cast<int>(w.rows()) + 2 * span;
  MatPoly acvf = total_acvf(mdl, par, n - 1);
  DlResult dl = dl_midcast(acvf, w, span, need_mse);
  LevelCasts lc = integrate_casts(delta, demeaned, span, dl);
  WkFilter wk = wk_coeffs(mdl, par, sigcomps, target, grid, window);
  return filter_with_casts(wk.kernel, lc, mdl.T, mdl.N, span, horizon,
                           need_mse, &wk.mse);
}

ExtractionTriple adhoc_extract(const Eigen::VectorXd& psi,
                               const ModelSpec& mdl, const MatrixXd& data,
                               const FilterKernel& adhoc, int horizon,
                               bool need_mse) {
  ParamSet par = psi_to_par(psi, mdl);
  const Poly delta = mdl.full_delta();
  MatrixXd demeaned = data - regression_mean(mdl, par.beta);
  MatrixXd w = difference_matrix(demeaned, delta);
  const int span =
      horizon + std::max(adhoc.shift, adhoc.length() - 1 - adhoc.shift);
  const int n = static_cast<int>(w.rows()) + 2 * span;
  MatPoly acvf = total_acvf(mdl, par, n - 1);
  DlResult dl = dl_midcast(acvf, w, span, need_mse);
  LevelCasts lc = integrate_casts(delta, demeaned, span, dl);
  return filter_with_casts(adhoc, lc, mdl.T, mdl.N, span, horizon, need_mse,
                           nullptr);
}

FilterKernel hi_to_low(const ScalarFilter& hi, int s) {
  if (s < 1) throw std::invalid_argument("hi_to_low: s must be positive");
  const int m = static_cast<int>(hi.coeffs.size());
  const int c = hi.shift;
  const int ell = ((s - c % s) % s + s) % s;
  int r = (s - (m + ell) % s) % s;
  while (r < s) r += s;
  const int C = (ell + c) / s;
  const int M = (m + ell + r) / s;
  auto ups = [&](int idx) -> double {  // upsilon_idx, idx in lag units
    const int pos = idx + c;
    return (pos >= 0 && pos < m) ? hi.coeffs(pos) : 0.0;
  };
  FilterKernel out;
  out.shift = C;
  for (int h = -C; h <= M - 1 - C; ++h) {
    MatrixXd blockm(s, s);
    for (int j = 0; j < s; ++j)
      for (int k = 0; k < s; ++k) blockm(j, k) = ups(j - k + s * h);
    out.coeffs.push_back(blockm);
  }
  // Drop trailing all-zero blocks introduced by the padding rule.
  while (out.coeffs.size() > 1 &&
         out.coeffs.back().cwiseAbs().maxCoeff() == 0.0)
    out.coeffs.pop_back();
  return out;
}

X11Filters x11_filters(double period, int p_seas) {
  if (period <= 2.0)
    throw std::invalid_argument("x11_filters: period must exceed 2");
  if (p_seas < 1) throw std::invalid_argument("x11_filters: p_seas >= 1");
  X11Filters out;
  // Trend: normalized symmetric U_{floor(s/2),s}.
  const int n_trend = static_cast<int>(std::floor(period / 2.0));
  Poly u = ub_generator(period, n_trend);
  out.trend.coeffs = u / poly_eval(u, 1.0);
  out.trend.shift = n_trend;

  // Detrended seasonal: 1 - (2p+1)^{-1} sum_j [(1-B^2) U_j(B) + mirror],
  // with U_j built on the stretched period s j.
  int half = 0;
  std::vector<Poly> qs;
  for (int j = 1; j <= p_seas; ++j) {
    const int nj = static_cast<int>(std::floor((period * j - 2.0) / 2.0));
    Poly one_minus_b2(3);
    one_minus_b2 << 1.0, 0.0, -1.0;
    Poly q = poly_mult(one_minus_b2, ub_generator(period * j, nj));
    half = std::max(half, static_cast<int>(q.size()) - 1);
    qs.push_back(q);
  }
  VectorXd seas_raw = VectorXd::Zero(2 * half + 1);
  seas_raw(half) = 1.0;
  const double w = 1.0 / (2.0 * p_seas + 1.0);
  for (const Poly& q : qs)
    for (int l = 0; l < q.size(); ++l) {
      seas_raw(half + l) -= w * q(l);
      seas_raw(half - l) -= w * q(l);
    }
  // Compose with the detrending filter: seasonal = seas_raw (1 - trend).
  const int ht = out.trend.shift;
  VectorXd detrend = -out.trend.coeffs;
  detrend(ht) += 1.0;
  Poly seas_total = poly_mult(Poly(seas_raw), Poly(detrend));
  out.seasonal.coeffs = seas_total;
  out.seasonal.shift = half + ht;

  out.sa.coeffs = -seas_total;
  out.sa.coeffs(out.seasonal.shift) += 1.0;
  out.sa.shift = out.seasonal.shift;
  return out;
}

MatrixXd apply_scalar_filter(const MatrixXd& x, const ScalarFilter& f) {
  const int T = static_cast<int>(x.rows());
  const int len = static_cast<int>(f.coeffs.size());
  if (T < len) throw std::invalid_argument("apply_scalar_filter: series too short");
  const int max_lag = len - 1 - f.shift;
  MatrixXd out = MatrixXd::Zero(T - len + 1, x.cols());
  for (int r = 0; r < out.rows(); ++r) {
    const int t = r + max_lag;
    for (int l = 0; l < len; ++l)
      out.row(r) += f.coeffs(l) * x.row(t - (l - f.shift));
  }
  return out;
}

Decomposition publish_decomposition(
    const MatrixXd& data, const ModelSpec& mdl, const ParamSet& par,
    const std::vector<std::pair<std::string, MatrixXd>>& extractions,
    const MatrixXd& patched_demeaned, int cast_error_to,
    const std::map<std::string, int>& effect_routing) {
  const int T = mdl.T, N = mdl.N;
  const int P = static_cast<int>(extractions.size());
  if (cast_error_to < 0 || cast_error_to >= P)
    throw std::invalid_argument("publish_decomposition: bad routing index");
  Decomposition out;
  MatrixXd mu = regression_mean(mdl, par.beta);
  out.imputation = patched_demeaned + mu;
  for (const auto& [name, values] : extractions) {
    out.names.push_back(name);
    out.pieces.push_back(values);
  }
  // Casting error: observed value minus its patched counterpart (nonzero
  // only where an observed value was overridden, e.g. marked extremes).
  MatrixXd eps = MatrixXd::Zero(T, N);
  for (int t = 0; t < T; ++t)
    for (int c = 0; c < N; ++c)
      if (!is_na(data(t, c)))
        eps(t, c) = data(t, c) - mu(t, c) - patched_demeaned(t, c);
  out.pieces[cast_error_to] += eps;
  // Route the fixed effects.
  int bi = 0;
  for (int j = 0; j < N; ++j)
    for (const auto& reg : mdl.regressors[j]) {
      auto it = effect_routing.find(reg.label);
      const int dest = it == effect_routing.end() ? cast_error_to : it->second;
      out.pieces[dest].col(j) += reg.values * par.beta(bi);
      ++bi;
    }
  return out;
}

void write_filter_csv(const std::string& path, const FilterKernel& k) {
  std::ofstream outf(path);
  if (!outf) throw std::runtime_error("cannot write filter file: " + path);
  const int N = static_cast<int>(k.coeffs[0].rows());
  outf << k.length() << "," << k.shift << "," << N << "\n";
  outf.precision(17);
  for (int h = k.min_lag(); h <= k.max_lag(); ++h)
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        outf << h << "," << i << "," << j << "," << k.at_lag(h)(i, j) << "\n";
}

FilterKernel read_filter_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open filter file: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty filter file: " + path);
  int len, shift, N;
  {
    std::istringstream ss(line);
    char comma;
    ss >> len >> comma >> shift >> comma >> N;
  }
  FilterKernel out;
  out.shift = shift;
  out.coeffs.assign(len, MatrixXd::Zero(N, N));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    int h, i, j;
    double v;
    char comma;
    ss >> h >> comma >> i >> comma >> j >> comma >> v;
    out.coeffs[h + shift](i, j) = v;
  }
  return out;
}

}  // namespace msts
