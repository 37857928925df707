#include "msts/poly.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace msts {

Poly poly_mult(const Poly& a, const Poly& b) {
  if (a.size() == 0 || b.size() == 0)
    throw std::invalid_argument("poly_mult: empty polynomial");
  Poly c = Poly::Zero(a.size() + b.size() - 1);
  for (int i = 0; i < a.size(); ++i)
    for (int j = 0; j < b.size(); ++j) c(i + j) += a(i) * b(j);
  return c;
}

Poly poly_sum(const Poly& a, const Poly& b) {
  Poly c = Poly::Zero(std::max(a.size(), b.size()));
  c.head(a.size()) = a;
  c.head(b.size()) += b;
  return c;
}

double poly_eval(const Poly& a, double z) {
  double v = 0.0;
  for (int i = static_cast<int>(a.size()) - 1; i >= 0; --i) v = v * z + a(i);
  return v;
}

std::complex<double> poly_eval(const Poly& a, std::complex<double> z) {
  std::complex<double> v = 0.0;
  for (int i = static_cast<int>(a.size()) - 1; i >= 0; --i) v = v * z + a(i);
  return v;
}

Eigen::VectorXcd poly_roots(const Poly& a) {
  int d = static_cast<int>(a.size()) - 1;
  double scale = a.cwiseAbs().maxCoeff();
  while (d > 0 && std::abs(a(d)) < 1e-14 * scale) --d;
  if (d <= 0) return Eigen::VectorXcd(0);
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i) companion(0, i) = -a(d - 1 - i) / a(d);
  companion.block(1, 0, d - 1, d - 1).setIdentity();
  return Eigen::EigenSolver<Eigen::MatrixXd>(companion, false).eigenvalues();
}

MatPoly poly_mult_mat(const MatPoly& a, const MatPoly& b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("poly_mult_mat: empty polynomial");
  if (a[0].cols() != b[0].rows())
    throw std::invalid_argument("poly_mult_mat: dimension mismatch");
  MatPoly c(a.size() + b.size() - 1,
            Eigen::MatrixXd::Zero(a[0].rows(), b[0].cols()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  return c;
}

MatPoly poly_sum_mat(const MatPoly& a, const MatPoly& b) {
  MatPoly c(std::max(a.size(), b.size()),
            Eigen::MatrixXd::Zero(a[0].rows(), a[0].cols()));
  for (std::size_t i = 0; i < a.size(); ++i) c[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) c[i] += b[i];
  return c;
}

Eigen::MatrixXcd poly_eval_mat(const MatPoly& a, std::complex<double> z) {
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(a[0].rows(), a[0].cols());
  for (int i = static_cast<int>(a.size()) - 1; i >= 0; --i)
    v = v * z + a[i].cast<std::complex<double>>();
  return v;
}

GcdResult gcd_decompose(const Eigen::MatrixXd& sigma, double pivot_tol) {
  const int n = static_cast<int>(sigma.rows());
  if (sigma.cols() != n) throw std::invalid_argument("gcd: not square");
  if (!sigma.isApprox(sigma.transpose(), 1e-8))
    throw std::invalid_argument("gcd: not symmetric");
  double scale = std::max(std::abs(sigma.trace()), 1.0);
  GcdResult out;
  out.L = Eigen::MatrixXd::Identity(n, n);
  out.d = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    double dj = sigma(j, j);
    for (int k = 0; k < j; ++k) dj -= out.L(j, k) * out.L(j, k) * out.d(k);
    if (std::abs(dj) < pivot_tol * scale) {
      out.d(j) = 0.0;  // column obsolete
      continue;
    }
    out.d(j) = dj;
    for (int i = j + 1; i < n; ++i) {
      double v = sigma(i, j);
      for (int k = 0; k < j; ++k) v -= out.L(i, k) * out.L(j, k) * out.d(k);
      out.L(i, j) = v / dj;
    }
  }
  return out;
}

SpecFactResult spec_fact(const Eigen::VectorXd& acvf, int max_iter,
                         double tol) {
  const int q = static_cast<int>(acvf.size()) - 1;
  if (q < 0) throw std::invalid_argument("spec_fact: empty acvf");
  // Nonnegativity pre-check of the implied spectral density.
  constexpr int kGrid = 1024;
  double fmax = 0.0;
  for (int m = 0; m <= kGrid; ++m) {
    double lam = std::numbers::pi * m / kGrid;
    double f = acvf(0);
    for (int h = 1; h <= q; ++h) f += 2.0 * acvf(h) * std::cos(lam * h);
    fmax = std::max(fmax, std::abs(f));
    if (f < -1e-10 * std::max(std::abs(acvf(0)), 1.0))
      throw std::domain_error("spec_fact: spectral density negative");
  }
  if (q == 0) return {Poly::Ones(1), acvf(0)};
  if (fmax == 0.0) return {Poly::Ones(q + 1) * 0.0, 0.0};

  // Innovations iteration on the finite covariance extension: theta_{n,j}
  // converges to the MA coefficients and v_n to the innovation variance.
  // Rows are sparse: theta_{n,m} = 0 for m > q, so only q values per row.
  std::vector<Eigen::VectorXd> theta;  // theta[n-1](m-1) = theta_{n,m}, m=1..q
  std::vector<double> v{acvf(0)};
  for (int n = 1; n <= max_iter; ++n) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(q);
    for (int k = std::max(0, n - q); k < n; ++k) {
      double s = acvf(n - k);
      for (int j = 0; j < k; ++j) {
        int a = k - j, b = n - j;
        if (a >= 1 && a <= q && b <= q) s -= theta[k - 1](a - 1) * row(b - 1) * v[j];
      }
      row(n - k - 1) = s / v[k];
    }
    double vn = acvf(0);
    for (int j = std::max(0, n - q); j < n; ++j) {
      double t = row(n - j - 1);
      vn -= t * t * v[j];
    }
    double drift = (n > 1) ? (row - theta.back()).cwiseAbs().maxCoeff() : 1.0;
    theta.push_back(row);
    v.push_back(vn);
    if (n > q && std::abs(v[n] - v[n - 1]) < tol * std::max(std::abs(vn), 1e-300) &&
        drift < tol * std::max(1.0, row.cwiseAbs().maxCoeff()))
      break;
  }
  Poly ma = Poly::Zero(q + 1);
  ma(0) = 1.0;
  ma.tail(q) = theta.back();
  return {ma, v.back()};
}

SpecFactMvarResult spec_fact_mvar(const MatPoly& acvf, int max_iter,
                                  double tol) {
  const int q = static_cast<int>(acvf.size()) - 1;
  const int N = static_cast<int>(acvf[0].rows());
  auto gam = [&](int h) -> Eigen::MatrixXd {
    if (h >= 0 && h <= q) return acvf[h];
    if (h < 0 && -h <= q) return acvf[-h].transpose();
    return Eigen::MatrixXd::Zero(N, N);
  };
  // Multivariate innovations recursion; rows sparse as in the scalar case.
  std::vector<std::vector<Eigen::MatrixXd>> theta;  // theta[n-1][m-1], m=1..q
  std::vector<Eigen::MatrixXd> v{acvf[0]};
  for (int n = 1; n <= max_iter; ++n) {
    std::vector<Eigen::MatrixXd> row(q, Eigen::MatrixXd::Zero(N, N));
    for (int k = std::max(0, n - q); k < n; ++k) {
      Eigen::MatrixXd s = gam(n - k);
      for (int j = 0; j < k; ++j) {
        int a = k - j, b = n - j;
        if (a >= 1 && a <= q && b <= q)
          s -= row[b - 1] * v[j] * theta[k - 1][a - 1].transpose();
      }
      Eigen::MatrixXd vk = 0.5 * (v[k] + v[k].transpose());
      row[n - k - 1] = s * vk.completeOrthogonalDecomposition().pseudoInverse();
    }
    Eigen::MatrixXd vn = acvf[0];
    for (int j = std::max(0, n - q); j < n; ++j)
      vn -= row[n - j - 1] * v[j] * row[n - j - 1].transpose();
    double drift = 0.0;
    if (n > 1)
      for (int m = 0; m < q; ++m)
        drift = std::max(drift,
                         (row[m] - theta.back()[m]).cwiseAbs().maxCoeff());
    else
      drift = 1.0;
    theta.push_back(row);
    v.push_back(vn);
    if (n > q && drift < tol &&
        (v[n] - v[n - 1]).cwiseAbs().maxCoeff() <
            tol * std::max(1.0, v[n].cwiseAbs().maxCoeff()))
      break;
  }
  SpecFactMvarResult out;
  out.ma.assign(q + 1, Eigen::MatrixXd::Identity(N, N));
  const auto& last = theta.back();
  for (int j = 1; j <= q; ++j) out.ma[j] = last[j - 1];
  out.innov_cov = 0.5 * (v.back() + v.back().transpose());
  return out;
}

Eigen::MatrixXd block_toeplitz(const std::vector<Eigen::MatrixXd>& blocks) {
  const int count = static_cast<int>(blocks.size());
  if (count % 2 == 0)
    throw std::invalid_argument("block_toeplitz: need 2T-1 blocks");
  const int T = (count + 1) / 2;
  const int N = static_cast<int>(blocks[0].rows());
  Eigen::MatrixXd out(N * T, N * T);
  for (int i = 0; i < T; ++i)
    for (int j = 0; j < T; ++j)
      out.block(i * N, j * N, N, N) = blocks[(i - j) + T - 1];
  return out;
}

Poly ub_generator(double period, int n) {
  if (period <= 2.0) throw std::invalid_argument("ub_generator: need s > 2");
  if (n < 1 || n > static_cast<int>(std::floor(period / 2.0)))
    throw std::invalid_argument("ub_generator: n exceeds floor(s/2)");
  const int deg = 2 * n;
  // Summed cepstral coefficients of the product of quadratic factors.
  Eigen::VectorXd tau = Eigen::VectorXd::Zero(deg + 1);
  for (int l = 1; l <= deg; ++l) {
    double s = 0.0;
    for (int k = 1; k <= n; ++k)
      s += std::cos(2.0 * std::numbers::pi * k * l / period);
    tau(l) = -2.0 * s / l;
  }
  // Exponentiate the power series: p_m = (1/m) sum_l l tau_l p_{m-l}.
  Poly p = Poly::Zero(deg + 1);
  p(0) = 1.0;
  for (int m = 1; m <= deg; ++m) {
    double s = 0.0;
    for (int l = 1; l <= m; ++l) s += l * tau(l) * p(m - l);
    p(m) = s / m;
  }
  return p;
}

}  // namespace msts
