#ifndef MSTS_POLY_HPP
#define MSTS_POLY_HPP

#include <vector>
#include <Eigen/Dense>

// Scalar and matrix lag-polynomial arithmetic, spectral factorization,
// generalized Cholesky decomposition, and block-Toeplitz assembly.
//
// A scalar polynomial a(B) = a_0 + a_1 B + ... + a_d B^d is stored as the
// coefficient vector (a_0, ..., a_d); the constant 1 is the length-1 vector
// (1.0).  A matrix polynomial stores the square coefficient matrices
// A_0, ..., A_d in order.

namespace msts {

using Poly = Eigen::VectorXd;
using MatPoly = std::vector<Eigen::MatrixXd>;

// Coefficient-wise convolution; degree of the product is deg(a) + deg(b).
Poly poly_mult(const Poly& a, const Poly& b);

// Coefficient-wise sum after zero-padding to the common degree.
Poly poly_sum(const Poly& a, const Poly& b);

// Evaluate a(z) at a real point.
double poly_eval(const Poly& a, double z);

// Evaluate a(e^{-i lambda}).
std::complex<double> poly_eval(const Poly& a, std::complex<double> z);

// Roots of a(z) via the companion matrix of the monic normalization.
// Trailing (near-)zero coefficients are trimmed first.
Eigen::VectorXcd poly_roots(const Poly& a);

// Matrix-coefficient convolution C_h = sum_j A_j B_{h-j}.
// Throws std::invalid_argument on dimension mismatch.
MatPoly poly_mult_mat(const MatPoly& a, const MatPoly& b);

MatPoly poly_sum_mat(const MatPoly& a, const MatPoly& b);

// Evaluate a matrix polynomial at a complex scalar.
Eigen::MatrixXcd poly_eval_mat(const MatPoly& a, std::complex<double> z);

// Generalized Cholesky decomposition Sigma = L D L' with unit
// lower-triangular L and diagonal D.  Columns whose pivot magnitude falls
// below pivot_tol * trace are zeroed below the diagonal (the column is
// obsolete) and the pivot is reported as exactly zero.  Indefinite inputs
// are permitted: raw negative pivots are returned for downstream rank
// reduction.
struct GcdResult {
  Eigen::MatrixXd L;  // N x N unit lower triangular
  Eigen::VectorXd d;  // N pivots, possibly zero or negative
};

GcdResult gcd_decompose(const Eigen::MatrixXd& sigma,
                        double pivot_tol = 1e-14);

// Spectral factorization of the autocovariance sequence gamma_0..gamma_q of
// a scalar MA(q): returns the monic polynomial theta(z) with roots on or
// outside the unit circle and the innovation variance s2 such that
// s2 * theta(z) theta(1/z) has the given autocovariances.  Uses the
// innovations iteration on a finite covariance extension; the implied
// spectral density is checked for nonnegativity on a dense grid first.
struct SpecFactResult {
  Poly ma;          // monic, length q+1
  double innov_var;
};

SpecFactResult spec_fact(const Eigen::VectorXd& acvf,
                         int max_iter = 500, double tol = 1e-12);

// Multivariate analogue: MA(z) has identity leading coefficient and the
// innovation covariance is nonnegative definite.
struct SpecFactMvarResult {
  MatPoly ma;
  Eigen::MatrixXd innov_cov;
};

SpecFactMvarResult spec_fact_mvar(const MatPoly& acvf,
                                  int max_iter = 500, double tol = 1e-12);

// Block Toeplitz matrix from blocks for lags -(T-1)..(T-1), ordered by lag;
// block (i,j) of the result equals blocks[(i-j) + T-1].
Eigen::MatrixXd block_toeplitz(const std::vector<Eigen::MatrixXd>& blocks);

// Coefficients of U_{n,s}(B) = prod_{k=1..n} (1 - 2 cos(2 pi k / s) B + B^2),
// computed by exponentiating the summed cepstral series
// tau_l = -2 cos(2 pi k l / s) / l.  Requires s > 2 and n <= floor(s/2).
Poly ub_generator(double period, int n);

}  // namespace msts

#endif  // MSTS_POLY_HPP
