#ifndef MSTS_FIT_HPP
#define MSTS_FIT_HPP

#include <utility>
#include <Eigen/Dense>

#include "msts/gauss.hpp"
#include "msts/model.hpp"
#include "msts/optim.hpp"
#include "msts/param.hpp"

// Maximum likelihood driver over the free coordinates eta, method-of-moments
// initialization, and residual diagnostics.

namespace msts {

struct FitResult {
  Eigen::VectorXd eta_hat;
  Eigen::VectorXd psi_hat;
  ParamSet param_hat;
  double divergence = 0.0;
  Eigen::MatrixXd hessian;  // over eta, of the divergence (-2 loglik)
  bool converged = false;
  int evaluations = 0;
};

// Quasi-Newton minimization of the divergence over eta.  The initial
// parameter must satisfy the constraints (checked, with the offending
// coordinate reported).
FitResult mle_fit(const Eigen::MatrixXd& data, const ParamSet& init,
                  const Constraint& constraint, const ModelSpec& mdl,
                  const OptimOptions& opts = {}, bool want_hessian = true);

// Method of moments: OLS regression removal, then a least-squares solve of
// the moment equations for the component innovation covariances with the
// serial dynamics fixed at their initial values.  The returned covariance
// factors may carry nonpositive pivots; run reduce() before mapping to psi.
// Missing values are not supported.
ParamSet mom_fit(const Eigen::MatrixXd& data, const ParamSet& init,
                 const ModelSpec& mdl);

// Multivariate portmanteau statistic for residual serial correlation with
// its chi-square p-value; dof = N^2 lag - num_params.
std::pair<double, double> portmanteau(const Eigen::MatrixXd& resids, int lag,
                                      int num_params);

// Per-series Shapiro-Wilk normality p-values; samples beyond 5000 are
// subsampled deterministically.
Eigen::VectorXd gauss_check(const Eigen::MatrixXd& resids);

// t statistics for the pre-parameters from the eta-Hessian of the
// divergence: V = 2 hess^{-1}, psi covariance A V A'.  A Hessian that is not
// positive definite yields +/- infinity throughout.
Eigen::VectorXd tstats(const ModelSpec& mdl, const Eigen::VectorXd& psi,
                       const Eigen::MatrixXd& hessian,
                       const Constraint& constraint);

// Likelihood comparison of nested models: divergence(nested) minus
// divergence(nesting), with the pre-parameter count difference.
std::pair<double, int> glr(const Eigen::MatrixXd& data,
                           const Eigen::VectorXd& psi_nested,
                           const Eigen::VectorXd& psi_nesting,
                           const ModelSpec& mdl_nested,
                           const ModelSpec& mdl_nesting);

// Autoregressive spectral density estimate of one series on a frequency
// mesh over [0, pi]; the AR order is chosen by AIC over Yule-Walker fits.
struct ArSpectrum {
  Eigen::VectorXd freq;
  Eigen::VectorXd density;
  int order = 0;
};
ArSpectrum ar_spectrum(const Eigen::MatrixXd& data, int series, bool diff,
                       int grid = 512);

}  // namespace msts

#endif  // MSTS_FIT_HPP
