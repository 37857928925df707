#ifndef MSTS_ACF_HPP
#define MSTS_ACF_HPP

#include <complex>
#include <vector>
#include <Eigen/Dense>

#include "msts/model.hpp"
#include "msts/param.hpp"
#include "msts/poly.hpp"

// Autocovariance and spectral density computation for the supported
// component classes, cycle models with stabilization, canonization, and the
// autocovariances of differenced latent components.
//
// Spectral densities follow the convention f(lambda) = sum_h gamma_h
// e^{-i lambda h}: white noise of variance v has the constant density v.

namespace msts {

// Exact ARMA autocovariances, lags 0..max_lag.  Both polynomials are full
// lag polynomials with leading coefficient one; ar must be stable.
Eigen::VectorXd arma_acvf(const Poly& ar, const Poly& ma, double sigma2,
                          int max_lag);

// Exact VARMA matrix autocovariances; ar[0] and ma[0] are identity.
MatPoly varma_acvf(const MatPoly& ar, const MatPoly& ma,
                   const Eigen::MatrixXd& innov_cov, int max_lag);

struct CycleParams {
  bool balanced = false;
  int n = 1;
  double rho = 0.5;
  double omega = 1.5707963267948966;
  double sigma2 = 1.0;
};

// ARMA representation of a cycle: the Butterworth moving average is explicit;
// the Balanced moving average is recovered by spectral factorization of its
// finite autocovariance.
struct CycleArma {
  Poly ar;
  Poly ma;
  double innov_var;
};
CycleArma cycle_polys(const CycleParams& cp);

// Closed-form Balanced cycle autocovariances, lags 0..max_lag.
Eigen::VectorXd balanced_acvf(const CycleParams& cp, int max_lag);

// Cycle spectral density at one frequency.
double cycle_density(const CycleParams& cp, double lambda);

// Minimum of the cycle spectral density and the autocovariances of the
// stabilized (noise-subtracted) process: gamma_0 is decremented by c.
struct StabilizeResult {
  Eigen::VectorXd acvf;
  double c;
};
StabilizeResult stabilize(const CycleParams& cp, int max_lag);

// Canonization of a general ARMA: subtract the spectral density minimum c,
// factor the new numerator, and return the modified process.
struct CanonizeResult {
  Poly ma;
  double innov_var;
  Eigen::VectorXd acvf;  // original acvf with gamma_0 reduced by c
  double c;
};
CanonizeResult canonize(const Poly& ar, const Poly& ma, double sigma2,
                        int max_lag);

// Autocovariances of the k-th differenced latent component, i.e. of
// delta^{(-k)}(B) applied to the component's stationary core, lags
// 0..max_lag.
MatPoly component_acvf(const ModelSpec& mdl, const ParamSet& par, int k,
                       int max_lag);

// Same with an arbitrary scalar filter applied to the component's core
// instead of the omitted differencing operator.
MatPoly component_acvf_filtered(const ModelSpec& mdl, const ParamSet& par,
                                int k, const Poly& filter, int max_lag);

// Sum over components: autocovariances of the fully differenced process.
MatPoly total_acvf(const ModelSpec& mdl, const ParamSet& par, int max_lag);

// Spectral density matrix of the k-th component's stationary core at one
// frequency (no differencing adjustment).
Eigen::MatrixXcd component_core_spectrum_at(const ModelSpec& mdl,
                                            const ParamSet& par, int k,
                                            double lambda);

// Spectral density matrix of the k-th differenced latent component at one
// frequency, and on the mesh lambda_m = pi m / grid, m = 0..grid.
Eigen::MatrixXcd component_spectrum_at(const ModelSpec& mdl,
                                       const ParamSet& par, int k,
                                       double lambda);
std::vector<Eigen::MatrixXcd> component_spectrum(const ModelSpec& mdl,
                                                 const ParamSet& par, int k,
                                                 int grid);

}  // namespace msts

#endif  // MSTS_ACF_HPP
