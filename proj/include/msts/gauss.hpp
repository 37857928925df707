#ifndef MSTS_GAUSS_HPP
#define MSTS_GAUSS_HPP

#include <cstdint>
#include <random>
#include <utility>
#include <vector>
#include <Eigen/Dense>

#include "msts/acf.hpp"
#include "msts/model.hpp"
#include "msts/param.hpp"
#include "msts/timeseries.hpp"

// Gaussian likelihood of a stationary vector series with arbitrary missing
// values, minimum-MSE casts (aftcasts, midcasts, forecasts) with error
// covariances, residuals, simulation, and the Whittle approximation.
//
// The divergence is -2 times the Gaussian log likelihood of the observed
// coordinates, with the log(2 pi) constant dropped.

namespace msts {

struct DlResult {
  double divergence = 0.0;
  // The input matrix extended by span missing rows on each side, with every
  // missing coordinate replaced by its conditional expectation.
  Eigen::MatrixXd patched;
  // Cast coordinates (extended row, column), in sweep order, and the
  // covariance matrix of their casting errors (all pairs).
  std::vector<std::pair<int, int>> cast_coords;
  Eigen::MatrixXd cast_cov;
  // Sequential innovations, available when the input had no missing values:
  // row t holds V_t^{-1/2} (w_t - pred), and innovation_covs[t] is V_t.
  bool innovations_valid = false;
  Eigen::MatrixXd innovations;
  std::vector<Eigen::MatrixXd> innovation_covs;

  double cast_cov_at(int row1, int col1, int row2, int col2) const;
};

// Durbin-Levinson sweep over time with per-time observed-coordinate
// selection.  acvf must cover lags 0..(rows + 2 span - 1).  Missing values
// are NaN; the extension rows are treated as missing.  Throws on a
// degenerate innovation covariance.
DlResult dl_midcast(const MatPoly& acvf, const Eigen::MatrixXd& diffdata,
                    int span, bool need_cov = true);

// H-step-ahead forecast extension: dl_midcast with a trailing missing block;
// returns the data with H predicted rows appended.
Eigen::MatrixXd forecast(const MatPoly& acvf, const Eigen::MatrixXd& diffdata,
                         int horizon);

// Model divergence: difference, subtract the differenced regression mean,
// and run the missing-value sweep on the component-sum autocovariances.
double lik(const Eigen::VectorXd& psi, const ModelSpec& mdl,
           const Eigen::MatrixXd& data);

// Whittle approximation over the full Fourier grid; requires complete data.
double whittle(const Eigen::VectorXd& psi, const ModelSpec& mdl,
               const Eigen::MatrixXd& data);

// Standardized sequential residuals and the model autocovariances.  With
// missing values present the series is first completed with midcasts.
struct ResidResult {
  Eigen::MatrixXd residuals;  // (T - deg delta) x N
  MatPoly model_acvf;
};
ResidResult resid(const Eigen::VectorXd& psi, const ModelSpec& mdl,
                  const Eigen::MatrixXd& data);

// Simulation: each latent stationary core is drawn from its ARMA / VARMA
// recursion with a burn-in, integrated through its differencing operator
// with zero initial conditions, summed, and the regression mean added.
// Deterministic for a fixed seed.
Eigen::MatrixXd simulate(const ModelSpec& mdl, const ParamSet& par, int T,
                         int burn, std::uint64_t seed);

// Level-cast integration: undo the differencing on the patched series.
// Recovers level values at every missing or extended slot from the
// differenced casts and the observed levels, and propagates the differenced
// casting-error covariance to the levels.
struct LevelCasts {
  Eigen::MatrixXd patched;  // (T + 2 span) x N, regression effects excluded
  std::vector<std::pair<int, int>> coords;  // level cast slots
  Eigen::MatrixXd cov;                      // casting error covariance
};
LevelCasts integrate_casts(const Poly& delta,
                           const Eigen::MatrixXd& level_data, int span,
                           const DlResult& dl);

// Point casts with +/- 2 s.e. bands on the extended grid, with the
// regression effects added back (polynomial trend regressors are
// extrapolated beyond the sample; other regressors contribute only inside).
struct ExtractionTriple {
  Eigen::MatrixXd point, upper, lower;
};
ExtractionTriple cast_extract(const Eigen::MatrixXd& data,
                              const ModelSpec& mdl, const ParamSet& par,
                              int span);

// Standard normal draws from a seeded generator (Box-Muller on a 64-bit
// Mersenne twister; identical streams across platforms).
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : state_(seed) {}
  double operator()();

 private:
  std::mt19937_64 state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace msts

#endif  // MSTS_GAUSS_HPP
