#ifndef MSTS_EXTRACT_HPP
#define MSTS_EXTRACT_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>
#include <Eigen/Dense>

#include "msts/gauss.hpp"
#include "msts/model.hpp"
#include "msts/param.hpp"

// Signal extraction: exact matrix formulas, truncated model-based filtering
// with casting, user-supplied filters, frequency response functions, filter
// embedding, and the fractional-period seasonal-adjustment filter family.

namespace msts {

// A finite filter sum_{h=-shift}^{len-1-shift} coeff_h B^h; shift marks the
// lag-0 position, so shift = 0 is a concurrent filter.
struct FilterKernel {
  std::vector<Eigen::MatrixXd> coeffs;
  int shift = 0;

  int length() const { return static_cast<int>(coeffs.size()); }
  int min_lag() const { return -shift; }
  int max_lag() const { return length() - 1 - shift; }
  const Eigen::MatrixXd& at_lag(int h) const { return coeffs[h + shift]; }
};

struct ScalarFilter {
  Eigen::VectorXd coeffs;
  int shift = 0;
};

// Exact minimum-MSE extraction matrix F and error covariance V for the sum
// of the selected components, from the full sample (time-major stacking).
// Quadratic in N T; intended for moderate samples.
struct SignalMatrices {
  Eigen::MatrixXd filter;
  Eigen::MatrixXd error_cov;
};
SignalMatrices signal_matrix(const ModelSpec& mdl, const ParamSet& par,
                             const std::vector<int>& sigcomps);

// Apply precomputed signal matrices: point estimate with +/- 2 s.e. bands.
// Requires complete data.
ExtractionTriple extract(const Eigen::MatrixXd& data,
                         const SignalMatrices& sm, const ModelSpec& mdl,
                         const ParamSet& par);

// Model-based frequency response on the mesh lambda_m = pi m / grid,
// optionally composed with a target polynomial.
std::vector<Eigen::MatrixXcd> frf(const ModelSpec& mdl, const ParamSet& par,
                                  const std::vector<int>& sigcomps, int grid,
                                  const MatPoly& target = {});

// Symmetric filter coefficients for lags -len..len by discretized inversion
// of the frequency response, with the bi-infinite extraction error
// covariance and a geometric bound on the truncated tail mass.
struct WkFilter {
  FilterKernel kernel;
  Eigen::MatrixXd mse;
  double tail_bound = 0.0;
};
WkFilter wk_coeffs(const ModelSpec& mdl, const ParamSet& par,
                   const std::vector<int>& sigcomps, const MatPoly& target,
                   int grid, int len);

// Truncated model-based extraction: the demeaned ragged-edge series is
// completed with midcasts and extended by window + horizon casts on each
// side, the kernel is applied, and the uncertainty combines the bi-infinite
// filter error with the casting error propagated through the kernel.
// Output rows cover times 1-horizon .. T+horizon.
ExtractionTriple wk_extract(const Eigen::VectorXd& psi, const ModelSpec& mdl,
                            const Eigen::MatrixXd& data,
                            const std::vector<int>& sigcomps,
                            const MatPoly& target, int grid, int window,
                            int horizon, bool need_mse);

// Same pipeline with a user-supplied filter; the uncertainty carries the
// casting error only.
ExtractionTriple adhoc_extract(const Eigen::VectorXd& psi,
                               const ModelSpec& mdl,
                               const Eigen::MatrixXd& data,
                               const FilterKernel& adhoc, int horizon,
                               bool need_mse);

// Embed a scalar filter acting at the fast sampling rate as an s x s matrix
// filter on the s-variate embedded series.
FilterKernel hi_to_low(const ScalarFilter& hi, int s);

// Fractional-period seasonal adjustment filters: the normalized symmetric
// trend filter, the composite detrended seasonal filter, and the seasonal
// adjustment filter (all symmetric; trend sums to one, seasonal to zero).
struct X11Filters {
  ScalarFilter trend;
  ScalarFilter seasonal;
  ScalarFilter sa;
};
X11Filters x11_filters(double period, int p_seas);

// Apply a scalar filter to each column; output row t covers input rows for
// which the full support is available (valid region only).
Eigen::MatrixXd apply_scalar_filter(const Eigen::MatrixXd& x,
                                    const ScalarFilter& f);

// Additive publication table: extraction pieces plus routed fixed effects
// and the casting error, reconstructing the data exactly at observed times
// and the imputation at missing ones.
struct Decomposition {
  std::vector<std::string> names;
  std::vector<Eigen::MatrixXd> pieces;  // each T x N
  Eigen::MatrixXd imputation;           // ytilde + z' beta
};
Decomposition publish_decomposition(
    const Eigen::MatrixXd& data, const ModelSpec& mdl, const ParamSet& par,
    const std::vector<std::pair<std::string, Eigen::MatrixXd>>& extractions,
    const Eigen::MatrixXd& patched_demeaned, int cast_error_to,
    const std::map<std::string, int>& effect_routing);

// Filter kernel CSV round trip: header "m,c,N" then rows "lag,row,col,value".
void write_filter_csv(const std::string& path, const FilterKernel& k);
FilterKernel read_filter_csv(const std::string& path);

}  // namespace msts

#endif  // MSTS_EXTRACT_HPP
