#ifndef MSTS_TESTS_ORACLES_HPP
#define MSTS_TESTS_ORACLES_HPP

#include <utility>
#include <vector>
#include <Eigen/Dense>

#include "msts/poly.hpp"
#include "msts/timeseries.hpp"

// Independent test oracles.  Everything here is brute force on purpose:
// dense joint covariances and direct conditioning, no recursions shared with
// the library code paths under test.

namespace msts::oracle {

struct DenseGaussian {
  double divergence = 0.0;
  Eigen::VectorXd cast_mean;   // conditional mean of the missing coordinates
  Eigen::MatrixXd cast_cov;    // conditional covariance
  std::vector<std::pair<int, int>> cast_coords;
};

// Exact observed-coordinate Gaussian divergence and conditional moments from
// the dense block-Toeplitz covariance.  data may contain NaN; span rows of
// all-missing are appended on both sides.
inline DenseGaussian dense_gaussian(const msts::MatPoly& acvf,
                                    const Eigen::MatrixXd& data, int span) {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  const int T = static_cast<int>(data.rows());
  const int N = static_cast<int>(data.cols());
  const int n = T + 2 * span;
  std::vector<MatrixXd> blocks;
  for (int lag = -(n - 1); lag <= n - 1; ++lag)
    blocks.push_back(lag >= 0 ? acvf[lag]
                              : MatrixXd(acvf[-lag].transpose()));
  MatrixXd sigma = msts::block_toeplitz(blocks);

  std::vector<int> obs, mis;
  DenseGaussian out;
  VectorXd yobs(n * N);
  int nobs = 0;
  for (int t = 0; t < n; ++t)
    for (int c = 0; c < N; ++c) {
      const int idx = t * N + c;
      const bool inside = t >= span && t < span + T;
      if (inside && !msts::is_na(data(t - span, c))) {
        obs.push_back(idx);
        yobs(nobs++) = data(t - span, c);
      } else {
        mis.push_back(idx);
        out.cast_coords.emplace_back(t, c);
      }
    }
  yobs.conservativeResize(nobs);
  const int m = static_cast<int>(mis.size());
  MatrixXd soo(nobs, nobs), smo(m, nobs), smm(m, m);
  for (int i = 0; i < nobs; ++i)
    for (int j = 0; j < nobs; ++j) soo(i, j) = sigma(obs[i], obs[j]);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < nobs; ++j) smo(i, j) = sigma(mis[i], obs[j]);
    for (int j = 0; j < m; ++j) smm(i, j) = sigma(mis[i], mis[j]);
  }
  if (nobs > 0) {
    Eigen::LDLT<MatrixXd> chol(soo);
    VectorXd alpha = chol.solve(yobs);
    double logdet = 0.0;
    for (int i = 0; i < nobs; ++i) logdet += std::log(chol.vectorD()(i));
    out.divergence = logdet + yobs.dot(alpha);
    out.cast_mean = smo * alpha;
    out.cast_cov = smm - smo * chol.solve(smo.transpose());
  } else {
    out.divergence = 0.0;
    out.cast_mean = VectorXd::Zero(m);
    out.cast_cov = smm;
  }
  return out;
}

}  // namespace msts::oracle

#endif  // MSTS_TESTS_ORACLES_HPP
