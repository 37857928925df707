#include "msts/timeseries.hpp"

#include <stdexcept>

namespace msts {

Eigen::MatrixXd difference_matrix(const Eigen::MatrixXd& x,
                                  const Eigen::VectorXd& delta) {
  const int d = static_cast<int>(delta.size()) - 1;
  const int T = static_cast<int>(x.rows());
  if (T <= d) throw std::invalid_argument("difference_matrix: series too short");
  Eigen::MatrixXd out(T - d, x.cols());
  for (int t = d; t < T; ++t)
    for (int j = 0; j < x.cols(); ++j) {
      double v = 0.0;
      for (int i = 0; i <= d; ++i) v += delta(i) * x(t - i, j);
      out(t - d, j) = v;
    }
  return out;
}

}  // namespace msts
