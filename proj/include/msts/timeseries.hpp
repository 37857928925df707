#ifndef MSTS_TIMESERIES_HPP
#define MSTS_TIMESERIES_HPP

#include <cmath>
#include <limits>
#include <string>
#include <vector>
#include <Eigen/Dense>

namespace msts {

// Missing-value sentinel.  Values are stored as NaN; masks are derived.
inline double na_value() { return std::numeric_limits<double>::quiet_NaN(); }
inline bool is_na(double x) { return std::isnan(x); }

// A T x N sample with a start position (year, index within year), an integer
// period (observations per year), and per-series epithets.  Missing values
// are NaN.
struct TimeSeriesSample {
  Eigen::MatrixXd values;  // T x N
  int period = 1;
  int start_year = 1;
  int start_index = 1;  // 1-based season within the start year
  std::vector<std::string> names;

  int rows() const { return static_cast<int>(values.rows()); }
  int cols() const { return static_cast<int>(values.cols()); }
  int observed_count() const {
    int c = 0;
    for (int t = 0; t < values.rows(); ++t)
      for (int j = 0; j < values.cols(); ++j)
        if (!is_na(values(t, j))) ++c;
    return c;
  }
};

// Apply a lag polynomial delta(B) to each column: out_t = sum_i d_i x_{t-i},
// defined for t = deg..T-1 (output has T - deg rows).  NaNs propagate through
// any window that touches one.
Eigen::MatrixXd difference_matrix(const Eigen::MatrixXd& x,
                                  const Eigen::VectorXd& delta);

}  // namespace msts

#endif  // MSTS_TIMESERIES_HPP
