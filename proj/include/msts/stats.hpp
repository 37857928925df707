#ifndef MSTS_STATS_HPP
#define MSTS_STATS_HPP

#include <Eigen/Dense>

// Small numerical statistics toolbox: normal distribution helpers, the
// regularized incomplete gamma (for chi-square tails), and the Shapiro-Wilk
// normality test in Royston's approximation (valid for 3 <= n <= 5000).

namespace msts {

double normal_cdf(double z);
double normal_quantile(double p);

// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

inline double chi2_cdf(double x, double dof) {
  return gamma_p(dof / 2.0, x / 2.0);
}

struct ShapiroWilk {
  double w;
  double p_value;
};
ShapiroWilk shapiro_wilk(const Eigen::VectorXd& sample);

}  // namespace msts

#endif  // MSTS_STATS_HPP
