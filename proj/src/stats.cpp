#include "msts/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace msts {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Acklam's rational approximation, refined with one Halley step.
double normal_quantile(double p) {
  if (p <= 0.0 || p >= 1.0)
    throw std::domain_error("normal_quantile: p outside (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1 - plow;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= phigh) {
    double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    double q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
          c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  double e = normal_cdf(x) - p;
  double u = e * std::sqrt(2 * M_PI) * std::exp(x * x / 2);
  return x - u / (1 + x * u / 2);
}

namespace {

double gamma_p_series(double a, double x) {
  double sum = 1.0 / a, term = sum;
  for (int n = 1; n < 500; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_cf(double a, double x) {
  // Lentz continued fraction for the upper tail.
  const double tiny = 1e-300;
  double b = x + 1 - a, c = 1 / tiny, d = 1 / b, h = d;
  for (int i = 1; i < 500; ++i) {
    double an = -i * (i - a);
    b += 2;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_p(double a, double x) {
  if (x < 0 || a <= 0) throw std::domain_error("gamma_p: bad arguments");
  if (x == 0) return 0.0;
  if (x < a + 1) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

ShapiroWilk shapiro_wilk(const Eigen::VectorXd& sample) {
  const int n = static_cast<int>(sample.size());
  if (n < 3) throw std::invalid_argument("shapiro_wilk: need n >= 3");
  if (n > 5000) throw std::invalid_argument("shapiro_wilk: n > 5000");
  std::vector<double> x(sample.data(), sample.data() + n);
  std::sort(x.begin(), x.end());
  if (x[n - 1] - x[0] < 1e-300 * std::max(1.0, std::abs(x[0])))
    throw std::domain_error("shapiro_wilk: sample has zero range");

  // Blom scores and Royston's polynomial-corrected weights.
  std::vector<double> m(n);
  double ssq_m = 0.0;
  for (int i = 0; i < n; ++i) {
    m[i] = normal_quantile((i + 1 - 0.375) / (n + 0.25));
    ssq_m += m[i] * m[i];
  }
  std::vector<double> a(n);
  const double rsn = 1.0 / std::sqrt(static_cast<double>(n));
  auto poly = [](const double* c, int nc, double v) {
    double r = c[0];
    double p = 1.0;
    for (int i = 1; i < nc; ++i) {
      p *= v;
      r += c[i] * p;
    }
    return r;
  };
  static const double c1[] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685,
                              -2.706056};
  static const double c2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633,
                              -3.582633};
  const double norm = std::sqrt(ssq_m);
  double an = m[n - 1] / norm + poly(c1, 6, rsn);
  double phi;
  if (n > 5) {
    double an1 = m[n - 2] / norm + poly(c2, 6, rsn);
    phi = (ssq_m - 2 * m[n - 1] * m[n - 1] - 2 * m[n - 2] * m[n - 2]) /
          (1 - 2 * an * an - 2 * an1 * an1);
    a[n - 1] = an;
    a[n - 2] = an1;
    a[0] = -an;
    a[1] = -an1;
    for (int i = 2; i < n - 2; ++i) a[i] = m[i] / std::sqrt(phi);
  } else {
    phi = (ssq_m - 2 * m[n - 1] * m[n - 1]) / (1 - 2 * an * an);
    a[n - 1] = an;
    a[0] = -an;
    for (int i = 1; i < n - 1; ++i) a[i] = m[i] / std::sqrt(phi);
  }

  double xbar = 0.0;
  for (double v : x) xbar += v;
  xbar /= n;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i) {
    num += a[i] * x[i];
    den += (x[i] - xbar) * (x[i] - xbar);
  }
  double w = num * num / den;
  if (w > 1.0) w = 1.0;

  double p;
  if (n == 3) {
    p = 6.0 / M_PI *
        (std::asin(std::sqrt(w)) - std::asin(std::sqrt(0.75)));
    p = std::clamp(p, 0.0, 1.0);
  } else if (n <= 11) {
    double g = -2.273 + 0.459 * n;
    double wprime = -std::log(g - std::log1p(-w));
    double mu = 0.5440 - 0.39978 * n + 0.025054 * n * n -
                0.0006714 * n * n * n;
    double sigma = std::exp(1.3822 - 0.77857 * n + 0.062767 * n * n -
                            0.0020322 * n * n * n);
    p = 1.0 - normal_cdf((wprime - mu) / sigma);
  } else {
    double ln = std::log(static_cast<double>(n));
    double wprime = std::log1p(-w);
    double mu = -1.5861 - 0.31082 * ln - 0.083751 * ln * ln +
                0.0038915 * ln * ln * ln;
    double sigma = std::exp(-0.4803 - 0.082676 * ln + 0.0030302 * ln * ln);
    p = 1.0 - normal_cdf((wprime - mu) / sigma);
  }
  return {w, p};
}

}  // namespace msts
