#include "msts/optim.hpp"

#include <cmath>
#include <limits>

namespace msts {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd numeric_gradient(const Objective& f, const VectorXd& x, double step) {
  const int k = static_cast<int>(x.size());
  VectorXd g(k), xp = x;
  for (int i = 0; i < k; ++i) {
    const double h = step * (1.0 + std::abs(x(i)));
    xp(i) = x(i) + h;
    double fp = f(xp);
    xp(i) = x(i) - h;
    double fm = f(xp);
    xp(i) = x(i);
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

MatrixXd numeric_hessian(const Objective& f, const VectorXd& x, double step) {
  const int k = static_cast<int>(x.size());
  MatrixXd h = MatrixXd::Zero(k, k);
  VectorXd hs(k);
  for (int i = 0; i < k; ++i) hs(i) = step * (1.0 + std::abs(x(i)));
  const double f0 = f(x);
  VectorXd xp = x;
  for (int i = 0; i < k; ++i) {
    xp(i) = x(i) + hs(i);
    double fp = f(xp);
    xp(i) = x(i) - hs(i);
    double fm = f(xp);
    xp(i) = x(i);
    h(i, i) = (fp - 2.0 * f0 + fm) / (hs(i) * hs(i));
    for (int j = i + 1; j < k; ++j) {
      xp(i) = x(i) + hs(i);
      xp(j) = x(j) + hs(j);
      double fpp = f(xp);
      xp(j) = x(j) - hs(j);
      double fpm = f(xp);
      xp(i) = x(i) - hs(i);
      double fmm = f(xp);
      xp(j) = x(j) + hs(j);
      double fmp = f(xp);
      xp(i) = x(i);
      xp(j) = x(j);
      h(i, j) = h(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * hs(i) * hs(j));
    }
  }
  return h;
}

OptimResult minimize_bfgs(const Objective& f, const VectorXd& x0,
                          const OptimOptions& opts) {
  const int k = static_cast<int>(x0.size());
  int evals = 0;
  auto eval = [&](const VectorXd& x) {
    ++evals;
    double v;
    try {
      v = f(x);
    } catch (...) {
      v = std::numeric_limits<double>::infinity();
    }
    if (std::isfinite(v) && opts.checkpoint) opts.checkpoint(x, v);
    return v;
  };

  OptimResult out;
  out.x = x0;
  out.f = eval(x0);
  if (!std::isfinite(out.f)) {
    out.evaluations = evals;
    return out;  // not converged: bad starting point
  }
  if (k == 0) {
    out.converged = true;
    out.evaluations = evals;
    return out;
  }

  MatrixXd hinv = MatrixXd::Identity(k, k);
  VectorXd grad = numeric_gradient(eval, out.x, opts.fd_step);
  double fprev = out.f;
  int stall = 0;
  while (evals < opts.max_evals) {
    if (grad.cwiseAbs().maxCoeff() < opts.grad_tol) {
      out.converged = true;
      break;
    }
    VectorXd dir = -hinv * grad;
    double slope = grad.dot(dir);
    if (!(slope < 0.0)) {  // reset on a non-descent direction
      hinv.setIdentity();
      dir = -grad;
      slope = grad.dot(dir);
    }
    // Backtracking Armijo line search.
    double alpha = 1.0;
    double fnew = std::numeric_limits<double>::infinity();
    VectorXd xnew;
    bool ok = false;
    for (int ls = 0; ls < 40 && evals < opts.max_evals; ++ls) {
      xnew = out.x + alpha * dir;
      fnew = eval(xnew);
      if (std::isfinite(fnew) && fnew <= out.f + 1e-4 * alpha * slope) {
        ok = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!ok) {
      // No progress along this direction: converged if gradient is small in
      // a relative sense, otherwise give up on further descent.
      out.converged = grad.cwiseAbs().maxCoeff() <
                      opts.grad_tol * std::max(1.0, std::abs(out.f));
      break;
    }
    VectorXd gnew = numeric_gradient(eval, xnew, opts.fd_step);
    VectorXd s = xnew - out.x;
    VectorXd y = gnew - grad;
    double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      MatrixXd eye = MatrixXd::Identity(k, k);
      MatrixXd v = eye - (s * y.transpose()) / sy;
      hinv = v * hinv * v.transpose() + (s * s.transpose()) / sy;
    }
    out.x = xnew;
    out.f = fnew;
    grad = gnew;
    // Also stop on repeated negligible decreases.
    if (std::abs(fprev - out.f) <
        1e-12 * std::max(1.0, std::abs(out.f))) {
      if (++stall >= 3) {
        out.converged = true;
        break;
      }
    } else {
      stall = 0;
    }
    fprev = out.f;
  }
  out.evaluations = evals;
  return out;
}

}  // namespace msts
