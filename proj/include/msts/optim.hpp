#ifndef MSTS_OPTIM_HPP
#define MSTS_OPTIM_HPP

#include <functional>
#include <Eigen/Dense>

// Quasi-Newton minimization with numerically estimated derivatives.
// Gradients and Hessians use central differences with per-coordinate step
// h_i = step * (1 + |x_i|).

namespace msts {

struct OptimOptions {
  double grad_tol = 1e-6;
  int max_evals = 10000;
  double fd_step = 1e-5;
  // Invoked after every successful objective evaluation with (x, f).
  std::function<void(const Eigen::VectorXd&, double)> checkpoint;
};

struct OptimResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int evaluations = 0;
  bool converged = false;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

OptimResult minimize_bfgs(const Objective& f, const Eigen::VectorXd& x0,
                          const OptimOptions& opts = {});

Eigen::VectorXd numeric_gradient(const Objective& f, const Eigen::VectorXd& x,
                                 double step = 1e-5);

Eigen::MatrixXd numeric_hessian(const Objective& f, const Eigen::VectorXd& x,
                                double step = 1e-5);

}  // namespace msts

#endif  // MSTS_OPTIM_HPP
