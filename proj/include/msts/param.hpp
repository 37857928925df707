#ifndef MSTS_PARAM_HPP
#define MSTS_PARAM_HPP

#include <vector>
#include <Eigen/Dense>

#include "msts/model.hpp"

// The bijection between the unconstrained pre-parameter vector
// psi = (xi, zeta, beta) and the interpretable parameter set, linear
// constraint handling via pivoted QR, covariance condition numbers, and
// rank reduction.

namespace msts {

// Generalized Cholesky pair restricted to the retained columns: L is N x r
// with unit "diagonal" entries at the retained row positions, d holds the r
// pivots (nonnegative for valid covariances; raw method-of-moments output
// may carry negative entries until reduced).
struct GcdPair {
  Eigen::MatrixXd L;
  Eigen::VectorXd d;

  Eigen::MatrixXd sigma() const { return L * d.asDiagonal() * L.transpose(); }
};

// Interpretable per-component parameters.  Which fields are meaningful
// depends on the component kind.
struct SerialParams {
  Eigen::VectorXd ar, ma, sar, sma;          // minus-convention coefficients
  std::vector<Eigen::MatrixXd> arM, maM, sarM, smaM;
  double rho = 0.0, omega = 0.0, phi1 = 0.0;  // cycles / damped trend
};

struct ParamSet {
  std::vector<GcdPair> covars;
  std::vector<SerialParams> serial;
  Eigen::VectorXd beta;
};

// Linear constraints C psi = b; empty C means unconstrained.
struct Constraint {
  Eigen::MatrixXd C;
  Eigen::VectorXd b;
  bool empty() const { return C.rows() == 0; }
};

// --- layout ---------------------------------------------------------------

// Number of zeta coordinates for one component.
int zetalen(const LatentComponent& comp, int N);
// Number of xi coordinates for one component.
int xilen(const LatentComponent& comp, int N);
int xilen(int N, const std::vector<int>& vrank);
// Total pre-parameter length, including regression coefficients.
int psi_length(const ModelSpec& mdl);
// Offsets of the xi, zeta, beta blocks within psi.
struct PsiLayout {
  int xi_offset = 0, zeta_offset = 0, beta_offset = 0, total = 0;
  std::vector<int> comp_xi;    // per-component offset into psi
  std::vector<int> comp_zeta;
};
PsiLayout psi_layout(const ModelSpec& mdl);

// --- elementary maps -------------------------------------------------------

// Stable AR coefficients (minus convention, phi_1..phi_p) from unconstrained
// reals via the partial-autocorrelation recursion, and its exact inverse.
// The inverse throws std::domain_error on an unstable polynomial.
Eigen::VectorXd pacf_map(const Eigen::VectorXd& zeta);
Eigen::VectorXd pacf_unmap(const Eigen::VectorXd& phi);

// Stable VAR(p) coefficient matrices from p*N*N unconstrained reals via
// successive partial-autocorrelation matrices, and its inverse.  The inverse
// throws std::domain_error if the companion matrix is not stable.
std::vector<Eigen::MatrixXd> var_map(const Eigen::VectorXd& zeta, int N, int p);
Eigen::VectorXd var_unmap(const std::vector<Eigen::MatrixXd>& phi);

// Logistic map onto (lo, hi) and its inverse.
double bounded_map(double zeta, double lo, double hi);
double bounded_unmap(double x, double lo, double hi);

// Covariance GCD from xi coordinates (L entries column-major over retained
// columns, then log pivots), and its inverse.
GcdPair xi_map(const Eigen::VectorXd& xi, int N, const std::vector<int>& vrank);
Eigen::VectorXd xi_unmap(const GcdPair& gcd, int N,
                         const std::vector<int>& vrank);

// Per-component serial parameters from the zeta slice, and back.
SerialParams zeta_map(const Eigen::VectorXd& zeta, const LatentComponent& comp,
                      int N);
Eigen::VectorXd zeta_unmap(const SerialParams& par,
                           const LatentComponent& comp, int N);

// --- psi <-> param ----------------------------------------------------------

ParamSet psi_to_par(const Eigen::VectorXd& psi, const ModelSpec& mdl);
Eigen::VectorXd par_to_psi(const ParamSet& par, const ModelSpec& mdl);

// Parameter set at eta = 0 given the constraints (identity-like covariances,
// zero serial parameters, zero regression coefficients when unconstrained).
ParamSet default_param(const ModelSpec& mdl, const Constraint& constraint);

// --- constraints ------------------------------------------------------------

// psi = A eta + c with C psi = b enforced exactly; with no constraint the
// map is the identity.  Derived from the column-pivoted QR of C.
struct ConstraintAffine {
  Eigen::MatrixXd A;
  Eigen::VectorXd c;
};
ConstraintAffine constraint_affine(const Constraint& constraint, int psi_len);

Eigen::VectorXd eta_to_psi(const Eigen::VectorXd& eta,
                           const Constraint& constraint, int psi_len);
Eigen::VectorXd psi_to_eta(const Eigen::VectorXd& psi,
                           const Constraint& constraint);

// Pairwise-equality constraint rows for selected regression coordinates.
// regindex[j] lists 0-based regressor indices of series j to include; with
// combos absent a (k-1)-row equality pattern is produced, otherwise each
// combos row (b | c_1..c_k) is emitted verbatim over the selected
// coordinates.
Constraint constrain_reg(const ModelSpec& mdl,
                         const std::vector<std::vector<int>>& regindex,
                         const std::vector<Eigen::VectorXd>& combos = {});

// Append rows of one constraint to another (dimensions must agree).
Constraint stack_constraints(const Constraint& a, const Constraint& b);

// Read constraint rows "b, c_1, ..., c_len" from CSV.
Constraint read_constraint_csv(const std::string& path, int psi_len);

// --- conditioning -----------------------------------------------------------

// Log condition numbers tau_j = log(d_j / sigma_jj) of the nested leading
// submatrices; -inf marks a singular (or non-positive) pivot.
Eigen::VectorXd conditions(const Eigen::MatrixXd& sigma);

// Positive definite modification: pivots whose log condition number falls
// below alpha are raised so every tau_j >= alpha; L is unchanged and no
// pivot is ever decreased.
Eigen::MatrixXd render_pd(const Eigen::MatrixXd& sigma, double alpha);

// Rank reduction.  model_flag false: render each component covariance pd at
// the threshold.  model_flag true: drop indices with tau below the threshold
// (or nonpositive pivot) from the component's rank configuration, keeping
// the remaining columns of L.
struct ReduceResult {
  ModelSpec mdl;
  ParamSet par;
};
ReduceResult reduce(const ModelSpec& mdl, const ParamSet& par, double thresh,
                    bool model_flag);

}  // namespace msts

#endif  // MSTS_PARAM_HPP
