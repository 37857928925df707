#ifndef MSTS_MODEL_HPP
#define MSTS_MODEL_HPP

#include <optional>
#include <string>
#include <vector>
#include <Eigen/Dense>

#include "msts/poly.hpp"
#include "msts/timeseries.hpp"

// Declarative model construction: an ordered list of latent stochastic
// components, each with a scalar differencing polynomial, plus per-series
// regression effects.  The differencing polynomials must be pairwise coprime;
// the full operator is their product.

namespace msts {

enum class ComponentKind {
  kArma,          // order (p, q), same scalar model for each series
  kSarma,         // order (p, q, P, Q, s)
  kVarma,         // order (p, q), full matrix coefficients
  kSvarma,        // order (p, q, P, Q, s)
  kButterworth,   // order n, params (rho, omega)
  kBalanced,      // order n, params (rho, omega)
  kButterworthStab,
  kBalancedStab,
  kDampedTrend,   // AR(1) with bounded coefficient
  kWhiteNoise,
};

const char* component_kind_name(ComponentKind k);
ComponentKind component_kind_from_name(const std::string& name);

// Bounds for the logistic maps of cycle and damped-trend parameters.
struct ParamBounds {
  double rho_lo = 0.0, rho_hi = 1.0;
  double omega_lo = 0.0, omega_hi = 3.141592653589793;
};

struct LatentComponent {
  ComponentKind kind = ComponentKind::kWhiteNoise;
  std::vector<int> order;    // class-specific, see ComponentKind
  std::vector<int> vrank;    // retained ranks, 0-based, ascending
  ParamBounds bounds;
  std::string name;
  Poly delta = Poly::Ones(1);
};

struct RegressorEntry {
  std::string label;
  Eigen::VectorXd values;  // length T, in levels
};

struct ModelSpec {
  int N = 0;
  int T = 0;
  std::vector<LatentComponent> components;
  std::vector<std::vector<RegressorEntry>> regressors;  // per series

  // Product of all component differencing polynomials.
  Poly full_delta() const;
  // Product of the deltas of all components except k.
  Poly omitted_delta(int k) const;
  int regressor_count() const;
};

ModelSpec make_model(int N, int T);

// Append a latent component.  Throws if its delta shares a root (within the
// clustering radius) with an existing component's delta.
ModelSpec add_component(const ModelSpec& mdl, const std::vector<int>& vrank,
                        ComponentKind kind, const std::vector<int>& order,
                        const std::optional<ParamBounds>& bounds,
                        const std::string& name, const Poly& delta);

// Insert the polynomial trend regressor(s): t^d per series when the full
// delta contains (1-B)^d with d > 0 (d_extra ignored), else t^0..t^d_extra.
ModelSpec mean_init(const ModelSpec& mdl, int d_extra);

// Multiplicity of the root z = 1 in the full differencing operator,
// determined by root clustering.
int unit_root_multiplicity(const Poly& delta, double radius = 1e-8);

// Append a regressor for one series unless delta(B) annihilates it
// (max abs of the filtered regressor below null_tol times its scale), in
// which case the model is returned unchanged.
ModelSpec add_regressor(const ModelSpec& mdl, int series,
                        const RegressorEntry& reg, double null_tol = 1e-8);

// z_t(j) * beta-hat for the named regressor of one series.
Eigen::VectorXd fixed_effect(const ModelSpec& mdl, int series,
                             const std::string& label,
                             const Eigen::VectorXd& beta);

// Regression mean per series, z_t(j)' beta(j), as a T x N matrix.
Eigen::MatrixXd regression_mean(const ModelSpec& mdl,
                                const Eigen::VectorXd& beta);

// Flat beta index of a regressor (series-major ordering).
int beta_index(const ModelSpec& mdl, int series, const std::string& label);

}  // namespace msts

#endif  // MSTS_MODEL_HPP
