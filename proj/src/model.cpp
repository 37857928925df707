#include "msts/model.hpp"

#include <cmath>
#include <stdexcept>

namespace msts {

const char* component_kind_name(ComponentKind k) {
  switch (k) {
    case ComponentKind::kArma: return "arma";
    case ComponentKind::kSarma: return "sarma";
    case ComponentKind::kVarma: return "varma";
    case ComponentKind::kSvarma: return "svarma";
    case ComponentKind::kButterworth: return "bw-cycle";
    case ComponentKind::kBalanced: return "bal-cycle";
    case ComponentKind::kButterworthStab: return "bw-cycle-stab";
    case ComponentKind::kBalancedStab: return "bal-cycle-stab";
    case ComponentKind::kDampedTrend: return "damped-trend";
    case ComponentKind::kWhiteNoise: return "wn";
  }
  return "?";
}

ComponentKind component_kind_from_name(const std::string& name) {
  for (ComponentKind k :
       {ComponentKind::kArma, ComponentKind::kSarma, ComponentKind::kVarma,
        ComponentKind::kSvarma, ComponentKind::kButterworth,
        ComponentKind::kBalanced, ComponentKind::kButterworthStab,
        ComponentKind::kBalancedStab, ComponentKind::kDampedTrend,
        ComponentKind::kWhiteNoise})
    if (name == component_kind_name(k)) return k;
  throw std::invalid_argument("unknown component class: " + name);
}

Poly ModelSpec::full_delta() const {
  Poly d = Poly::Ones(1);
  for (const auto& c : components) d = poly_mult(d, c.delta);
  return d;
}

Poly ModelSpec::omitted_delta(int k) const {
  Poly d = Poly::Ones(1);
  for (int j = 0; j < static_cast<int>(components.size()); ++j)
    if (j != k) d = poly_mult(d, components[j].delta);
  return d;
}

int ModelSpec::regressor_count() const {
  int r = 0;
  for (const auto& list : regressors) r += static_cast<int>(list.size());
  return r;
}

ModelSpec make_model(int N, int T) {
  ModelSpec m;
  m.N = N;
  m.T = T;
  m.regressors.resize(N);
  return m;
}

namespace {

// Shared-root check between two polynomials via root clustering.
bool share_root(const Poly& a, const Poly& b, double radius) {
  Eigen::VectorXcd ra = poly_roots(a), rb = poly_roots(b);
  for (int i = 0; i < ra.size(); ++i)
    for (int j = 0; j < rb.size(); ++j)
      if (std::abs(ra(i) - rb(j)) < radius) return true;
  return false;
}

}  // namespace

ModelSpec add_component(const ModelSpec& mdl, const std::vector<int>& vrank,
                        ComponentKind kind, const std::vector<int>& order,
                        const std::optional<ParamBounds>& bounds,
                        const std::string& name, const Poly& delta) {
  if (delta.size() == 0) throw std::invalid_argument("add_component: empty delta");
  for (const auto& c : mdl.components)
    if (share_root(c.delta, delta, 1e-8))
      throw std::invalid_argument(
          "add_component: differencing operator shares a root with component '" +
          c.name + "' (over-differencing)");
  LatentComponent comp;
  comp.kind = kind;
  comp.order = order;
  comp.vrank = vrank;
  if (comp.vrank.empty())
    for (int j = 0; j < mdl.N; ++j) comp.vrank.push_back(j);
  for (int j : comp.vrank)
    if (j < 0 || j >= mdl.N)
      throw std::invalid_argument("add_component: vrank index out of range");
  if (bounds) comp.bounds = *bounds;
  comp.name = name;
  comp.delta = delta;
  ModelSpec out = mdl;
  out.components.push_back(std::move(comp));
  return out;
}

int unit_root_multiplicity(const Poly& delta, double radius) {
  Eigen::VectorXcd roots = poly_roots(delta);
  int d = 0;
  for (int i = 0; i < roots.size(); ++i)
    if (std::abs(roots(i) - 1.0) < radius) ++d;
  return d;
}

ModelSpec mean_init(const ModelSpec& mdl, int d_extra) {
  const int d = unit_root_multiplicity(mdl.full_delta());
  ModelSpec out = mdl;
  auto add_power = [&](int p, const std::string& label) {
    Eigen::VectorXd reg(out.T);
    for (int t = 0; t < out.T; ++t) reg(t) = std::pow(t + 1.0, p);
    for (int j = 0; j < out.N; ++j)
      out.regressors[j].push_back({label, reg});
  };
  if (d > 0) {
    add_power(d, "Trend");
  } else {
    for (int p = 0; p <= d_extra; ++p)
      add_power(p, p == 0 ? "Trend" : "Trend^" + std::to_string(p));
  }
  return out;
}

ModelSpec add_regressor(const ModelSpec& mdl, int series,
                        const RegressorEntry& reg, double null_tol) {
  if (series < 0 || series >= mdl.N)
    throw std::invalid_argument("add_regressor: bad series index");
  if (reg.values.size() != mdl.T)
    throw std::invalid_argument("add_regressor: regressor length != T");
  const Poly delta = mdl.full_delta();
  const double scale = std::max(reg.values.cwiseAbs().maxCoeff(), 1e-300);
  Eigen::MatrixXd filtered = difference_matrix(reg.values, delta);
  if (filtered.cwiseAbs().maxCoeff() < null_tol * scale)
    return mdl;  // annihilated by the differencing operator: removed silently
  ModelSpec out = mdl;
  out.regressors[series].push_back(reg);
  return out;
}

int beta_index(const ModelSpec& mdl, int series, const std::string& label) {
  int idx = 0;
  for (int j = 0; j < mdl.N; ++j) {
    for (const auto& r : mdl.regressors[j]) {
      if (j == series && r.label == label) return idx;
      ++idx;
    }
  }
  throw std::invalid_argument("no regressor '" + label + "' for series " +
                              std::to_string(series));
}

Eigen::VectorXd fixed_effect(const ModelSpec& mdl, int series,
                             const std::string& label,
                             const Eigen::VectorXd& beta) {
  int idx = beta_index(mdl, series, label);
  for (const auto& r : mdl.regressors[series])
    if (r.label == label) return r.values * beta(idx);
  throw std::logic_error("fixed_effect: unreachable");
}

Eigen::MatrixXd regression_mean(const ModelSpec& mdl,
                                const Eigen::VectorXd& beta) {
  Eigen::MatrixXd mu = Eigen::MatrixXd::Zero(mdl.T, mdl.N);
  int idx = 0;
  for (int j = 0; j < mdl.N; ++j)
    for (const auto& r : mdl.regressors[j]) mu.col(j) += r.values * beta(idx++);
  return mu;
}

}  // namespace msts
