#include "reachsdp/semialgebraic.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace reachsdp {

SemialgebraicSet::SemialgebraicSet(std::vector<Polynomial> inequalities)
    : g_(std::move(inequalities)) {
  if (g_.empty()) {
    throw std::invalid_argument("SemialgebraicSet: at least one inequality required");
  }
  n_vars_ = g_.front().n_vars();
  for (const auto& g : g_) {
    if (g.n_vars() != n_vars_) {
      throw std::invalid_argument("SemialgebraicSet: inequalities disagree on n_vars");
    }
  }
}

bool SemialgebraicSet::Contains(const Eigen::VectorXd& x, double tol) const {
  for (const auto& g : g_) {
    if (g.Evaluate(x) < -tol) return false;
  }
  return true;
}

std::vector<int> SemialgebraicSet::HalfDegrees() const {
  std::vector<int> out;
  out.reserve(g_.size());
  for (const auto& g : g_) out.push_back((g.degree() + 1) / 2);
  return out;
}

int SemialgebraicSet::MaxHalfDegree() const {
  int r = 0;
  for (int h : HalfDegrees()) r = std::max(r, h);
  return r;
}

bool IsBallConstraint(const Polynomial& g) {
  if (g.degree() != 2) return false;
  const int n = g.n_vars();
  double constant = 0.0;
  for (const auto& [m, c] : g.terms()) {
    switch (m.degree()) {
      case 0:
        constant = c;
        break;
      case 1:
        return false;
      case 2: {
        const bool square = *std::max_element(m.exponents().begin(),
                                              m.exponents().end()) == 2;
        if (std::abs(c - (square ? -1.0 : 0.0)) > 1e-9) return false;
        break;
      }
      default:
        return false;
    }
  }
  for (int i = 0; i < n; ++i) {
    Monomial sq = Monomial::Unit(n, i) * Monomial::Unit(n, i);
    if (std::abs(g.coeff(sq) + 1.0) > 1e-9) return false;
  }
  return constant > 0.0;
}

ArchimedeanResult ValidateArchimedean(const SemialgebraicSet& set,
                                      std::optional<double> bound_hint) {
  for (const auto& g : set.inequalities()) {
    if (IsBallConstraint(g)) return {set, false, g.constant_term()};
  }
  if (!bound_hint) {
    throw std::invalid_argument(
        "set has no ball constraint N - |x|^2 and no bound hint to add one");
  }
  if (!(*bound_hint > 0.0)) {
    throw std::invalid_argument("bound hint must be positive");
  }
  const int n = set.n_vars();
  Polynomial ball = Polynomial::Constant(n, *bound_hint);
  for (int i = 0; i < n; ++i) {
    const auto xi = Polynomial::Variable(n, i);
    ball -= xi * xi;
  }
  std::vector<Polynomial> g = set.inequalities();
  g.push_back(std::move(ball));
  return {SemialgebraicSet(std::move(g)), true, *bound_hint};
}

DynamicalSystem::DynamicalSystem(std::vector<Polynomial> components)
    : f_(std::move(components)) {
  const int n = static_cast<int>(f_.size());
  if (n == 0) throw std::invalid_argument("DynamicalSystem: no components");
  for (const auto& fi : f_) {
    if (fi.n_vars() != n) {
      throw std::invalid_argument("DynamicalSystem: " + std::to_string(n) +
                                  " components but a component has " +
                                  std::to_string(fi.n_vars()) + " variables");
    }
  }
}

int DynamicalSystem::degree() const {
  int d = 1;
  for (const auto& fi : f_) d = std::max(d, fi.degree());
  return d;
}

Eigen::VectorXd DynamicalSystem::Apply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out(n_vars());
  for (int i = 0; i < n_vars(); ++i) out[i] = f_[i].Evaluate(x);
  return out;
}

int ReachProblem::MinRelaxationOrder() const {
  return std::max({1, init.MaxHalfDegree(), state.MaxHalfDegree()});
}

void ReachProblem::Validate() const {
  const int n = n_vars();
  if (init.n_vars() != n || state.n_vars() != n || state_geometry.n_vars() != n ||
      (init_geometry && init_geometry->n_vars() != n)) {
    throw std::invalid_argument("ReachProblem: components disagree on n_vars");
  }
  if (!variables.empty() && static_cast<int>(variables.size()) != n) {
    throw std::invalid_argument("ReachProblem: variable names do not match n_vars");
  }
  if (!u_zero && horizon < 1) {
    throw std::invalid_argument("ReachProblem: horizon must be positive");
  }
}

ReachProblem MakeReachProblem(std::string name, std::vector<Polynomial> dynamics,
                              std::vector<Polynomial> init_inequalities,
                              std::vector<Polynomial> state_inequalities,
                              DomainGeometry state_geometry,
                              std::optional<DomainGeometry> init_geometry,
                              int horizon, bool u_zero) {
  ReachProblem p;
  p.name = std::move(name);
  p.system = DynamicalSystem(std::move(dynamics));
  p.variables = DefaultVariableNames(p.system.n_vars());
  const double state_hint = state_geometry.BallBoundHint();
  const double init_hint = init_geometry ? init_geometry->BallBoundHint() : state_hint;
  auto init = ValidateArchimedean(SemialgebraicSet(std::move(init_inequalities)), init_hint);
  auto state = ValidateArchimedean(SemialgebraicSet(std::move(state_inequalities)), state_hint);
  p.init = std::move(init.set);
  p.init_augmented = init.augmented;
  p.state = std::move(state.set);
  p.state_augmented = state.augmented;
  p.state_geometry = std::move(state_geometry);
  p.init_geometry = std::move(init_geometry);
  p.horizon = horizon;
  p.u_zero = u_zero;
  p.Validate();
  return p;
}

}  // namespace reachsdp
