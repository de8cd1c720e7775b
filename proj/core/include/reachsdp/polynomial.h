#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "reachsdp/monomial.h"

namespace reachsdp {

/// Sparse multivariate polynomial with double coefficients.
///
/// Terms are kept in graded-lex order. Arithmetic never stores a term whose
/// coefficient is exactly zero; pruning of tiny coefficients is explicit via
/// Clean().
class Polynomial {
 public:
  using TermMap = std::map<Monomial, double>;

  Polynomial() = default;
  /// The zero polynomial in `n_vars` variables.
  explicit Polynomial(int n_vars);
  Polynomial(int n_vars, TermMap terms);

  static Polynomial Constant(int n_vars, double c);
  static Polynomial Variable(int n_vars, int var);
  static Polynomial FromMonomial(const Monomial& m, double coeff = 1.0);

  int n_vars() const { return n_vars_; }
  /// Max total degree over stored terms; 0 for the zero polynomial.
  int degree() const;
  bool is_zero() const { return terms_.empty(); }
  const TermMap& terms() const { return terms_; }
  int num_terms() const { return static_cast<int>(terms_.size()); }

  /// Coefficient of `m` (0 if absent).
  double coeff(const Monomial& m) const;
  double constant_term() const;

  /// Adds `c·m`, removing the term if it cancels exactly.
  void AddTerm(const Monomial& m, double c);

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(double s);

  friend Polynomial operator+(Polynomial a, const Polynomial& b) {
    return a += b;
  }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) {
    return a -= b;
  }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  Polynomial operator-() const { return *this * -1.0; }

  Polynomial Pow(int k) const;

  double Evaluate(std::span<const double> point) const;
  double Evaluate(const Eigen::VectorXd& point) const {
    return Evaluate(std::span<const double>(point.data(), point.size()));
  }

  /// Copy with every |coefficient| < eps removed.
  Polynomial Clean(double eps = 1e-12) const;

  friend bool operator==(const Polynomial&, const Polynomial&) = default;

 private:
  void CheckSameVars(const Polynomial& other, const char* op) const;

  int n_vars_ = 0;
  TermMap terms_;
};

/// p(f₁(x), …, fₙ(x)); f must have p.n_vars() entries over a common
/// variable set.
Polynomial Compose(const Polynomial& p, std::span<const Polynomial> f);

/// Coefficients of p aligned with `basis`. Throws std::invalid_argument
/// naming the first monomial that does not fit.
Eigen::VectorXd CoefficientVector(const Polynomial& p,
                                  const MonomialBasis& basis);

Polynomial FromCoefficientVector(const Eigen::VectorXd& coeffs,
                                 const MonomialBasis& basis);

/// Default variable names x1..xn.
std::vector<std::string> DefaultVariableNames(int n);

/// Renders e.g. "0.5*x1 + x1*x2 - 2". Coefficients use the shortest decimal
/// form that round-trips, so parsing the output reproduces the term map.
std::string ToString(const Polynomial& p,
                     std::span<const std::string> names = {});

std::string ToString(const Monomial& m, std::span<const std::string> names = {});

/// Shortest round-trip decimal representation of a double.
std::string FormatDouble(double value);

}  // namespace reachsdp
