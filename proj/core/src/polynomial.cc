#include "reachsdp/polynomial.h"

#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace reachsdp {

Polynomial::Polynomial(int n_vars) : n_vars_(n_vars) {
  if (n_vars < 0) throw std::invalid_argument("Polynomial: negative n_vars");
}

Polynomial::Polynomial(int n_vars, TermMap terms) : n_vars_(n_vars) {
  for (auto& [m, c] : terms) {
    if (m.n_vars() != n_vars) {
      throw std::invalid_argument("Polynomial: term has wrong variable count");
    }
    if (c != 0.0) terms_.emplace(m, c);
  }
}

Polynomial Polynomial::Constant(int n_vars, double c) {
  Polynomial p(n_vars);
  p.AddTerm(Monomial(n_vars), c);
  return p;
}

Polynomial Polynomial::Variable(int n_vars, int var) {
  return FromMonomial(Monomial::Unit(n_vars, var));
}

Polynomial Polynomial::FromMonomial(const Monomial& m, double coeff) {
  Polynomial p(m.n_vars());
  p.AddTerm(m, coeff);
  return p;
}

int Polynomial::degree() const {
  // Graded-lex order puts a highest-degree term last.
  return terms_.empty() ? 0 : terms_.rbegin()->first.degree();
}

double Polynomial::coeff(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

double Polynomial::constant_term() const { return coeff(Monomial(n_vars_)); }

void Polynomial::AddTerm(const Monomial& m, double c) {
  if (m.n_vars() != n_vars_) {
    throw std::invalid_argument("Polynomial::AddTerm: variable-count mismatch");
  }
  if (c == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

void Polynomial::CheckSameVars(const Polynomial& other, const char* op) const {
  if (other.n_vars_ != n_vars_) {
    throw std::invalid_argument(std::string("Polynomial ") + op +
                                ": variable-count mismatch (" +
                                std::to_string(n_vars_) + " vs " +
                                std::to_string(other.n_vars_) + ")");
  }
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  CheckSameVars(other, "add");
  for (const auto& [m, c] : other.terms_) AddTerm(m, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  CheckSameVars(other, "sub");
  for (const auto& [m, c] : other.terms_) AddTerm(m, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto it = terms_.begin(); it != terms_.end();) {
    it->second *= s;
    // Underflow can still produce an exact zero.
    if (it->second == 0.0) {
      it = terms_.erase(it);
    } else {
      ++it;
    }
  }
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  a.CheckSameVars(b, "mul");
  Polynomial out(a.n_vars_);
  for (const auto& [ma, ca] : a.terms_) {
    for (const auto& [mb, cb] : b.terms_) out.AddTerm(ma * mb, ca * cb);
  }
  return out;
}

Polynomial Polynomial::Pow(int k) const {
  if (k < 0) throw std::invalid_argument("Polynomial::Pow: negative exponent");
  Polynomial result = Constant(n_vars_, 1.0);
  Polynomial base = *this;
  while (k > 0) {
    if (k & 1) result = result * base;
    k >>= 1;
    if (k > 0) base = base * base;
  }
  return result;
}

double Polynomial::Evaluate(std::span<const double> point) const {
  if (static_cast<int>(point.size()) != n_vars_) {
    throw std::invalid_argument("Polynomial::Evaluate: expected " +
                                std::to_string(n_vars_) + " coordinates, got " +
                                std::to_string(point.size()));
  }
  if (terms_.empty()) return 0.0;
  const int max_deg = degree();
  // powers[i * (max_deg + 1) + k] = point[i]^k
  std::vector<double> powers(static_cast<std::size_t>(n_vars_) * (max_deg + 1));
  for (int i = 0; i < n_vars_; ++i) {
    double* row = &powers[static_cast<std::size_t>(i) * (max_deg + 1)];
    row[0] = 1.0;
    for (int k = 1; k <= max_deg; ++k) row[k] = row[k - 1] * point[i];
  }
  double value = 0.0;
  for (const auto& [m, c] : terms_) {
    double term = c;
    for (int i = 0; i < n_vars_; ++i) {
      term *= powers[static_cast<std::size_t>(i) * (max_deg + 1) + m[i]];
    }
    value += term;
  }
  return value;
}

Polynomial Polynomial::Clean(double eps) const {
  Polynomial out(n_vars_);
  for (const auto& [m, c] : terms_) {
    if (std::abs(c) >= eps) out.terms_.emplace_hint(out.terms_.end(), m, c);
  }
  return out;
}

Polynomial Compose(const Polynomial& p, std::span<const Polynomial> f) {
  if (static_cast<int>(f.size()) != p.n_vars()) {
    throw std::invalid_argument("Compose: expected " +
                                std::to_string(p.n_vars()) +
                                " component maps, got " +
                                std::to_string(f.size()));
  }
  if (f.empty()) return p;
  const int m = f[0].n_vars();
  for (const auto& fi : f) {
    if (fi.n_vars() != m) {
      throw std::invalid_argument("Compose: component maps disagree on n_vars");
    }
  }
  const int max_deg = p.degree();
  // powers[i][k] = f_i^k, built lazily up to the largest exponent used.
  std::vector<std::vector<Polynomial>> powers(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    powers[i].reserve(max_deg + 1);
    powers[i].push_back(Polynomial::Constant(m, 1.0));
  }
  auto power = [&](std::size_t i, int k) -> const Polynomial& {
    while (static_cast<int>(powers[i].size()) <= k) {
      powers[i].push_back(powers[i].back() * f[i]);
    }
    return powers[i][k];
  };
  Polynomial out(m);
  for (const auto& [mono, c] : p.terms()) {
    Polynomial term = Polynomial::Constant(m, c);
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (mono[static_cast<int>(i)] > 0) {
        term = term * power(i, mono[static_cast<int>(i)]);
      }
    }
    out += term;
  }
  return out;
}

Eigen::VectorXd CoefficientVector(const Polynomial& p,
                                  const MonomialBasis& basis) {
  if (p.n_vars() != basis.n_vars()) {
    throw std::invalid_argument("CoefficientVector: variable-count mismatch");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(basis.size());
  for (const auto& [m, c] : p.terms()) {
    const int idx = basis.IndexOf(m);
    if (idx < 0) {
      throw std::invalid_argument(
          "CoefficientVector: monomial " + ToString(m) + " of degree " +
          std::to_string(m.degree()) + " exceeds basis degree " +
          std::to_string(basis.max_degree()));
    }
    out[idx] = c;
  }
  return out;
}

Polynomial FromCoefficientVector(const Eigen::VectorXd& coeffs,
                                 const MonomialBasis& basis) {
  if (coeffs.size() != basis.size()) {
    throw std::invalid_argument("FromCoefficientVector: length mismatch");
  }
  Polynomial::TermMap terms;
  for (int i = 0; i < basis.size(); ++i) {
    if (coeffs[i] != 0.0) terms.emplace_hint(terms.end(), basis[i], coeffs[i]);
  }
  return Polynomial(basis.n_vars(), std::move(terms));
}

std::vector<std::string> DefaultVariableNames(int n) {
  std::vector<std::string> names;
  names.reserve(n);
  for (int i = 1; i <= n; ++i) names.push_back("x" + std::to_string(i));
  return names;
}

std::string FormatDouble(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("FormatDouble failed");
  return std::string(buf, ptr);
}

std::string ToString(const Monomial& m, std::span<const std::string> names) {
  std::vector<std::string> fallback;
  if (names.empty()) {
    fallback = DefaultVariableNames(m.n_vars());
    names = fallback;
  }
  std::string out;
  for (int i = 0; i < m.n_vars(); ++i) {
    if (m[i] == 0) continue;
    if (!out.empty()) out += '*';
    out += names[i];
    if (m[i] > 1) out += "^" + std::to_string(m[i]);
  }
  return out.empty() ? "1" : out;
}

std::string ToString(const Polynomial& p, std::span<const std::string> names) {
  if (p.is_zero()) return "0";
  std::vector<std::string> fallback;
  if (names.empty()) {
    fallback = DefaultVariableNames(p.n_vars());
    names = fallback;
  }
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, c] : p.terms()) {
    const double mag = std::abs(c);
    if (first) {
      if (c < 0) os << '-';
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    first = false;
    if (m.degree() == 0) {
      os << FormatDouble(mag);
    } else {
      if (mag != 1.0) os << FormatDouble(mag) << '*';
      os << ToString(m, names);
    }
  }
  return os.str();
}

}  // namespace reachsdp
