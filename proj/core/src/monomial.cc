#include "reachsdp/monomial.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace reachsdp {

Monomial::Monomial(int n_vars) : exponents_(n_vars, 0) {
  if (n_vars < 0) throw std::invalid_argument("Monomial: negative n_vars");
}

Monomial::Monomial(std::vector<int> exponents)
    : exponents_(std::move(exponents)) {
  for (int e : exponents_) {
    if (e < 0) throw std::invalid_argument("Monomial: negative exponent");
    degree_ += e;
  }
}

Monomial Monomial::Unit(int n_vars, int var) {
  if (var < 0 || var >= n_vars) {
    throw std::out_of_range("Monomial::Unit: variable index " +
                            std::to_string(var) + " out of range");
  }
  Monomial m(n_vars);
  m.exponents_[var] = 1;
  m.degree_ = 1;
  return m;
}

Monomial Monomial::operator*(const Monomial& other) const {
  if (other.n_vars() != n_vars()) {
    throw std::invalid_argument("Monomial product: variable-count mismatch");
  }
  Monomial out = *this;
  for (int i = 0; i < n_vars(); ++i) out.exponents_[i] += other.exponents_[i];
  out.degree_ += other.degree_;
  return out;
}

bool Monomial::IsMultipleOf(const Monomial& other) const {
  if (other.n_vars() != n_vars()) return false;
  for (int i = 0; i < n_vars(); ++i) {
    if (exponents_[i] < other.exponents_[i]) return false;
  }
  return true;
}

Monomial Monomial::operator/(const Monomial& other) const {
  if (!IsMultipleOf(other)) {
    throw std::invalid_argument("Monomial quotient: not a multiple");
  }
  Monomial out = *this;
  for (int i = 0; i < n_vars(); ++i) out.exponents_[i] -= other.exponents_[i];
  out.degree_ -= other.degree_;
  return out;
}

double Monomial::Evaluate(std::span<const double> point) const {
  if (static_cast<int>(point.size()) != n_vars()) {
    throw std::invalid_argument("Monomial::Evaluate: dimension mismatch");
  }
  double value = 1.0;
  for (int i = 0; i < n_vars(); ++i) {
    for (int k = 0; k < exponents_[i]; ++k) value *= point[i];
  }
  return value;
}

std::strong_ordering operator<=>(const Monomial& a, const Monomial& b) {
  if (auto c = a.degree_ <=> b.degree_; c != 0) return c;
  return a.exponents_ <=> b.exponents_;
}

std::size_t MonomialHash::operator()(const Monomial& m) const noexcept {
  // FNV-1a over the exponents.
  std::uint64_t h = 1469598103934665603ULL;
  for (int e : m.exponents()) {
    h ^= static_cast<std::uint64_t>(e) + 0x9e3779b97f4a7c15ULL;
    h *= 1099511628211ULL;
  }
  return static_cast<std::size_t>(h);
}

namespace {

// Appends all exponent vectors of total degree `remaining` over positions
// [pos, n) in ascending lexicographic order.
void AppendDegree(int n, int pos, int remaining, std::vector<int>& scratch,
                  std::vector<Monomial>& out) {
  if (pos == n - 1) {
    scratch[pos] = remaining;
    out.emplace_back(scratch);
    return;
  }
  for (int e = 0; e <= remaining; ++e) {
    scratch[pos] = e;
    AppendDegree(n, pos + 1, remaining - e, scratch, out);
  }
  scratch[pos] = 0;
}

}  // namespace

MonomialBasis::MonomialBasis(int n_vars, int max_degree)
    : n_vars_(n_vars), max_degree_(max_degree) {
  if (n_vars < 1) throw std::invalid_argument("MonomialBasis: n < 1");
  if (max_degree < 0) throw std::invalid_argument("MonomialBasis: r < 0");
  monomials_.reserve(static_cast<std::size_t>(Binomial(n_vars + max_degree,
                                                       max_degree)));
  std::vector<int> scratch(n_vars, 0);
  for (int d = 0; d <= max_degree; ++d) {
    AppendDegree(n_vars, 0, d, scratch, monomials_);
  }
  index_.reserve(monomials_.size());
  for (int i = 0; i < size(); ++i) index_.emplace(monomials_[i], i);
}

int MonomialBasis::IndexOf(const Monomial& m) const {
  auto it = index_.find(m);
  return it == index_.end() ? -1 : it->second;
}

int MonomialBasis::PrefixSize(int d) const {
  if (d < 0) return 0;
  if (d > max_degree_) {
    throw std::out_of_range("MonomialBasis::PrefixSize: degree too large");
  }
  return static_cast<int>(Binomial(n_vars_ + d, d));
}

MonomialBasis EnumerateBasis(int n, int r) { return MonomialBasis(n, r); }

std::int64_t Binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::int64_t result = 1;
  for (int i = 1; i <= k; ++i) {
    result = result * (n - k + i) / i;
  }
  return result;
}

}  // namespace reachsdp
