#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace reachsdp {

/// Exponent vector β ∈ ℕⁿ of the monomial x^β = x₁^β₁ ⋯ xₙ^βₙ.
///
/// Ordering is graded lexicographic: total degree first, then ascending
/// lexicographic order of the exponent tuple. With this ordering the
/// monomials of degree ≤ r form a prefix of the monomials of degree ≤ r+1.
class Monomial {
 public:
  Monomial() = default;

  /// The constant monomial 1 in `n_vars` variables.
  explicit Monomial(int n_vars);

  /// Throws std::invalid_argument on a negative exponent.
  explicit Monomial(std::vector<int> exponents);

  /// x_var in `n_vars` variables.
  static Monomial Unit(int n_vars, int var);

  int n_vars() const { return static_cast<int>(exponents_.size()); }
  int degree() const { return degree_; }
  int operator[](int i) const { return exponents_[i]; }
  std::span<const int> exponents() const { return exponents_; }

  /// Product x^α · x^β = x^(α+β).
  Monomial operator*(const Monomial& other) const;

  /// Exponentwise α ≥ β.
  bool IsMultipleOf(const Monomial& other) const;

  /// x^α / x^β; requires IsMultipleOf(other).
  Monomial operator/(const Monomial& other) const;

  double Evaluate(std::span<const double> point) const;

  friend bool operator==(const Monomial&, const Monomial&) = default;
  friend std::strong_ordering operator<=>(const Monomial& a,
                                          const Monomial& b);

 private:
  std::vector<int> exponents_;
  int degree_ = 0;
};

struct MonomialHash {
  std::size_t operator()(const Monomial& m) const noexcept;
};

/// The ordered monomials of ℕⁿ_r in graded-lex order, with O(1) index lookup.
class MonomialBasis {
 public:
  MonomialBasis() = default;
  MonomialBasis(int n_vars, int max_degree);

  int n_vars() const { return n_vars_; }
  int max_degree() const { return max_degree_; }
  int size() const { return static_cast<int>(monomials_.size()); }
  const Monomial& operator[](int i) const { return monomials_[i]; }
  const std::vector<Monomial>& monomials() const { return monomials_; }

  auto begin() const { return monomials_.begin(); }
  auto end() const { return monomials_.end(); }

  /// Position of `m`, or -1 when m is not in the basis.
  int IndexOf(const Monomial& m) const;
  bool Contains(const Monomial& m) const { return IndexOf(m) >= 0; }

  /// Number of basis elements of degree ≤ d (a prefix length), d ≤ max_degree.
  int PrefixSize(int d) const;

 private:
  int n_vars_ = 0;
  int max_degree_ = 0;
  std::vector<Monomial> monomials_;
  std::unordered_map<Monomial, int, MonomialHash> index_;
};

/// All β with |β| ≤ r in graded-lex order; size binomial(n+r, r).
MonomialBasis EnumerateBasis(int n, int r);

/// Exact binomial coefficient for small arguments.
std::int64_t Binomial(int n, int k);

}  // namespace reachsdp
