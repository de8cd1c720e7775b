#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "reachsdp/polynomial.h"

namespace reachsdp {

/// Largest exponent accepted after '^'.
inline constexpr int kMaxParsedExponent = 64;

/// Syntax error, unknown identifier or exponent overflow, located by the
/// byte offset into the input.
class PolynomialParseError : public std::invalid_argument {
 public:
  PolynomialParseError(std::size_t offset, const std::string& message);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Parses
///   expr   := term (('+' | '-') term)*
///   term   := factor ('*' factor)*
///   factor := '-' factor | base ('^' uint)?
///   base   := number | identifier | '(' expr ')'
/// over the given variable names. Multiplication is always explicit.
Polynomial ParsePolynomial(std::string_view text, std::span<const std::string> variables);

/// True for names matching [A-Za-z][A-Za-z0-9_]*.
bool IsValidIdentifier(std::string_view name);

}  // namespace reachsdp
