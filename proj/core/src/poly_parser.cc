#include "reachsdp/poly_parser.h"

#include <cctype>
#include <charconv>
#include <cmath>

namespace reachsdp {

PolynomialParseError::PolynomialParseError(std::size_t offset, const std::string& message)
    : std::invalid_argument("at byte " + std::to_string(offset) + ": " + message),
      offset_(offset) {}

bool IsValidIdentifier(std::string_view name) {
  if (name.empty() || !std::isalpha(static_cast<unsigned char>(name[0]))) return false;
  for (char ch : name) {
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_') return false;
  }
  return true;
}

namespace {

bool IsIdentStart(char ch) { return std::isalpha(static_cast<unsigned char>(ch)); }
bool IsIdentChar(char ch) {
  return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_';
}
bool IsDigit(char ch) { return std::isdigit(static_cast<unsigned char>(ch)); }

class Parser {
 public:
  Parser(std::string_view text, std::span<const std::string> vars)
      : text_(text), vars_(vars), n_(static_cast<int>(vars.size())) {}

  Polynomial Parse() {
    Polynomial p = Expr();
    SkipSpace();
    if (pos_ < text_.size()) {
      throw PolynomialParseError(pos_, "unexpected '" + std::string(1, text_[pos_]) + "'");
    }
    return p;
  }

 private:
  void SkipSpace() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  char Peek() {
    SkipSpace();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  Polynomial Expr() {
    Polynomial p = Term();
    for (char op = Peek(); op == '+' || op == '-'; op = Peek()) {
      ++pos_;
      Polynomial rhs = Term();
      if (op == '+') {
        p += rhs;
      } else {
        p -= rhs;
      }
    }
    return p;
  }

  Polynomial Term() {
    Polynomial p = Factor();
    while (Peek() == '*') {
      ++pos_;
      p = p * Factor();
    }
    return p;
  }

  Polynomial Factor() {
    if (Peek() == '-') {
      ++pos_;
      return -Factor();
    }
    Polynomial base = Base();
    if (Peek() != '^') return base;
    ++pos_;
    SkipSpace();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && IsDigit(text_[pos_])) ++pos_;
    if (start == pos_) throw PolynomialParseError(start, "expected exponent");
    int k = 0;
    const auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, k);
    if (ec != std::errc() || k > kMaxParsedExponent) {
      throw PolynomialParseError(start, "exponent exceeds " +
                                            std::to_string(kMaxParsedExponent));
    }
    return base.Pow(k);
  }

  Polynomial Base() {
    const char ch = Peek();
    const std::size_t start = pos_;
    if (ch == '(') {
      ++pos_;
      Polynomial p = Expr();
      if (Peek() != ')') throw PolynomialParseError(pos_, "expected ')'");
      ++pos_;
      return p;
    }
    if (IsDigit(ch) || ch == '.') return Polynomial::Constant(n_, Number());
    if (IsIdentStart(ch)) {
      while (pos_ < text_.size() && IsIdentChar(text_[pos_])) ++pos_;
      const std::string_view name = text_.substr(start, pos_ - start);
      for (int i = 0; i < n_; ++i) {
        if (vars_[i] == name) return Polynomial::Variable(n_, i);
      }
      throw PolynomialParseError(start, "unknown variable '" + std::string(name) + "'");
    }
    if (ch == '\0') throw PolynomialParseError(pos_, "unexpected end of input");
    throw PolynomialParseError(pos_, "unexpected '" + std::string(1, ch) + "'");
  }

  // digits ['.' digits] [('e'|'E') ['+'|'-'] digits]
  double Number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      const std::size_t s = pos_;
      while (pos_ < text_.size() && IsDigit(text_[pos_])) ++pos_;
      return pos_ - s;
    };
    std::size_t count = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      count += digits();
    }
    if (count == 0) throw PolynomialParseError(start, "malformed number");
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) throw PolynomialParseError(start, "malformed number");
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc() || ptr != text_.data() + pos_ || !std::isfinite(value)) {
      throw PolynomialParseError(start, "malformed number");
    }
    if (pos_ < text_.size() && IsIdentChar(text_[pos_])) {
      throw PolynomialParseError(pos_, "implicit multiplication is not allowed");
    }
    return value;
  }

  std::string_view text_;
  std::span<const std::string> vars_;
  int n_;
  std::size_t pos_ = 0;
};

}  // namespace

Polynomial ParsePolynomial(std::string_view text, std::span<const std::string> variables) {
  if (variables.empty()) throw std::invalid_argument("ParsePolynomial: no variables");
  return Parser(text, variables).Parse();
}

}  // namespace reachsdp
