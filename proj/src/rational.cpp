#include "psskit/rational.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace psskit {

namespace {

std::optional<Rational> parse_decimal(std::string_view text) {
  if (text.empty()) return std::nullopt;
  bool negative = false;
  std::size_t pos = 0;
  if (text[0] == '+' || text[0] == '-') {
    negative = text[0] == '-';
    pos = 1;
  }
  std::string digits;
  int fraction_digits = 0;
  bool seen_point = false;
  bool any_digit = false;
  int exponent = 0;
  for (; pos < text.size(); ++pos) {
    char c = text[pos];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      any_digit = true;
      if (seen_point) ++fraction_digits;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else if ((c == 'e' || c == 'E') && any_digit) {
      std::string_view rest = text.substr(pos + 1);
      if (!rest.empty() && rest[0] == '+') rest.remove_prefix(1);
      auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), exponent);
      if (ec != std::errc() || ptr != rest.data() + rest.size()) return std::nullopt;
      pos = text.size();
      break;
    } else {
      return std::nullopt;
    }
  }
  if (!any_digit) return std::nullopt;
  mpz_class numerator(digits, 10);
  mpz_class denominator = 1;
  int scale = fraction_digits - exponent;
  mpz_class ten = 10;
  if (scale > 0) {
    mpz_pow_ui(denominator.get_mpz_t(), ten.get_mpz_t(), static_cast<unsigned long>(scale));
  } else if (scale < 0) {
    mpz_class factor;
    mpz_pow_ui(factor.get_mpz_t(), ten.get_mpz_t(), static_cast<unsigned long>(-scale));
    numerator *= factor;
  }
  Rational q(numerator, denominator);
  q.canonicalize();
  if (negative) q = -q;
  return q;
}

}  // namespace

std::optional<Rational> parse_rational(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return parse_decimal(text);
  auto num = parse_decimal(text.substr(0, slash));
  auto den = parse_decimal(text.substr(slash + 1));
  if (!num || !den || *den == 0) return std::nullopt;
  Rational q = *num / *den;
  q.canonicalize();
  return q;
}

Rational rational_from_double(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("non-finite scalar");
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) throw std::invalid_argument("cannot format scalar");
  auto q = parse_decimal(std::string_view(buffer, static_cast<std::size_t>(ptr - buffer)));
  if (!q) throw std::invalid_argument("cannot convert scalar to rational");
  return *q;
}

std::string to_string(const Rational& q) { return q.get_str(); }

std::optional<Rational> exact_sqrt(const Rational& q) {
  if (q < 0) return std::nullopt;
  mpz_class num = q.get_num();
  mpz_class den = q.get_den();
  if (!mpz_perfect_square_p(num.get_mpz_t()) || !mpz_perfect_square_p(den.get_mpz_t())) {
    return std::nullopt;
  }
  mpz_class rn, rd;
  mpz_sqrt(rn.get_mpz_t(), num.get_mpz_t());
  mpz_sqrt(rd.get_mpz_t(), den.get_mpz_t());
  Rational r(rn, rd);
  r.canonicalize();
  return r;
}

}  // namespace psskit
