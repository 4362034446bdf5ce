#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>

#include "psskit/jet.hpp"

namespace psskit {

class ParseError : public JetError {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : JetError(message + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

struct ParseOptions {
  int max_order = kDefaultJetOrder;
  /// Names accepted as symbolic constants (otherwise unknown identifiers fail).
  std::set<std::string> symbols{};
};

/// Grammar:
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := ('-' | '+') unary | power
///   power   := primary ('^' ['-'] integer)?
///   primary := number | var | kernel '(' expr ')' | opaque | symbol | '(' expr ')'
/// var is x, t, u0..u9, w1..w9, v1..v9; kernels are exp, sin, cos and take
/// linear forms; opaque atoms are f<k>(u0-u2), phi1_<a>_<b>(u0,u1) and
/// vphi<k>(u0), with f(..), phi1(..), vphi(..) as order-zero shorthands.
JetExpr parse_expr(std::string_view text, const ParseOptions& options = {});

/// Inverse of parse_expr: parse_expr(render(e)) == e.
std::string render(const JetExpr& e);
std::string render(const LinearForm& l);
std::string render(const Atom& a);

}  // namespace psskit
