#include "psskit/parse.hpp"

#include <cctype>
#include <sstream>

namespace psskit {

namespace {

bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Parser {
 public:
  Parser(std::string_view text, const ParseOptions& options) : s_(text), opt_(options) {}

  JetExpr parse() {
    JetExpr e = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  std::string_view s_;
  const ParseOptions& opt_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }
  [[noreturn]] void fail_at(const std::string& msg, std::size_t at) const { throw ParseError(msg, at); }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  JetExpr expr() {
    JetExpr e = term();
    for (;;) {
      if (accept('+'))
        e += term();
      else if (accept('-'))
        e -= term();
      else
        return e;
    }
  }

  JetExpr term() {
    JetExpr e = unary();
    for (;;) {
      if (accept('*')) {
        e *= unary();
      } else if (accept('/')) {
        skip();
        std::size_t at = pos_;
        JetExpr d = unary();
        try {
          e /= d;
        } catch (const DenominatorError&) {
          throw DenominatorError("denominator is a sum at byte " + std::to_string(at));
        } catch (const JetError& err) {
          fail_at(err.what(), at);
        }
      } else {
        return e;
      }
    }
  }

  JetExpr unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  JetExpr power() {
    JetExpr base = primary();
    if (!accept('^')) return base;
    skip();
    bool negative = false;
    if (accept('-')) negative = true;
    skip();
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) fail("expected integer exponent");
    int n = std::stoi(std::string(s_.substr(start, pos_ - start)));
    try {
      return pow(base, negative ? -n : n);
    } catch (const DenominatorError&) {
      throw DenominatorError("denominator is a sum at byte " + std::to_string(start));
    } catch (const JetError& err) {
      fail_at(err.what(), start);
    }
  }

  JetExpr number() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.'))
      ++pos_;
    // exponent suffix like 1e-3
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    auto q = parse_rational(s_.substr(start, pos_ - start));
    if (!q) fail_at("malformed number", start);
    return JetExpr(*q);
  }

  std::string identifier() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && is_ident_char(s_[pos_])) ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }

  LinearForm linear_argument(std::size_t at) {
    expect('(');
    JetExpr arg = expr();
    expect(')');
    auto l = as_linear_form(arg);
    if (!l) fail_at("kernel argument must be a linear form without constant term", at);
    return *l;
  }

  // Parses "(...)" and checks it equals the declared opaque argument.
  void opaque_argument(OpaqueArg kind, std::size_t at) {
    expect('(');
    JetExpr first = expr();
    if (kind == OpaqueArg::U0U1) {
      expect(',');
      JetExpr second = expr();
      expect(')');
      if (!(first == JetExpr::u(0)) || !(second == JetExpr::u(1)))
        fail_at("phi1 takes the arguments (u0,u1)", at);
      return;
    }
    expect(')');
    JetExpr want = kind == OpaqueArg::U0 ? JetExpr::u(0) : JetExpr::u(0) - JetExpr::u(2);
    if (!(first == want))
      fail_at(kind == OpaqueArg::U0 ? "vphi takes the argument (u0)" : "f takes the argument (u0-u2)", at);
  }

  static bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
  }

  JetExpr jet_variable(const std::string& id, std::size_t at) {
    char k = id[0];
    if (id.size() != 2) fail_at("unknown symbol '" + id + "'", at);
    int index = id[1] - '0';
    if (index > opt_.max_order) fail_at("jet order exceeds bound in '" + id + "'", at);
    if (k == 'u') return JetExpr::u(index);
    if (index == 0)
      fail_at(std::string("'") + id + "' is an alias; write " + (k == 'w' ? "u0" : "u1"), at);
    return JetExpr::variable(k == 'w' ? JetVar{VarKind::W, index} : JetVar{VarKind::V, index});
  }

  JetExpr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      JetExpr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (!std::isalpha(static_cast<unsigned char>(c))) fail("unexpected character '" + std::string(1, c) + "'");

    std::size_t at = pos_;
    std::string id = identifier();
    if (id == "x") return JetExpr::x();
    if (id == "t") return JetExpr::t();
    if ((id[0] == 'u' || id[0] == 'w' || id[0] == 'v') && all_digits(std::string_view(id).substr(1)))
      return jet_variable(id, at);
    if (id == "exp") return JetExpr::exp(linear_argument(at));
    if (id == "sin") return sin_of(linear_argument(at));
    if (id == "cos") return cos_of(linear_argument(at));
    if (id == "f" || (id[0] == 'f' && all_digits(std::string_view(id).substr(1)))) {
      int k = id.size() == 1 ? 0 : std::stoi(id.substr(1));
      opaque_argument(OpaqueArg::U0MinusU2, at);
      return JetExpr::atom(Atom::opaque("f", OpaqueArg::U0MinusU2, {k}));
    }
    if (id.rfind("vphi", 0) == 0 && (id.size() == 4 || all_digits(std::string_view(id).substr(4)))) {
      int k = id.size() == 4 ? 0 : std::stoi(id.substr(4));
      opaque_argument(OpaqueArg::U0, at);
      return JetExpr::atom(Atom::opaque("vphi", OpaqueArg::U0, {k}));
    }
    if (id.rfind("phi1", 0) == 0) {
      int a = 0, b = 0;
      if (id.size() > 4) {
        std::string_view rest = std::string_view(id).substr(4);
        auto sep = rest.find('_', 1);
        if (rest[0] != '_' || sep == std::string_view::npos || !all_digits(rest.substr(1, sep - 1)) ||
            !all_digits(rest.substr(sep + 1)))
          fail_at("malformed phi1 derivative '" + id + "'", at);
        a = std::stoi(std::string(rest.substr(1, sep - 1)));
        b = std::stoi(std::string(rest.substr(sep + 1)));
      }
      opaque_argument(OpaqueArg::U0U1, at);
      return JetExpr::atom(Atom::opaque("phi1", OpaqueArg::U0U1, {a, b}));
    }
    if (opt_.symbols.count(id)) return JetExpr::symbol(id);
    fail_at("unknown symbol '" + id + "'", at);
  }
};

std::string render_power_product(const PowerProduct& pp) {
  std::string out;
  for (const auto& [a, p] : pp) {
    if (!out.empty()) out += "*";
    out += render(a);
    if (p != 1) out += "^" + std::to_string(p);
  }
  return out;
}

}  // namespace

JetExpr parse_expr(std::string_view text, const ParseOptions& options) {
  Parser p(text, options);
  return p.parse();
}

std::string render(const LinearForm& l) {
  if (l.empty()) return "0";
  std::string out;
  for (const auto& [v, c] : l.terms()) {
    bool negative = c < 0;
    Rational mag = negative ? Rational(-c) : c;
    if (out.empty())
      out += negative ? "-" : "";
    else
      out += negative ? " - " : " + ";
    if (mag != 1) out += to_string(mag) + "*";
    out += v.name();
  }
  return out;
}

std::string render(const Atom& a) {
  switch (a.kind) {
    case AtomKind::Var: return a.var.name();
    case AtomKind::Sin: return "sin(" + render(a.arg) + ")";
    case AtomKind::Cos: return "cos(" + render(a.arg) + ")";
    case AtomKind::Sym: return a.name;
    case AtomKind::Opaque:
      switch (a.opaque_arg) {
        case OpaqueArg::U0MinusU2: return a.name + std::to_string(a.orders[0]) + "(u0-u2)";
        case OpaqueArg::U0: return a.name + std::to_string(a.orders[0]) + "(u0)";
        case OpaqueArg::U0U1:
          return a.name + "_" + std::to_string(a.orders[0]) + "_" + std::to_string(a.orders[1]) + "(u0,u1)";
      }
  }
  return "?";
}

std::string render(const JetExpr& e) {
  if (e.is_zero()) return "0";
  std::string num;
  bool first = true;
  // Render highest-order terms first for readability; order is deterministic.
  for (auto it = e.numerator().rbegin(); it != e.numerator().rend(); ++it) {
    const auto& [m, c] = *it;
    bool negative = c < 0;
    Rational mag = negative ? Rational(-c) : c;
    if (first)
      num += negative ? "-" : "";
    else
      num += negative ? " - " : " + ";
    first = false;
    std::string body = render_power_product(m.factors);
    if (!m.exponent.empty()) {
      if (!body.empty()) body += "*";
      body += "exp(" + render(m.exponent) + ")";
    }
    if (body.empty()) {
      num += to_string(mag);
    } else {
      if (mag != 1) num += to_string(mag) + "*";
      num += body;
    }
  }
  if (e.denominator().empty()) return num;
  return "(" + num + ")/(" + render_power_product(e.denominator()) + ")";
}

}  // namespace psskit
