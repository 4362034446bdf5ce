#pragma once

// Exact symbolic algebra over jet coordinates.
//
// A JetExpr is a polynomial in an extended generator set (jet variables,
// trigonometric kernels, opaque function atoms, symbolic constants) with an
// exponential factor folded into each monomial, divided by a single monomial.
// Normalization cancels common monomial factors between numerator and
// denominator and rewrites sin^2 -> 1 - cos^2, so that an expression is zero
// exactly when its normalized numerator has no terms. Distinct atoms are
// assumed algebraically independent.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "psskit/rational.hpp"

namespace psskit {

inline constexpr int kDefaultJetOrder = 8;

class JetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a construction would need a sum in a denominator.
class DenominatorError : public JetError {
 public:
  using JetError::JetError;
};

/// Raised when a total derivative would leave the configured jet order.
class OrderError : public JetError {
 public:
  using JetError::JetError;
};

enum class VarKind : std::uint8_t { X, T, U, W, V };

/// u_i = d^i u/dx^i, w_j = d^j u/dt^j, v_k = d^k u_x/dt^k.
/// u0 doubles as w0 and u1 as v0; only the u-form is ever stored.
struct JetVar {
  VarKind kind = VarKind::X;
  int index = 0;

  static JetVar x() { return {VarKind::X, 0}; }
  static JetVar t() { return {VarKind::T, 0}; }
  static JetVar u(int i) { return {VarKind::U, i}; }
  static JetVar w(int j);
  static JetVar v(int k);

  std::string name() const;

  friend bool operator==(const JetVar&, const JetVar&) = default;
  friend auto operator<=>(const JetVar&, const JetVar&) = default;
};

/// Sum of rational multiples of jet variables, without constant term.
class LinearForm {
 public:
  LinearForm() = default;
  LinearForm(JetVar var, Rational coefficient);

  const std::map<JetVar, Rational>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  Rational coefficient(JetVar var) const;

  LinearForm& operator+=(const LinearForm& other);
  LinearForm operator-() const;
  LinearForm scaled(const Rational& factor) const;

  friend LinearForm operator+(LinearForm a, const LinearForm& b) { return a += b; }
  friend bool operator==(const LinearForm& a, const LinearForm& b) { return a.terms_ == b.terms_; }

 private:
  std::map<JetVar, Rational> terms_;
};

int compare(const LinearForm& a, const LinearForm& b);

enum class AtomKind : std::uint8_t { Var, Sin, Cos, Opaque, Sym };

/// Declared argument of an opaque function atom.
enum class OpaqueArg : std::uint8_t {
  U0MinusU2,  // f(u0 - u2)
  U0,         // vphi(u0)
  U0U1,       // phi1(u0, u1)
};

/// A generator of the polynomial ring. Exponentials are not atoms: each
/// monomial carries one merged exponent instead.
struct Atom {
  AtomKind kind = AtomKind::Var;
  JetVar var{};              // Var
  LinearForm arg{};          // Sin, Cos
  std::string name{};        // Opaque, Sym
  std::vector<int> orders{}; // Opaque: derivative multi-order
  OpaqueArg opaque_arg = OpaqueArg::U0;

  static Atom variable(JetVar v);
  static Atom sine(LinearForm arg);
  static Atom cosine(LinearForm arg);
  static Atom opaque(std::string name, OpaqueArg arg, std::vector<int> orders);
  static Atom symbol(std::string name);

  /// Jet variables the atom depends on.
  std::vector<JetVar> dependencies() const;
};

int compare(const Atom& a, const Atom& b);
inline bool operator<(const Atom& a, const Atom& b) { return compare(a, b) < 0; }
inline bool operator==(const Atom& a, const Atom& b) { return compare(a, b) == 0; }

using PowerProduct = std::vector<std::pair<Atom, int>>;  // sorted by atom, powers > 0

struct Monomial {
  PowerProduct factors;
  LinearForm exponent;  // exp(exponent), empty means 1

  int degree_of(const Atom& atom) const;
  bool is_unit() const { return factors.empty() && exponent.empty(); }
};

int compare(const Monomial& a, const Monomial& b);

/// Least common multiple of two power products.
PowerProduct lcm(const PowerProduct& a, const PowerProduct& b);

struct MonomialLess {
  bool operator()(const Monomial& a, const Monomial& b) const { return compare(a, b) < 0; }
};

using Polynomial = std::map<Monomial, Rational, MonomialLess>;

class JetExpr {
 public:
  JetExpr() = default;
  JetExpr(const Rational& constant);  // NOLINT(google-explicit-constructor)
  JetExpr(long constant) : JetExpr(Rational(constant)) {}  // NOLINT
  JetExpr(int constant) : JetExpr(Rational(constant)) {}   // NOLINT

  static JetExpr variable(JetVar v);
  static JetExpr u(int i) { return variable(JetVar::u(i)); }
  static JetExpr x() { return variable(JetVar::x()); }
  static JetExpr t() { return variable(JetVar::t()); }
  static JetExpr atom(Atom a);
  static JetExpr exp(LinearForm exponent);
  static JetExpr symbol(std::string name) { return atom(Atom::symbol(std::move(name))); }
  static JetExpr from_parts(Polynomial numerator, PowerProduct denominator);

  const Polynomial& numerator() const { return num_; }
  const PowerProduct& denominator() const { return den_; }

  bool is_zero() const { return num_.empty(); }
  bool is_constant() const;
  /// The value of a constant expression; throws otherwise.
  Rational constant_value() const;
  bool is_monomial() const { return num_.size() == 1; }
  std::size_t term_count() const { return num_.size(); }

  /// Every jet variable the expression depends on, including through kernels.
  std::set<JetVar> variables() const;
  bool depends_on(JetVar v) const;
  std::set<std::string> symbols() const;

  /// Numerator with the denominator dropped (denominators are nonvanishing
  /// monomials, so this is what residual zero-tests look at).
  JetExpr cleared() const;
  /// The denominator as an expression (1 if none).
  JetExpr denominator_expr() const;

  JetExpr& operator+=(const JetExpr& other);
  JetExpr& operator-=(const JetExpr& other);
  JetExpr& operator*=(const JetExpr& other);
  /// Division is only defined by monomial divisors.
  JetExpr& operator/=(const JetExpr& other);
  JetExpr operator-() const;

  friend JetExpr operator+(JetExpr a, const JetExpr& b) { return a += b; }
  friend JetExpr operator-(JetExpr a, const JetExpr& b) { return a -= b; }
  friend JetExpr operator*(JetExpr a, const JetExpr& b) { return a *= b; }
  friend JetExpr operator/(JetExpr a, const JetExpr& b) { return a /= b; }

  /// Structural equality of normalized forms.
  friend bool operator==(const JetExpr& a, const JetExpr& b);

  /// Replaces every occurrence of `target` by `value`. Occurrences in the
  /// denominator require `value` to be a monomial.
  JetExpr substitute(const Atom& target, const JetExpr& value) const;

  void normalize();

 private:
  Polynomial num_;
  PowerProduct den_;
};

JetExpr pow(const JetExpr& base, int exponent);

/// Formal partial derivative; opaque atoms follow the chain rule on their
/// declared argument.
JetExpr diff_wrt(const JetExpr& e, JetVar var);

/// Partial derivative of a single atom (not divided by anything).
JetExpr diff_atom(const Atom& atom, JetVar var);

inline bool is_zero(const JetExpr& e) { return e.is_zero(); }

/// sin/cos with the argument sign normalized (leading coefficient positive).
JetExpr sin_of(const LinearForm& arg);
JetExpr cos_of(const LinearForm& arg);

/// The expression as a linear form, if it is one (no constant term).
std::optional<LinearForm> as_linear_form(const JetExpr& e);

/// Numeric evaluation. `var` supplies jet coordinates; `other` supplies
/// values for opaque and symbolic atoms (may be empty if none occur).
struct EvalEnv {
  std::function<double(JetVar)> var;
  std::function<double(const Atom&)> other;
};
double eval(const JetExpr& e, const EvalEnv& env);
double eval(const LinearForm& l, const EvalEnv& env);

/// Collects numerator terms by the part of each monomial that satisfies
/// `keep`; the remaining factors (and coefficient) form the value. Useful to
/// read off coefficients of jet monomials when unknowns are symbols.
std::map<Monomial, JetExpr, MonomialLess> collect(const JetExpr& e,
                                                  const std::function<bool(const Atom&)>& keep);

}  // namespace psskit
