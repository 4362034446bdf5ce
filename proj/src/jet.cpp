#include "psskit/jet.hpp"

#include <algorithm>
#include <cmath>

namespace psskit {

// ---------------------------------------------------------------- JetVar

JetVar JetVar::w(int j) { return j == 0 ? u(0) : JetVar{VarKind::W, j}; }
JetVar JetVar::v(int k) { return k == 0 ? u(1) : JetVar{VarKind::V, k}; }

std::string JetVar::name() const {
  switch (kind) {
    case VarKind::X: return "x";
    case VarKind::T: return "t";
    case VarKind::U: return "u" + std::to_string(index);
    case VarKind::W: return "w" + std::to_string(index);
    case VarKind::V: return "v" + std::to_string(index);
  }
  return "?";
}

// ------------------------------------------------------------ LinearForm

LinearForm::LinearForm(JetVar var, Rational coefficient) {
  if (coefficient != 0) terms_.emplace(var, std::move(coefficient));
}

Rational LinearForm::coefficient(JetVar var) const {
  auto it = terms_.find(var);
  return it == terms_.end() ? Rational(0) : it->second;
}

LinearForm& LinearForm::operator+=(const LinearForm& other) {
  for (const auto& [var, c] : other.terms_) {
    auto [it, inserted] = terms_.emplace(var, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }
  return *this;
}

LinearForm LinearForm::operator-() const { return scaled(-1); }

LinearForm LinearForm::scaled(const Rational& factor) const {
  LinearForm out;
  if (factor == 0) return out;
  for (const auto& [var, c] : terms_) out.terms_.emplace(var, c * factor);
  return out;
}

int compare(const LinearForm& a, const LinearForm& b) {
  auto ia = a.terms().begin();
  auto ib = b.terms().begin();
  for (; ia != a.terms().end() && ib != b.terms().end(); ++ia, ++ib) {
    if (ia->first != ib->first) return ia->first < ib->first ? -1 : 1;
    int c = cmp(ia->second, ib->second);
    if (c != 0) return c < 0 ? -1 : 1;
  }
  if (ia == a.terms().end() && ib == b.terms().end()) return 0;
  return ia == a.terms().end() ? -1 : 1;
}

// ------------------------------------------------------------------ Atom

Atom Atom::variable(JetVar v) {
  Atom a;
  a.kind = AtomKind::Var;
  a.var = v;
  return a;
}

Atom Atom::sine(LinearForm arg) {
  Atom a;
  a.kind = AtomKind::Sin;
  a.arg = std::move(arg);
  return a;
}

Atom Atom::cosine(LinearForm arg) {
  Atom a;
  a.kind = AtomKind::Cos;
  a.arg = std::move(arg);
  return a;
}

Atom Atom::opaque(std::string name, OpaqueArg arg, std::vector<int> orders) {
  Atom a;
  a.kind = AtomKind::Opaque;
  a.name = std::move(name);
  a.opaque_arg = arg;
  a.orders = std::move(orders);
  return a;
}

Atom Atom::symbol(std::string name) {
  Atom a;
  a.kind = AtomKind::Sym;
  a.name = std::move(name);
  return a;
}

std::vector<JetVar> Atom::dependencies() const {
  switch (kind) {
    case AtomKind::Var: return {var};
    case AtomKind::Sin:
    case AtomKind::Cos: {
      std::vector<JetVar> out;
      for (const auto& [v, c] : arg.terms()) out.push_back(v);
      return out;
    }
    case AtomKind::Opaque:
      switch (opaque_arg) {
        case OpaqueArg::U0MinusU2: return {JetVar::u(0), JetVar::u(2)};
        case OpaqueArg::U0: return {JetVar::u(0)};
        case OpaqueArg::U0U1: return {JetVar::u(0), JetVar::u(1)};
      }
      return {};
    case AtomKind::Sym: return {};
  }
  return {};
}

int compare(const Atom& a, const Atom& b) {
  if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
  switch (a.kind) {
    case AtomKind::Var:
      if (a.var == b.var) return 0;
      return a.var < b.var ? -1 : 1;
    case AtomKind::Sin:
    case AtomKind::Cos: return compare(a.arg, b.arg);
    case AtomKind::Opaque:
      if (a.name != b.name) return a.name < b.name ? -1 : 1;
      if (a.opaque_arg != b.opaque_arg) return a.opaque_arg < b.opaque_arg ? -1 : 1;
      if (a.orders != b.orders) return a.orders < b.orders ? -1 : 1;
      return 0;
    case AtomKind::Sym:
      if (a.name == b.name) return 0;
      return a.name < b.name ? -1 : 1;
  }
  return 0;
}

// -------------------------------------------------------------- Monomial

int Monomial::degree_of(const Atom& atom) const {
  for (const auto& [a, p] : factors)
    if (a == atom) return p;
  return 0;
}

int compare(const Monomial& a, const Monomial& b) {
  std::size_t n = std::min(a.factors.size(), b.factors.size());
  for (std::size_t i = 0; i < n; ++i) {
    int c = compare(a.factors[i].first, b.factors[i].first);
    if (c != 0) return c;
    if (a.factors[i].second != b.factors[i].second)
      return a.factors[i].second < b.factors[i].second ? -1 : 1;
  }
  if (a.factors.size() != b.factors.size()) return a.factors.size() < b.factors.size() ? -1 : 1;
  return compare(a.exponent, b.exponent);
}

namespace {

// Merge two sorted power products, adding powers.
PowerProduct multiply(const PowerProduct& a, const PowerProduct& b) {
  PowerProduct out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      out.push_back(b[j++]);
    } else {
      out.emplace_back(a[i].first, a[i].second + b[j].second);
      ++i;
      ++j;
    }
  }
  return out;
}

Monomial multiply(const Monomial& a, const Monomial& b) {
  return {multiply(a.factors, b.factors), a.exponent + b.exponent};
}

// a / b assuming b divides a.
PowerProduct divide(const PowerProduct& a, const PowerProduct& b) {
  PowerProduct out;
  std::size_t j = 0;
  for (const auto& [atom, p] : a) {
    int q = p;
    while (j < b.size() && b[j].first < atom) ++j;
    if (j < b.size() && b[j].first == atom) q -= b[j].second;
    if (q < 0) throw JetError("internal: inexact monomial division");
    if (q > 0) out.emplace_back(atom, q);
  }
  return out;
}

}  // namespace

PowerProduct lcm(const PowerProduct& a, const PowerProduct& b) {
  PowerProduct out;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      out.push_back(b[j++]);
    } else {
      out.emplace_back(a[i].first, std::max(a[i].second, b[j].second));
      ++i;
      ++j;
    }
  }
  return out;
}

namespace {

void add_term(Polynomial& poly, const Monomial& m, const Rational& c) {
  if (c == 0) return;
  auto [it, inserted] = poly.emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) poly.erase(it);
  }
}

Polynomial multiply(const Polynomial& a, const Polynomial& b) {
  Polynomial out;
  for (const auto& [ma, ca] : a)
    for (const auto& [mb, cb] : b) add_term(out, multiply(ma, mb), ca * cb);
  return out;
}

Polynomial scale(const Polynomial& p, const PowerProduct& factor) {
  if (factor.empty()) return p;
  Polynomial out;
  for (const auto& [m, c] : p) out.emplace(Monomial{multiply(m.factors, factor), m.exponent}, c);
  return out;
}

// Rewrites sin(L)^p with p >= 2 as sin(L)^(p-2) (1 - cos(L)^2) until no
// monomial carries a sine power above one.
Polynomial reduce_trig(const Polynomial& poly) {
  Polynomial out;
  std::vector<std::pair<Monomial, Rational>> work(poly.begin(), poly.end());
  while (!work.empty()) {
    auto [m, c] = std::move(work.back());
    work.pop_back();
    auto it = std::find_if(m.factors.begin(), m.factors.end(), [](const auto& f) {
      return f.first.kind == AtomKind::Sin && f.second >= 2;
    });
    if (it == m.factors.end()) {
      add_term(out, m, c);
      continue;
    }
    Atom cosine = Atom::cosine(it->first.arg);
    Monomial base = m;
    auto& sp = *std::find_if(base.factors.begin(), base.factors.end(),
                             [&](const auto& f) { return f.first == it->first; });
    sp.second -= 2;
    if (sp.second == 0)
      base.factors.erase(std::find_if(base.factors.begin(), base.factors.end(),
                                      [&](const auto& f) { return f.first == it->first; }));
    Monomial with_cos{multiply(base.factors, PowerProduct{{cosine, 2}}), base.exponent};
    work.emplace_back(base, c);
    work.emplace_back(with_cos, -c);
  }
  return out;
}

// Cancels the monomial gcd between numerator and denominator.
void cancel(Polynomial& num, PowerProduct& den) {
  if (den.empty() || num.empty()) return;
  PowerProduct common;
  for (const auto& [atom, p] : den) {
    int low = p;
    for (const auto& [m, c] : num) {
      low = std::min(low, m.degree_of(atom));
      if (low == 0) break;
    }
    if (low > 0) common.emplace_back(atom, low);
  }
  if (common.empty()) return;
  Polynomial reduced;
  for (const auto& [m, c] : num) reduced.emplace(Monomial{divide(m.factors, common), m.exponent}, c);
  num = std::move(reduced);
  den = divide(den, common);
}

}  // namespace

// --------------------------------------------------------------- JetExpr

JetExpr::JetExpr(const Rational& constant) {
  if (constant != 0) num_.emplace(Monomial{}, constant);
}

JetExpr JetExpr::variable(JetVar v) { return atom(Atom::variable(v)); }

JetExpr JetExpr::atom(Atom a) {
  JetExpr e;
  e.num_.emplace(Monomial{{{std::move(a), 1}}, {}}, Rational(1));
  return e;
}

JetExpr JetExpr::exp(LinearForm exponent) {
  JetExpr e;
  e.num_.emplace(Monomial{{}, std::move(exponent)}, Rational(1));
  return e;
}

JetExpr JetExpr::from_parts(Polynomial numerator, PowerProduct denominator) {
  JetExpr e;
  e.num_ = std::move(numerator);
  e.den_ = std::move(denominator);
  e.normalize();
  return e;
}

void JetExpr::normalize() {
  for (auto it = num_.begin(); it != num_.end();) {
    if (it->second == 0)
      it = num_.erase(it);
    else
      ++it;
  }
  cancel(num_, den_);
  num_ = reduce_trig(num_);
  cancel(num_, den_);
  if (num_.empty()) den_.clear();
}

bool JetExpr::is_constant() const {
  return den_.empty() && (num_.empty() || (num_.size() == 1 && num_.begin()->first.is_unit()));
}

Rational JetExpr::constant_value() const {
  if (!is_constant()) throw JetError("expression is not a constant");
  return num_.empty() ? Rational(0) : num_.begin()->second;
}

std::set<JetVar> JetExpr::variables() const {
  std::set<JetVar> out;
  auto scan = [&](const PowerProduct& pp) {
    for (const auto& [a, p] : pp)
      for (JetVar v : a.dependencies()) out.insert(v);
  };
  for (const auto& [m, c] : num_) {
    scan(m.factors);
    for (const auto& [v, k] : m.exponent.terms()) out.insert(v);
  }
  scan(den_);
  return out;
}

bool JetExpr::depends_on(JetVar v) const { return variables().count(v) > 0; }

std::set<std::string> JetExpr::symbols() const {
  std::set<std::string> out;
  auto scan = [&](const PowerProduct& pp) {
    for (const auto& [a, p] : pp)
      if (a.kind == AtomKind::Sym) out.insert(a.name);
  };
  for (const auto& [m, c] : num_) scan(m.factors);
  scan(den_);
  return out;
}

JetExpr JetExpr::cleared() const {
  JetExpr e;
  e.num_ = num_;
  return e;
}

JetExpr JetExpr::denominator_expr() const {
  JetExpr e;
  e.num_.emplace(Monomial{den_, {}}, Rational(1));
  return e;
}

JetExpr& JetExpr::operator+=(const JetExpr& other) {
  if (other.num_.empty()) return *this;
  if (den_ == other.den_) {
    for (const auto& [m, c] : other.num_) add_term(num_, m, c);
  } else {
    PowerProduct common = lcm(den_, other.den_);
    Polynomial mine = scale(num_, divide(common, den_));
    for (const auto& [m, c] : scale(other.num_, divide(common, other.den_))) add_term(mine, m, c);
    num_ = std::move(mine);
    den_ = std::move(common);
  }
  normalize();
  return *this;
}

JetExpr& JetExpr::operator-=(const JetExpr& other) { return *this += -other; }

JetExpr JetExpr::operator-() const {
  JetExpr e = *this;
  for (auto& [m, c] : e.num_) c = -c;
  return e;
}

JetExpr& JetExpr::operator*=(const JetExpr& other) {
  num_ = multiply(num_, other.num_);
  den_ = multiply(den_, other.den_);
  normalize();
  return *this;
}

JetExpr& JetExpr::operator/=(const JetExpr& other) {
  if (other.is_zero()) throw JetError("division by zero");
  if (!other.is_monomial()) throw DenominatorError("division by a sum is not supported");
  const auto& [m, c] = *other.num_.begin();
  Polynomial inv;
  inv.emplace(Monomial{other.den_, -m.exponent}, Rational(1) / c);
  num_ = multiply(num_, inv);
  den_ = multiply(den_, m.factors);
  normalize();
  return *this;
}

bool operator==(const JetExpr& a, const JetExpr& b) {
  if (a.den_ != b.den_ || a.num_.size() != b.num_.size()) return false;
  auto ia = a.num_.begin();
  for (auto ib = b.num_.begin(); ib != b.num_.end(); ++ia, ++ib) {
    if (compare(ia->first, ib->first) != 0 || ia->second != ib->second) return false;
  }
  return true;
}

JetExpr pow(const JetExpr& base, int exponent) {
  if (exponent < 0) return JetExpr(1) / pow(base, -exponent);
  JetExpr result(1);
  JetExpr b = base;
  while (exponent > 0) {
    if (exponent & 1) result *= b;
    exponent >>= 1;
    if (exponent > 0) b *= b;
  }
  return result;
}

namespace {

JetExpr monomial_expr(const Monomial& m, const Rational& c) {
  Polynomial p;
  p.emplace(m, c);
  return JetExpr::from_parts(std::move(p), {});
}

// Applies a linear substitution var -> value inside a linear form.
LinearForm substitute_linear(const LinearForm& l, JetVar var, const LinearForm& value) {
  Rational k = l.coefficient(var);
  if (k == 0) return l;
  LinearForm out = l + LinearForm(var, -k);
  return out + value.scaled(k);
}

}  // namespace

JetExpr sin_of(const LinearForm& arg) {
  if (arg.empty()) return JetExpr(0);
  if (arg.terms().begin()->second < 0) return -JetExpr::atom(Atom::sine(-arg));
  return JetExpr::atom(Atom::sine(arg));
}

JetExpr cos_of(const LinearForm& arg) {
  if (arg.empty()) return JetExpr(1);
  if (arg.terms().begin()->second < 0) return JetExpr::atom(Atom::cosine(-arg));
  return JetExpr::atom(Atom::cosine(arg));
}

std::optional<LinearForm> as_linear_form(const JetExpr& e) {
  if (!e.denominator().empty()) return std::nullopt;
  LinearForm out;
  for (const auto& [m, c] : e.numerator()) {
    if (!m.exponent.empty() || m.factors.size() != 1) return std::nullopt;
    const auto& [a, p] = m.factors.front();
    if (a.kind != AtomKind::Var || p != 1) return std::nullopt;
    out += LinearForm(a.var, c);
  }
  return out;
}

JetExpr JetExpr::substitute(const Atom& target, const JetExpr& value) const {
  std::optional<LinearForm> linear;
  if (target.kind == AtomKind::Var) linear = as_linear_form(value);
  auto rebuild = [&](const Atom& a) -> JetExpr {
    if (a == target) return value;
    if ((a.kind == AtomKind::Sin || a.kind == AtomKind::Cos) && target.kind == AtomKind::Var &&
        a.arg.coefficient(target.var) != 0) {
      if (!linear) throw JetError("substitution into a kernel argument must be linear");
      LinearForm arg = substitute_linear(a.arg, target.var, *linear);
      return a.kind == AtomKind::Sin ? sin_of(arg) : cos_of(arg);
    }
    if (a.kind == AtomKind::Opaque && target.kind == AtomKind::Var) {
      for (JetVar v : a.dependencies())
        if (v == target.var) throw JetError("cannot substitute inside an opaque atom argument");
    }
    return JetExpr::atom(a);
  };
  JetExpr out;
  for (const auto& [m, c] : num_) {
    LinearForm ex = m.exponent;
    if (target.kind == AtomKind::Var && ex.coefficient(target.var) != 0) {
      if (!linear) throw JetError("substitution into an exponent must be linear");
      ex = substitute_linear(ex, target.var, *linear);
    }
    JetExpr term = JetExpr(c) * JetExpr::exp(ex);
    for (const auto& [a, p] : m.factors) term *= pow(rebuild(a), p);
    out += term;
  }
  JetExpr den(1);
  for (const auto& [a, p] : den_) den *= pow(rebuild(a), p);
  return out / den;
}

// ------------------------------------------------------------ derivatives

JetExpr diff_atom(const Atom& atom, JetVar var) {
  switch (atom.kind) {
    case AtomKind::Var: return atom.var == var ? JetExpr(1) : JetExpr(0);
    case AtomKind::Sym: return JetExpr(0);
    case AtomKind::Sin: {
      Rational k = atom.arg.coefficient(var);
      if (k == 0) return JetExpr(0);
      return JetExpr(k) * JetExpr::atom(Atom::cosine(atom.arg));
    }
    case AtomKind::Cos: {
      Rational k = atom.arg.coefficient(var);
      if (k == 0) return JetExpr(0);
      return JetExpr(-k) * JetExpr::atom(Atom::sine(atom.arg));
    }
    case AtomKind::Opaque: {
      auto raised = [&](std::size_t slot) {
        Atom next = atom;
        next.orders[slot] += 1;
        return JetExpr::atom(next);
      };
      switch (atom.opaque_arg) {
        case OpaqueArg::U0MinusU2:
          if (var == JetVar::u(0)) return raised(0);
          if (var == JetVar::u(2)) return -raised(0);
          return JetExpr(0);
        case OpaqueArg::U0:
          return var == JetVar::u(0) ? raised(0) : JetExpr(0);
        case OpaqueArg::U0U1:
          if (var == JetVar::u(0)) return raised(0);
          if (var == JetVar::u(1)) return raised(1);
          return JetExpr(0);
      }
    }
  }
  return JetExpr(0);
}

namespace {

// Derivative of a polynomial (no denominator) with respect to var.
JetExpr diff_polynomial(const Polynomial& poly, JetVar var) {
  JetExpr out;
  for (const auto& [m, c] : poly) {
    Rational k = m.exponent.coefficient(var);
    if (k != 0) out += monomial_expr(m, c * k);
    for (std::size_t i = 0; i < m.factors.size(); ++i) {
      const auto& [a, p] = m.factors[i];
      JetExpr da = diff_atom(a, var);
      if (da.is_zero()) continue;
      Monomial rest = m;
      if (p == 1)
        rest.factors.erase(rest.factors.begin() + static_cast<std::ptrdiff_t>(i));
      else
        rest.factors[i].second -= 1;
      out += monomial_expr(rest, c * p) * da;
    }
  }
  return out;
}

}  // namespace

JetExpr diff_wrt(const JetExpr& e, JetVar var) {
  JetExpr dnum = diff_polynomial(e.numerator(), var);
  if (e.denominator().empty()) return dnum;
  Polynomial den_poly;
  den_poly.emplace(Monomial{e.denominator(), {}}, Rational(1));
  JetExpr dden = diff_polynomial(den_poly, var);
  JetExpr den = e.denominator_expr();
  JetExpr result = dnum / den;
  if (!dden.is_zero()) result -= e.cleared() * dden / (den * den);
  return result;
}

// ------------------------------------------------------------------ misc

std::map<Monomial, JetExpr, MonomialLess> collect(const JetExpr& e,
                                                  const std::function<bool(const Atom&)>& keep) {
  std::map<Monomial, JetExpr, MonomialLess> out;
  JetExpr den = e.denominator_expr();
  for (const auto& [m, c] : e.numerator()) {
    Monomial key{{}, m.exponent};
    Monomial rest;
    for (const auto& f : m.factors) (keep(f.first) ? key : rest).factors.push_back(f);
    JetExpr value = monomial_expr(rest, c) / den;
    auto it = out.find(key);
    if (it == out.end())
      out.emplace(key, value);
    else
      it->second += value;
  }
  for (auto it = out.begin(); it != out.end();) {
    if (it->second.is_zero())
      it = out.erase(it);
    else
      ++it;
  }
  return out;
}

double eval(const LinearForm& l, const EvalEnv& env) {
  double s = 0.0;
  for (const auto& [v, c] : l.terms()) s += to_double(c) * env.var(v);
  return s;
}

namespace {

double eval_atom(const Atom& a, const EvalEnv& env) {
  switch (a.kind) {
    case AtomKind::Var: return env.var(a.var);
    case AtomKind::Sin: return std::sin(eval(a.arg, env));
    case AtomKind::Cos: return std::cos(eval(a.arg, env));
    case AtomKind::Opaque:
    case AtomKind::Sym:
      if (!env.other) throw JetError("no value supplied for atom " + a.name);
      return env.other(a);
  }
  return 0.0;
}

double eval_pp(const PowerProduct& pp, const EvalEnv& env) {
  double r = 1.0;
  for (const auto& [a, p] : pp) r *= std::pow(eval_atom(a, env), p);
  return r;
}

}  // namespace

double eval(const JetExpr& e, const EvalEnv& env) {
  double s = 0.0;
  for (const auto& [m, c] : e.numerator()) {
    double term = to_double(c) * eval_pp(m.factors, env);
    if (!m.exponent.empty()) term *= std::exp(eval(m.exponent, env));
    s += term;
  }
  return e.denominator().empty() ? s : s / eval_pp(e.denominator(), env);
}

}  // namespace psskit
