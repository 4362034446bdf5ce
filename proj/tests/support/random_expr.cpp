#include "random_expr.hpp"

#include "psskit/families.hpp"

namespace psskit::testing {

namespace {

int pick(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

LinearForm small_linear(std::mt19937_64& rng) {
  LinearForm l(JetVar::u(0), Rational(pick(rng, 1, 2)));
  if (pick(rng, 0, 1)) l += LinearForm(JetVar::u(1), Rational(pick(rng, -2, 2)));
  return l.empty() ? LinearForm(JetVar::u(0), Rational(1)) : l;
}

JetExpr random_atom(std::mt19937_64& rng, const ExprOptions& opt) {
  for (;;) {
    switch (pick(rng, 0, 9)) {
      case 0: return JetExpr::x();
      case 1: return JetExpr::t();
      case 2:
      case 3:
      case 4: return JetExpr::u(pick(rng, 0, 3));
      case 5:
        if (opt.time_jets) return JetExpr::variable(pick(rng, 0, 1) ? JetVar::w(1) : JetVar::v(1));
        break;
      case 6:
        if (opt.trig) return sin_of(small_linear(rng));
        break;
      case 7:
        if (opt.trig) return cos_of(small_linear(rng));
        break;
      case 8:
        if (opt.exponential) return JetExpr::exp(small_linear(rng));
        break;
      case 9:
        if (opt.opaque)
          return pick(rng, 0, 1) ? JetExpr::atom(Atom::opaque("f", OpaqueArg::U0MinusU2, {0}))
                                 : JetExpr::atom(Atom::opaque("vphi", OpaqueArg::U0, {0}));
        break;
    }
  }
}

}  // namespace

Rational random_coefficient(std::mt19937_64& rng) {
  int p = 0;
  while (p == 0) p = pick(rng, -7, 7);
  Rational q(p, pick(rng, 1, 4));
  q.canonicalize();
  return q;
}

JetExpr random_expr(std::mt19937_64& rng, const ExprOptions& opt) {
  JetExpr e;
  const int terms = pick(rng, 1, opt.max_terms);
  for (int k = 0; k < terms; ++k) {
    JetExpr m(random_coefficient(rng));
    const int deg = pick(rng, 0, opt.max_degree);
    for (int d = 0; d < deg; ++d) m *= random_atom(rng, opt);
    e += m;
  }
  if (pick(rng, 0, 4) == 0) e += JetExpr(random_coefficient(rng));
  if (opt.denominator && pick(rng, 0, 2) == 0) e /= pick(rng, 0, 1) ? JetExpr::u(1) : JetExpr::x() * JetExpr::u(1);
  return e;
}

PdeSpec camassa_holm_pde() {
  const JetExpr u0 = JetExpr::u(0);
  return PdeSpec::third_order(1, camassa_holm_rhs() - u0 * u0 * JetExpr::u(3));
}

}  // namespace psskit::testing
