#include "psskit/sampling.hpp"

#include <utility>

namespace psskit {

namespace {

int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
int random_sign(Rng& rng) { return uniform(rng, 0, 1) ? 1 : -1; }

// (cos, sin) of a rational point on the unit circle, both signs random.
std::pair<Rational, Rational> random_angle(Rng& rng) {
  const int m = uniform(rng, 0, 6), n = uniform(rng, 0, 6);
  if (m == 0 && n == 0) return {Rational(random_sign(rng)), Rational(0)};
  const Rational d(m * m + n * n);
  Rational c = Rational(m * m - n * n) / d, s = Rational(2 * m * n) / d;
  c.canonicalize();
  s.canonicalize();
  return {Rational(random_sign(rng)) * c, Rational(random_sign(rng)) * s};
}

}  // namespace

Rational random_rational(Rng& rng, int max_num, int max_den, bool nonzero) {
  int p = 0;
  do p = uniform(rng, -max_num, max_num);
  while (nonzero && p == 0);
  Rational q(p, uniform(rng, 1, max_den));
  q.canonicalize();
  return q;
}

Rational random_pythagorean_slope(Rng& rng) {
  const int m = uniform(rng, 1, 6), n = uniform(rng, 1, 6);
  Rational mu(m * m - n * n, 2 * m * n);
  mu.canonicalize();
  return Rational(random_sign(rng)) * mu;
}

FamilyParams random_admissible_params(FamilyKind kind, Rng& rng) {
  for (;;) {
    FamilyParams p = default_params(kind, random_sign(rng));
    switch (kind) {
      case FamilyKind::T23:
      case FamilyKind::T25ii: {
        p.mu2 = random_rational(rng);
        p.eta2 = random_rational(rng, 9, 5, true);
        auto [c, s] = random_angle(rng);
        const Rational eta3 = p.eta2 * c;
        const Rational q = p.eta2 * s;  // mu2 eta3 - mu3 eta2
        p.eta3 = eta3;
        p.mu3 = (p.mu2 * eta3 - q) / p.eta2;
        const Rational gamma = p.mu2 * *p.mu3 * p.eta2 - (1 + p.mu2 * p.mu2) * eta3;
        if (gamma == 0) continue;
        if (kind == FamilyKind::T23) {
          p.lambda = random_rational(rng, 9, 5, true);
        } else {
          p.nu = random_rational(rng, 9, 5, true);
          const Rational r = p.nu * gamma / p.eta2;
          p.sign = r > 0 ? 1 : -1;
          p.tau = r * p.sign;
        }
        break;
      }
      case FamilyKind::T25i:
        p.mu2 = random_pythagorean_slope(rng);
        p.eta2 = random_rational(rng);
        p.theta = random_rational(rng, 9, 5, true);
        p.nu = random_rational(rng, 9, 5, true);
        p.sigma = random_rational(rng);
        p.lambda = random_rational(rng);
        p.C2 = random_rational(rng);
        p.eta3.reset();
        break;
      case FamilyKind::T22:
      case FamilyKind::T24:
        p.mu2 = random_pythagorean_slope(rng);
        p.eta2 = random_rational(rng, 9, 5, true);
        p.lambda = random_rational(rng, 9, 5, true);
        p.C1 = random_rational(rng);
        break;
      case FamilyKind::SG:
        p.eta2 = random_rational(rng, 9, 5, true);
        break;
    }
    try {
      validate(p);
      return p;
    } catch (const ValidationError&) {
    }
  }
}

}  // namespace psskit
