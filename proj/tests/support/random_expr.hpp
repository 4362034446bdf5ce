#pragma once

// Seeded random jet expressions for the property suites.

#include <cstdint>
#include <random>

#include "psskit/jet.hpp"
#include "psskit/pde.hpp"

namespace psskit::testing {

inline constexpr std::uint64_t kPropertySeed = 20261019;

struct ExprOptions {
  int max_terms = 3;
  int max_degree = 2;
  bool trig = true;
  bool exponential = true;
  bool denominator = true;  // a monomial denominator in u1 or x
  bool time_jets = true;    // w1 and v1
  bool opaque = false;      // f(u0-u2), vphi(u0)
};

JetExpr random_expr(std::mt19937_64& rng, const ExprOptions& opt = {});
Rational random_coefficient(std::mt19937_64& rng);

/// u_{0,t} - u_{2,t} = u0^2 u3 + G for the Camassa-Holm right-hand side.
PdeSpec camassa_holm_pde();

}  // namespace psskit::testing
