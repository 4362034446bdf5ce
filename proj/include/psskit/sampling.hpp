#pragma once

// Seeded generators of admissible family parameters, for sweeps.

#include <cstdint>
#include <random>

#include "psskit/families.hpp"

namespace psskit {

using Rng = std::mt19937_64;

/// p/q with |p| <= max_num, 1 <= q <= max_den.
Rational random_rational(Rng& rng, int max_num = 9, int max_den = 5, bool nonzero = false);

/// mu with sqrt(1 + mu^2) rational.
Rational random_pythagorean_slope(Rng& rng);

/// Parameters that pass validate() for `kind` (T23, T25i or T25ii; others
/// get random scalars on top of the default slots).
FamilyParams random_admissible_params(FamilyKind kind, Rng& rng);

}  // namespace psskit
