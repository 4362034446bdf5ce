#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "psskit/immersion.hpp"
#include "psskit/sampling.hpp"
#include "support/random_expr.hpp"

using namespace psskit;
using psskit::testing::kPropertySeed;

namespace {

constexpr double kAlpha = 2.5, kBeta = 1.0;

struct ClosedCase {
  SffCase id;
  ClosedFormScalars scalars;
  FamilyKind family;
  double b_origin;
};

std::vector<ClosedCase> closed_cases() {
  ClosedFormScalars p35, p37i, p37ii;
  p37i.eta2 = 0;
  p37i.C1 = 1;
  p37ii.C1 = Rational(1, 2).get_d();
  return {{SffCase::P35i, p35, FamilyKind::T22, -1.0},
          {SffCase::P37i, p37i, FamilyKind::T24, 1.0},
          {SffCase::P37ii, p37ii, FamilyKind::T24, -1.0}};
}

FamilyInstance carrier(const ClosedCase& c, int sign) {
  FamilyParams p = default_params(c.family, sign);
  p.mu2 = 0;
  p.eta2 = Rational(c.scalars.eta2);
  p.C1 = Rational(c.scalars.C1);
  return build_family(p);
}

// Random in-strip points: xi uniform inside the strip, the other coordinate free.
std::vector<std::pair<double, double>> strip_points(const SecondFundamentalForm& sff, int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0), other(-3.0, 3.0);
  std::vector<std::pair<double, double>> pts;
  const Interval d = sff.xi_domain;
  for (int i = 0; i < n; ++i) {
    const double xi = d.lo + (d.hi - d.lo) * (0.001 + 0.998 * unit(rng));
    if (sff.kx != 0) {
      const double t = other(rng);
      pts.emplace_back((xi - sff.kt * t) / sff.kx, t);
    } else {
      pts.emplace_back(other(rng), xi / sff.kt);
    }
  }
  return pts;
}

std::vector<JetSample> random_jets(const std::vector<std::pair<double, double>>& pts, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1, 1);
  std::vector<JetSample> out;
  for (auto [x, t] : pts) {
    JetSample j;
    j.x = x;
    j.t = t;
    for (double& u : j.u) u = U(rng);
    j.w1 = U(rng);
    j.v1 = U(rng);
    out.push_back(j);
  }
  return out;
}

double max_abs(const std::vector<CodazziResidual>& r) {
  double m = 0;
  for (const auto& e : r) m = std::max({m, std::abs(e.first), std::abs(e.second)});
  return m;
}

}  // namespace

TEST(SffCase, Names) {
  EXPECT_EQ(parse_sff_case("p37iii"), SffCase::P37iii);
  EXPECT_EQ(parse_sff_case(to_string(SffCase::P35ii)), SffCase::P35ii);
  EXPECT_FALSE(parse_sff_case("P38"));
}

TEST(ClosedForm, OriginValues) {
  for (const auto& c : closed_cases()) {
    for (int sign : {1, -1}) {
      const SecondFundamentalForm sff = sff_closed_form(c.id, kAlpha, kBeta, c.scalars, sign);
      const SffSample s = sff.at(0, 0);
      EXPECT_NEAR(s.a, std::sqrt(0.5), 1e-12) << to_string(c.id);
      EXPECT_NEAR(s.b, c.b_origin, 1e-12) << to_string(c.id);
      EXPECT_NEAR(s.c, 0.0, 1e-12) << to_string(c.id);
    }
  }
}

TEST(ClosedForm, StripInExponentialCoordinates) {
  for (const auto& c : closed_cases()) {
    const Strip s = strip_domain(c.id, kAlpha, kBeta, c.scalars, 1);
    EXPECT_NEAR(s.e_range.lo, 0.5, 1e-14);
    EXPECT_NEAR(s.e_range.hi, 2.0, 1e-14);
    EXPECT_NEAR(s.xi_range.hi, 0.5 * std::log(2.0), 1e-14);
    EXPECT_FALSE(s.degenerate);
  }
  ClosedFormScalars fast;
  fast.eta2 = 2;
  const Strip s = strip_domain(SffCase::P35i, kAlpha, kBeta, fast, 1);
  EXPECT_EQ(s.coordinate, "x");
  EXPECT_NEAR(s.coordinate_range.hi, 0.25 * std::log(2.0), 1e-14);
  EXPECT_NEAR(s.coordinate_range.lo, -0.25 * std::log(2.0), 1e-14);
}

TEST(ClosedForm, DegenerateStripWhenBetaVanishes) {
  const Strip s = strip_domain(SffCase::P35i, kAlpha, 0.0, ClosedFormScalars{}, 1);
  EXPECT_TRUE(s.degenerate);
  EXPECT_NEAR(s.e_range.lo, 1 / kAlpha, 1e-15);
  EXPECT_TRUE(std::isinf(s.e_range.hi));
}

TEST(ClosedForm, RejectsInadmissibleConstants) {
  EXPECT_THROW(strip_domain(SffCase::P35i, -1.0, 0.1, ClosedFormScalars{}, 1), ImmersionError);
  EXPECT_THROW(strip_domain(SffCase::P35i, 2.0, 1.0, ClosedFormScalars{}, 1), ImmersionError);
  ClosedFormScalars no_time;
  no_time.eta2 = 0;
  EXPECT_THROW(sff_closed_form(SffCase::P37i, kAlpha, kBeta, no_time, 1), ImmersionError);
}

TEST(ClosedForm, EvaluationOutsideTheStripThrows) {
  const SecondFundamentalForm sff = sff_closed_form(SffCase::P35i, kAlpha, kBeta, ClosedFormScalars{}, 1);
  EXPECT_FALSE(sff.in_domain(1.0, 0.0));
  EXPECT_THROW(sff.at(1.0, 0.0), ImmersionError);
}

TEST(ClosedForm, GaussHoldsAcrossTheStrip) {
  std::mt19937_64 rng(kPropertySeed);
  for (const auto& c : closed_cases()) {
    for (int sign : {1, -1}) {
      for (int root : {1, -1}) {
        ClosedFormScalars sc = c.scalars;
        sc.root = root;
        const SecondFundamentalForm sff = sff_closed_form(c.id, kAlpha, kBeta, sc, sign);
        EXPECT_LE(gauss_residual(sff, strip_points(sff, 1000, rng)), 1e-12) << to_string(c.id);
      }
    }
  }
}

TEST(ClosedForm, CodazziHoldsForTheCarryingFamily) {
  std::mt19937_64 rng(kPropertySeed);
  for (const auto& c : closed_cases()) {
    for (int sign : {1, -1}) {
      const SecondFundamentalForm sff = sff_closed_form(c.id, kAlpha, kBeta, c.scalars, sign);
      const auto jets = random_jets(strip_points(sff, 200, rng), rng);
      EXPECT_LE(max_abs(codazzi_residuals(carrier(c, sign), sff, jets)), 1e-10)
          << to_string(c.id) << " sign " << sign;
    }
  }
}

TEST(ClosedForm, CodazziDetectsAPerturbedCoefficient) {
  const ClosedCase c = closed_cases()[0];
  SecondFundamentalForm sff = sff_closed_form(c.id, kAlpha, kBeta, c.scalars, 1);
  const auto base = sff.along;
  sff.along = [base](double xi) {
    SffXi v = base(xi);
    v.a *= 1.01;
    v.a_xi *= 1.01;
    return v;
  };
  std::mt19937_64 rng(kPropertySeed);
  const auto jets = random_jets(strip_points(sff, 50, rng), rng);
  EXPECT_GT(max_abs(codazzi_residuals(carrier(c, 1), sff, jets)), 1e-3);
}

TEST(ClosedForm, ConstantSffViolatingGaussIsVisible) {
  const auto sff = SecondFundamentalForm::constant(1, 0, 1);
  EXPECT_NEAR(gauss_residual(sff, {{0, 0}, {1, 1}}), 2.0, 1e-15);
}

TEST(OdeCase, InitialSlopeMatchesTheHandValue) {
  BOdeProblem p;
  EXPECT_NEAR(ode_delta(p, 0, 2), 12.0, 1e-12);
  const OdeSolution s = solve_b_ode(p, SffCase::P35ii);
  ASSERT_TRUE(s.completed) << s.stop_reason;
  EXPECT_NEAR(s.initial_slope, 2 * std::sqrt(6.0) / (2 + std::sqrt(3.0)), 1e-9);
  EXPECT_NEAR(s.nodes.back().xi, 1.0, 1e-12);
}

TEST(OdeCase, RelationHoldsToIntegratorTolerance) {
  BOdeProblem p;
  const OdeSolution s = solve_b_ode(p, SffCase::P35ii);
  ASSERT_TRUE(s.completed);
  EXPECT_LE(s.max_relation, 1e-8);
  EXPECT_LE(s.max_codazzi, 1e-6);
  // with c = a + Phi the relation is the Gauss equation
  for (const auto& n : s.nodes) EXPECT_NEAR(n.relation, n.a * n.c - n.b * n.b + 1, 1e-12);
}

TEST(OdeCase, TighterToleranceShrinksTheResidual) {
  BOdeProblem loose, tight;
  loose.abs_tol = loose.rel_tol = 1e-8;
  tight.abs_tol = tight.rel_tol = 1e-9;
  const OdeSolution a = solve_b_ode(loose, SffCase::P35ii), b = solve_b_ode(tight, SffCase::P35ii);
  ASSERT_TRUE(a.completed && b.completed);
  EXPECT_GE(a.max_relation / b.max_relation, 5.0);
}

TEST(OdeCase, OnlyTheMatchingBranchIsCompatible) {
  for (int sign : {1, -1}) {
    BOdeProblem p;
    p.sign = sign;
    int good = 0;
    for (const auto& r : ode_branch_table(p, SffCase::P35ii)) {
      // the lower branch meets a singular point of the b-equation early, so
      // completion is not required here
      const bool ok = r.max_relation <= 1e-8 && r.max_codazzi <= 1e-6;
      if (ok) {
        ++good;
        EXPECT_EQ(r.ode_sign, sign);
        EXPECT_EQ(r.root_sign, sign);
      }
    }
    EXPECT_EQ(good, 1) << "sign " << sign;
  }
}

TEST(OdeCase, StopsAtASingularPointOfTheEquation) {
  BOdeProblem p;
  p.sign = -1;
  const OdeSolution s = solve_b_ode(p, SffCase::P35ii);
  EXPECT_FALSE(s.completed);
  EXPECT_NE(s.stop_reason.find("vanishes"), std::string::npos) << s.stop_reason;
  ASSERT_FALSE(s.nodes.empty());
  EXPECT_LT(s.nodes.back().xi, 0.1);
  EXPECT_LE(s.max_relation, 1e-8);
}

TEST(OdeCase, TimeDependentPhase) {
  BOdeProblem p;
  p.mu2 = Rational(3, 4).get_d();
  p.C1 = 0.5;
  p.beta = 0.2;
  const OdeSolution s = solve_b_ode(p, SffCase::P37iii);
  ASSERT_TRUE(s.completed) << s.stop_reason;
  EXPECT_LE(s.max_relation, 1e-8);
  EXPECT_DOUBLE_EQ(s.sff.kt, 0.5);
  EXPECT_GT(s.sff.xi_domain.hi, 0.99);
}

TEST(OdeCase, RejectsNegativeDiscriminant) {
  BOdeProblem p;
  p.b0 = 0;
  p.beta = 0;
  EXPECT_LT(ode_delta(p, 0, 0), 0);
  EXPECT_THROW(solve_b_ode(p, SffCase::P35ii), ImmersionError);
}

TEST(OdeCase, ClosedCasesAreNotOdeCases) {
  EXPECT_THROW(solve_b_ode(BOdeProblem{}, SffCase::P35i), ImmersionError);
}

TEST(Certificates, EveryRandomAdmissibleInstanceIsObstructed) {
  Rng rng(kPropertySeed);
  for (FamilyKind kind : {FamilyKind::T23, FamilyKind::T25i, FamilyKind::T25ii}) {
    for (int i = 0; i < 100; ++i) {
      const Certificate c = nonexistence_certificate(random_admissible_params(kind, rng));
      ASSERT_TRUE(c.confirmed) << to_string(kind) << " case " << i << ": " << c.explanation;
    }
  }
}

TEST(Certificates, ValuesForTheDefaults) {
  const Certificate t23 = nonexistence_certificate(default_params(FamilyKind::T23));
  ASSERT_EQ(t23.values.size(), 1u);
  EXPECT_EQ(t23.values[0], Rational(1));
  const Certificate t25ii = nonexistence_certificate(default_params(FamilyKind::T25ii));
  ASSERT_EQ(t25ii.values.size(), 2u);
  EXPECT_EQ(t25ii.values[0], Rational(-1));
  EXPECT_EQ(t25ii.norm, t25ii.values[0] * t25ii.values[0] + t25ii.values[1] * t25ii.values[1]);
  const Certificate t25i = nonexistence_certificate(default_params(FamilyKind::T25i));
  ASSERT_TRUE(t25i.expression);
  EXPECT_FALSE(t25i.expression->is_zero());
  EXPECT_THROW(nonexistence_certificate(default_params(FamilyKind::T22)), ValidationError);
}
