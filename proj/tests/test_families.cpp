#include <gtest/gtest.h>

#include "psskit/families.hpp"
#include "psskit/parse.hpp"
#include "psskit/sampling.hpp"
#include "support/random_expr.hpp"

using namespace psskit;
using psskit::testing::kPropertySeed;

namespace {

const std::vector<FamilyKind> kThirdOrder = {FamilyKind::T22, FamilyKind::T23, FamilyKind::T24, FamilyKind::T25i,
                                             FamilyKind::T25ii};

// names of the conditions every classified family must satisfy
const std::vector<std::string> kRequired = {"auxiliary_affine", "jet_order",       "difference_argument",
                                            "t_coefficient_shape", "compatibility_1", "compatibility_2",
                                            "nondegeneracy"};

std::string describe(const PssReport& r) {
  std::string s;
  for (const auto& e : r.residuals.residuals) s += render(e) + " | ";
  return s + "witness " + render(r.witness);
}

}  // namespace

class DefaultFamily : public ::testing::TestWithParam<std::tuple<FamilyKind, int>> {};

TEST_P(DefaultFamily, StructureEquationsHoldExactly) {
  const auto [kind, sign] = GetParam();
  const FamilyInstance inst = build_family(default_params(kind, sign));
  const PssReport r = verify_pss(inst);
  EXPECT_TRUE(r.pass) << describe(r);
  EXPECT_TRUE(r.residuals.zero());
  EXPECT_FALSE(r.witness.is_zero());
}

TEST_P(DefaultFamily, ClassificationConditionsHold) {
  const auto [kind, sign] = GetParam();
  const FamilyInstance inst = build_family(default_params(kind, sign));
  const LemmaReport r = lemma21_check(inst, Rational(1));
  EXPECT_EQ(r.conditions.size(), lemma_condition_names().size());
  EXPECT_TRUE(r.all_pass(kRequired));
  EXPECT_TRUE(r.at("compatibility_3").pass);
  EXPECT_TRUE(kind_signature(inst).matches);
}

TEST_P(DefaultFamily, EverySingleFormMutationIsCaught) {
  const auto [kind, sign] = GetParam();
  const FamilyInstance inst = build_family(default_params(kind, sign));
  const JetExpr planted = JetExpr(Rational(1, 7)) * JetExpr::u(0) * JetExpr::u(1);
  for (int form = 1; form <= 3; ++form) {
    for (char slot : {'x', 't'}) {
      const OneForm& w = inst.forms[form - 1];
      const JetExpr old = slot == 'x' ? w.cdx : w.cdt;
      const PssReport r = verify_pss(with_form_coefficient(inst, form, slot, old + planted));
      EXPECT_FALSE(r.pass) << "form " << form << slot;
      EXPECT_FALSE(r.residuals.zero()) << "form " << form << slot;
    }
  }
}

TEST_P(DefaultFamily, OpaqueSlotsVerify) {
  const auto [kind, sign] = GetParam();
  FamilyParams p = default_params(kind, sign);
  p.f.reset();
  p.phi1.reset();
  p.vphi.reset();
  const FamilyInstance inst = build_family(p);
  const PssReport r = verify_pss(inst);
  EXPECT_TRUE(r.pass) << describe(r);
}

INSTANTIATE_TEST_SUITE_P(AllKinds, DefaultFamily,
                         ::testing::Combine(::testing::ValuesIn(kThirdOrder), ::testing::Values(1, -1)),
                         [](const auto& info) {
                           return to_string(std::get<0>(info.param)) +
                                  (std::get<1>(info.param) > 0 ? "_plus" : "_minus");
                         });

TEST(Families, NamesRoundTrip) {
  for (FamilyKind k : {FamilyKind::T22, FamilyKind::T23, FamilyKind::T24, FamilyKind::T25i, FamilyKind::T25ii,
                       FamilyKind::SG}) {
    EXPECT_EQ(parse_family_kind(to_string(k)), k);
  }
  EXPECT_EQ(parse_family_kind("t25ii"), FamilyKind::T25ii);
  EXPECT_FALSE(parse_family_kind("T26"));
  ASSERT_TRUE(named_family("t24-default-minus"));
  EXPECT_EQ(named_family("t24-default-minus")->sign, -1);
  EXPECT_FALSE(named_family("t24"));
}

TEST(Families, RandomAdmissibleInstancesVerify) {
  Rng rng(kPropertySeed);
  for (FamilyKind kind : {FamilyKind::T22, FamilyKind::T23, FamilyKind::T24, FamilyKind::T25ii}) {
    for (int i = 0; i < 20; ++i) {
      FamilyParams p = random_admissible_params(kind, rng);
      if (i % 2) {
        p.f.reset();
        p.phi1.reset();
        p.vphi.reset();
      }
      const PssReport r = verify_pss(build_family(p));
      ASSERT_TRUE(r.pass) << to_string(kind) << " case " << i << ": " << describe(r);
    }
  }
}

TEST(Families, T25iVerifiesOnTheClosingSlice) {
  Rng rng(kPropertySeed);
  for (int i = 0; i < 20; ++i) {
    FamilyParams p = random_admissible_params(FamilyKind::T25i, rng);
    p.eta2 = 0;
    p.theta = 1;
    const PssReport r = verify_pss(build_family(p));
    ASSERT_TRUE(r.pass) << "case " << i << ": " << describe(r);
  }
}

TEST(Families, ValidationNamesTheInvariant) {
  auto invariant_of = [](FamilyParams p) -> std::string {
    try {
      validate(p);
    } catch (const ValidationError& e) {
      return e.invariant();
    }
    return "";
  };
  FamilyParams p = default_params(FamilyKind::T22);
  p.eta2 = 0;
  EXPECT_EQ(invariant_of(p), "eta2_nonzero");
  p = default_params(FamilyKind::T22);
  p.mu2 = Rational(1, 2);
  EXPECT_EQ(invariant_of(p), "rational_root");
  p = default_params(FamilyKind::T23);
  p.eta3 = Rational(2);
  EXPECT_EQ(invariant_of(p), "eta_constraint");
  p = default_params(FamilyKind::T24);
  p.lambda = 0;
  p.C1 = 0;
  EXPECT_EQ(invariant_of(p), "lambda_eta2_C1");
  p = default_params(FamilyKind::T25i);
  p.nu = 0;
  EXPECT_EQ(invariant_of(p), "nu_theta_nonzero");
  p = default_params(FamilyKind::T25ii);
  p.tau = 0;
  EXPECT_EQ(invariant_of(p), "tau_positive");
  p = default_params(FamilyKind::T22);
  p.sign = 0;
  EXPECT_EQ(invariant_of(p), "sign");
  p = default_params(FamilyKind::T22);
  p.f = JetExpr::u(1);
  EXPECT_THROW(build_family(p), ValidationError);
}

TEST(Lemma, OnlyForThirdOrderFamilies) {
  const FamilyInstance sg = build_family(default_params(FamilyKind::SG));
  EXPECT_THROW(lemma21_check(sg, Rational(1)), ValidationError);
  EXPECT_THROW(kind_signature(sg), ValidationError);
}

TEST(Lemma, ZeroingDeltaIsReported) {
  const FamilyInstance inst = build_family(default_params(FamilyKind::T24));
  const LemmaReport r = lemma21_check(inst, Rational(5));
  ASSERT_TRUE(r.zeroing_delta);
  EXPECT_TRUE(lemma21_check(inst, *r.zeroing_delta).at("compatibility_3").pass);
}

TEST(Lemma, BrokenFormsFailTheShapeConditions) {
  const FamilyInstance inst = build_family(default_params(FamilyKind::T22));
  const FamilyInstance bad = with_form_coefficient(inst, 1, 'x', JetExpr::u(1));
  const LemmaReport r = lemma21_check(bad, Rational(1));
  EXPECT_FALSE(r.all_pass(kRequired));
}

TEST(CamassaHolm, MembershipByExactMatching) {
  const JetExpr target = camassa_holm_rhs();
  const MatchResult m = match_generalized_ch(target);
  ASSERT_TRUE(m.params) << m.message << ": " << render(m.residual);
  EXPECT_TRUE(m.residual.is_zero());
  const FamilyInstance inst = build_family(*m.params);
  EXPECT_EQ(inst.pde.f(), target);
  EXPECT_TRUE(verify_pss(inst).pass);
  EXPECT_EQ(m.params->mu2, Rational(0));
}

TEST(CamassaHolm, UnreachableTargetReportsResidual) {
  const MatchResult m = match_generalized_ch(parse_expr("u0^5*u1"));
  EXPECT_FALSE(m.params);
  EXPECT_FALSE(m.residual.is_zero()) << m.message;
  EXPECT_THROW(match_generalized_ch(camassa_holm_rhs(), FamilyKind::T23), ValidationError);
}
