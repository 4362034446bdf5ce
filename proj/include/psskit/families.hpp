#pragma once

// The classified third-order families, the sine-Gordon fixture, the
// condition checker for the classification lemma, and the generalized
// Camassa-Holm matcher.

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "psskit/forms.hpp"
#include "psskit/jet.hpp"
#include "psskit/pde.hpp"

namespace psskit {

enum class FamilyKind { T22, T23, T24, T25i, T25ii, SG };

std::string to_string(FamilyKind kind);
/// Accepts "T22", "t22", "t25i", "sg", ...
std::optional<FamilyKind> parse_family_kind(std::string_view text);

/// Raised when parameters violate a family's hypotheses; names the invariant.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string invariant, const std::string& detail)
      : std::runtime_error(invariant + ": " + detail), invariant_(std::move(invariant)) {}
  const std::string& invariant() const { return invariant_; }

 private:
  std::string invariant_;
};

struct FamilyParams {
  FamilyKind kind = FamilyKind::T22;
  Rational mu2{0}, eta2{1};
  std::optional<Rational> mu3, eta3;  // implied by the family when unset
  Rational lambda{1}, C1{0}, C2{0};
  Rational theta{1}, nu{1}, sigma{0}, tau{1};
  int sign = 1;  // epsilon, picks the upper (+1) or lower (-1) branch
  // Function slots; nullopt means the opaque symbol (f, phi1, vphi).
  std::optional<JetExpr> f, phi1, vphi;
};

/// Smallest concrete instantiation of each kind (used by CI and the CLI
/// names "<kind>-default" and "<kind>-default-minus").
FamilyParams default_params(FamilyKind kind, int sign = 1);
std::optional<FamilyParams> named_family(std::string_view name);

/// Throws ValidationError when a hypothesis of the kind fails.
void validate(const FamilyParams& params);

struct FamilyInstance {
  FamilyParams params;
  PdeSpec pde;
  Frame forms;
  // Effective constants of f_p1 = mu_p f11 + eta_p (read off the forms).
  Rational mu2{0}, eta2{0}, mu3{0}, eta3{0};
  Rational gamma{0};
  std::optional<Rational> zeta;  // zeta_1 (T25i) or zeta_2 (T25ii)
  // phi_i = f_i2 + lambda u0^2 f_i1 and the lemma combinations.
  std::array<JetExpr, 3> phi;
  JetExpr L2, L3, M, N, Q;
  JetExpr f11_derivative;  // f' (1 for the affine T25 families)
};

FamilyInstance build_family(const FamilyParams& params);

/// Recomputes the derived quantities after forms were edited by hand.
void refresh_derived(FamilyInstance& inst);

/// Replaces one coefficient of one form (index 1..3, slot 'x' or 't').
FamilyInstance with_form_coefficient(const FamilyInstance& inst, int form, char slot, const JetExpr& value);

struct PssReport {
  StructureResiduals residuals;
  JetExpr witness;  // w1^w2 coefficient
  bool pass = false;
};

PssReport verify_pss(const FamilyInstance& inst);

struct LemmaCondition {
  std::string name;
  std::string description;
  bool pass = false;
  std::vector<JetExpr> residuals;
};

struct LemmaReport {
  std::vector<LemmaCondition> conditions;
  /// The scalar delta that zeroes the third compatibility condition, if any.
  std::optional<Rational> zeroing_delta;
  const LemmaCondition& at(std::string_view name) const;
  bool all_pass(const std::vector<std::string>& names) const;
};

/// Condition names, in order.
inline const std::vector<std::string>& lemma_condition_names() {
  static const std::vector<std::string> names = {
      "auxiliary_affine",   "jet_order",           "difference_argument", "t_coefficient_shape",
      "compatibility_1",    "compatibility_2",     "compatibility_3",     "nondegeneracy"};
  return names;
}

/// Evaluates the classification conditions on a third-order instance.
LemmaReport lemma21_check(const FamilyInstance& inst, const Rational& delta);

/// Which hypothesis pattern (Q, L2, gamma zero or not) an instance exhibits
/// and whether it is the one its kind requires.
struct KindSignature {
  bool q_zero, l2_zero, gamma_zero;
  bool matches;
};
KindSignature kind_signature(const FamilyInstance& inst);

/// Right-hand side F of u_{0,t} - u_{2,t} = F for the generalized
/// Camassa-Holm equation.
JetExpr camassa_holm_rhs();

struct MatchResult {
  std::optional<FamilyParams> params;
  JetExpr residual;  // zero on success, otherwise what could not be matched
  std::string message;
};

/// Searches the family `ansatz` (T22 or T24) for parameters whose equation
/// right-hand side equals `target_rhs` exactly. The ansatz takes f affine in
/// u0-u2, phi1 a polynomial of total degree <= 3 in (u0, u1), and mu2 = 0
/// (the equation depends on mu2 only through eta2/R and C1/R).
MatchResult match_generalized_ch(const JetExpr& target_rhs, FamilyKind ansatz = FamilyKind::T24);

}  // namespace psskit
