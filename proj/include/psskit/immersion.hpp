#pragma once

// Second fundamental form coefficients a, b, c of the local isometric
// immersions (closed forms and the ODE case), their Gauss/Codazzi residuals,
// and obstruction certificates for the families without immersions.

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "psskit/families.hpp"
#include "psskit/jet.hpp"

namespace psskit {

class ImmersionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SffCase { P35i, P35ii, P37i, P37ii, P37iii };
std::string to_string(SffCase c);
std::optional<SffCase> parse_sff_case(std::string_view text);

/// a, b, c and their first partials at one (x, t).
struct SffSample {
  double a = 0, b = 0, c = 0;
  double a_x = 0, a_t = 0, b_x = 0, b_t = 0, c_x = 0, c_t = 0;
};

/// Values and xi-derivatives of a, b, c along xi.
struct SffXi {
  double a, b, c, a_xi, b_xi, c_xi;
};

struct Interval {
  double lo, hi;
  bool contains(double v) const { return v > lo && v < hi; }
};

/// a, b, c as functions of xi = kx x + kt t on an open xi-interval.
class SecondFundamentalForm {
 public:
  SffCase case_id = SffCase::P35i;
  double alpha = 0, beta = 0;
  int sign = 1;
  double kx = 1, kt = 0;
  Interval xi_domain{0, 0};
  std::function<SffXi(double)> along;  // evaluator in xi

  double xi(double x, double t) const { return kx * x + kt * t; }
  bool in_domain(double x, double t) const { return xi_domain.contains(xi(x, t)); }
  /// Throws ImmersionError outside the domain.
  SffSample at(double x, double t) const;

  /// Constant coefficients (used for fixtures and rejection tests).
  static SecondFundamentalForm constant(double a, double b, double c);
};

struct ClosedFormScalars {
  double eta2 = 1;  // P35i, P37ii
  double C1 = 0;    // P37i, P37ii
  double mu2 = 0;
  int root = 1;  // sign of a = +-sqrt(L)
};

/// Closed-form coefficients for P35i, P37i, P37ii.
SecondFundamentalForm sff_closed_form(SffCase c, double alpha, double beta, const ClosedFormScalars& s, int sign);

struct Strip {
  Interval e_range;   // range of exp(+-2 xi) where L > 0
  Interval xi_range;  // same set in xi
  Interval coordinate_range;  // in x (P35i), t (P37i) or xi (P37ii)
  std::string coordinate;
  bool degenerate = false;  // beta = 0: half-line component
};

Strip strip_domain(SffCase c, double alpha, double beta, const ClosedFormScalars& s, int sign);

struct BOdeProblem {
  double mu2 = 1, eta2 = 1, C1 = 0, beta = 0;
  int sign = 1;
  double xi0 = 0, b0 = 2, xi_end = 1;
  double abs_tol = 1e-10, rel_tol = 1e-10;
  // Branch choices; unset means the family sign.
  std::optional<int> ode_sign, root_sign;
};

struct OdeNode {
  double xi, a, b, c, a_xi, b_xi, c_xi;
  double relation;  // a^2 + a Phi - b^2 + 1
  double codazzi1, codazzi2;
};

struct OdeSolution {
  SecondFundamentalForm sff;
  std::vector<OdeNode> nodes;
  bool completed = false;
  std::string stop_reason;  // empty when completed
  double initial_slope = 0;  // b'(xi0)
  double max_relation = 0;
  double max_codazzi = 0;
};

/// Delta and g of the b-equation, exposed for tests.
double ode_delta(const BOdeProblem& p, double xi, double b);
double ode_slope(const BOdeProblem& p, double xi, double b);

/// Integrates b' = g(xi, b) together with a from the Codazzi relation;
/// c = a + Phi. Cases P35ii (xi = eta2 x) and P37iii (xi = eta2 x + C1 t).
OdeSolution solve_b_ode(const BOdeProblem& problem, SffCase c);

struct BranchReport {
  int ode_sign, root_sign;
  bool completed;
  double max_relation, max_codazzi;
};
/// All sign combinations of the b-equation with their residuals.
std::vector<BranchReport> ode_branch_table(BOdeProblem problem, SffCase c);

/// max |ac - b^2 + 1| over the points (x, t).
double gauss_residual(const SecondFundamentalForm& sff, const std::vector<std::pair<double, double>>& points);

/// Jet values at one grid node; x and t locate the node.
struct JetSample {
  double x = 0, t = 0;
  double u[6] = {0, 0, 0, 0, 0, 0};
  double w1 = 0, v1 = 0;
};

struct CodazziResidual {
  double first, second;
};

/// Pointwise residuals of the two Codazzi equations with universal a, b, c.
CodazziResidual codazzi_residuals(const FamilyInstance& inst, const SffSample& s, const JetSample& jet,
                                  const std::function<double(const Atom&)>& other = {});

std::vector<CodazziResidual> codazzi_residuals(const FamilyInstance& inst, const SecondFundamentalForm& sff,
                                               const std::vector<JetSample>& jets,
                                               const std::function<double(const Atom&)>& other = {});

struct Certificate {
  FamilyKind kind;
  std::vector<Rational> values;       // T23: one value; T25ii: (eta3, mu2 eta3 - mu3 eta2)
  std::optional<JetExpr> expression;  // T25i
  Rational norm{0};                   // sum of squares of `values`
  bool confirmed = false;             // obstruction is nonzero
  std::string explanation;
};

Certificate nonexistence_certificate(const FamilyParams& params);

}  // namespace psskit
