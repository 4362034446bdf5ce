#pragma once

// Differential forms in the (x, t) plane with jet-expression coefficients.

#include <array>

#include "psskit/jet.hpp"
#include "psskit/pde.hpp"

namespace psskit {

/// cdx dx + cdt dt
struct OneForm {
  JetExpr cdx;
  JetExpr cdt;

  static OneForm dx() { return {JetExpr(1), JetExpr(0)}; }
  static OneForm dt() { return {JetExpr(0), JetExpr(1)}; }

  OneForm& operator+=(const OneForm& o);
  friend OneForm operator+(OneForm a, const OneForm& b) { return a += b; }
  friend OneForm operator-(const OneForm& a, const OneForm& b);
  friend OneForm operator*(const JetExpr& h, const OneForm& w);
  friend bool operator==(const OneForm& a, const OneForm& b) { return a.cdx == b.cdx && a.cdt == b.cdt; }
};

/// c dx^dt
struct TwoForm {
  JetExpr c;

  bool is_zero() const { return c.is_zero(); }
  friend TwoForm operator+(const TwoForm& a, const TwoForm& b) { return {a.c + b.c}; }
  friend TwoForm operator-(const TwoForm& a, const TwoForm& b) { return {a.c - b.c}; }
  friend bool operator==(const TwoForm& a, const TwoForm& b) { return a.c == b.c; }
};

using Frame = std::array<OneForm, 3>;

TwoForm wedge(const OneForm& a, const OneForm& b);

/// dw = (D_x cdt - D_t cdx) dx^dt, with D_t taken modulo the equation.
TwoForm exterior_d(const OneForm& w, const PdeSpec& pde);

/// dh = D_x h dx + D_t h dt
OneForm exterior_d(const JetExpr& h, const PdeSpec& pde);

struct StructureResiduals {
  /// dw1 - w3^w2, dw2 - w1^w3, dw3 - w1^w2, each multiplied by
  /// `cleared_denominator` so that they are polynomial.
  std::array<JetExpr, 3> residuals;
  JetExpr cleared_denominator;
  bool zero() const {
    return residuals[0].is_zero() && residuals[1].is_zero() && residuals[2].is_zero();
  }
};

StructureResiduals structure_residuals(const Frame& w, const PdeSpec& pde);

/// The dx^dt coefficient of w1^w2.
JetExpr independence_witness(const OneForm& w1, const OneForm& w2);

/// f_i1 f_j2 - f_j1 f_i2 for 1-based i, j.
JetExpr delta(int i, int j, const Frame& w);

/// Coefficients (dx^2, dxdt, dt^2) of a symmetric form written as
/// A dx^2 + 2 B dxdt + C dt^2.
template <typename T>
struct Symmetric {
  T dxdx;
  T dxdt;
  T dtdt;
};

struct FundamentalForms {
  Symmetric<JetExpr> first;
  Symmetric<JetExpr> second;
};

/// I = w1^2 + w2^2 and II from w13 = a w1 + b w2, w23 = b w1 + c w2.
FundamentalForms fundamental_forms(const Frame& w, const JetExpr& a, const JetExpr& b, const JetExpr& c);

/// Numeric counterpart with the f_ij already evaluated.
struct NumericCoefficients {
  double f11, f12, f21, f22;
};
Symmetric<double> second_fundamental_form(const NumericCoefficients& f, double a, double b, double c);
Symmetric<double> first_fundamental_form(const NumericCoefficients& f);

}  // namespace psskit
