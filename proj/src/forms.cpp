#include "psskit/forms.hpp"

#include <stdexcept>

namespace psskit {

OneForm& OneForm::operator+=(const OneForm& o) {
  cdx += o.cdx;
  cdt += o.cdt;
  return *this;
}

OneForm operator-(const OneForm& a, const OneForm& b) { return {a.cdx - b.cdx, a.cdt - b.cdt}; }

OneForm operator*(const JetExpr& h, const OneForm& w) { return {h * w.cdx, h * w.cdt}; }

TwoForm wedge(const OneForm& a, const OneForm& b) { return {a.cdx * b.cdt - a.cdt * b.cdx}; }

TwoForm exterior_d(const OneForm& w, const PdeSpec& pde) {
  return {total_dx(w.cdt, pde) - total_dt(w.cdx, pde)};
}

OneForm exterior_d(const JetExpr& h, const PdeSpec& pde) { return {total_dx(h, pde), total_dt(h, pde)}; }

StructureResiduals structure_residuals(const Frame& w, const PdeSpec& pde) {
  std::array<JetExpr, 3> raw = {
      (exterior_d(w[0], pde) - wedge(w[2], w[1])).c,
      (exterior_d(w[1], pde) - wedge(w[0], w[2])).c,
      (exterior_d(w[2], pde) - wedge(w[0], w[1])).c,
  };
  PowerProduct den;
  for (const auto& r : raw) den = lcm(den, r.denominator());
  StructureResiduals out;
  out.cleared_denominator = JetExpr::from_parts(Polynomial{{Monomial{den, {}}, Rational(1)}}, {});
  for (int i = 0; i < 3; ++i) out.residuals[i] = raw[i] * out.cleared_denominator;
  return out;
}

JetExpr independence_witness(const OneForm& w1, const OneForm& w2) { return wedge(w1, w2).c; }

JetExpr delta(int i, int j, const Frame& w) {
  if (i < 1 || i > 3 || j < 1 || j > 3) throw std::out_of_range("delta indices must lie in 1..3");
  const OneForm& a = w[i - 1];
  const OneForm& b = w[j - 1];
  return a.cdx * b.cdt - b.cdx * a.cdt;
}

FundamentalForms fundamental_forms(const Frame& w, const JetExpr& a, const JetExpr& b, const JetExpr& c) {
  const JetExpr& f11 = w[0].cdx;
  const JetExpr& f12 = w[0].cdt;
  const JetExpr& f21 = w[1].cdx;
  const JetExpr& f22 = w[1].cdt;
  FundamentalForms out;
  out.first = {f11 * f11 + f21 * f21, f11 * f12 + f21 * f22, f12 * f12 + f22 * f22};
  out.second = {
      a * f11 * f11 + JetExpr(2) * b * f11 * f21 + c * f21 * f21,
      a * f11 * f12 + b * (f11 * f22 + f21 * f12) + c * f21 * f22,
      a * f12 * f12 + JetExpr(2) * b * f12 * f22 + c * f22 * f22,
  };
  return out;
}

Symmetric<double> second_fundamental_form(const NumericCoefficients& f, double a, double b, double c) {
  return {
      a * f.f11 * f.f11 + 2 * b * f.f11 * f.f21 + c * f.f21 * f.f21,
      a * f.f11 * f.f12 + b * (f.f11 * f.f22 + f.f21 * f.f12) + c * f.f21 * f.f22,
      a * f.f12 * f.f12 + 2 * b * f.f12 * f.f22 + c * f.f22 * f.f22,
  };
}

Symmetric<double> first_fundamental_form(const NumericCoefficients& f) {
  return {f.f11 * f.f11 + f.f21 * f.f21, f.f11 * f.f12 + f.f21 * f.f22, f.f12 * f.f12 + f.f22 * f.f22};
}

}  // namespace psskit
