#include "psskit/families.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <set>

namespace psskit {

namespace {

JetExpr K(const Rational& q) { return JetExpr(q); }
JetExpr U(int i) { return JetExpr::u(i); }

std::string str(const Rational& q) { return to_string(q); }

Rational root_of(const Rational& mu2) {
  auto r = exact_sqrt(Rational(1) + mu2 * mu2);
  if (!r)
    throw ValidationError("rational_root",
                          "sqrt(1+mu2^2) must be rational (e.g. mu2 = 0, 3/4, 4/3, 5/12); got mu2 = " + str(mu2));
  return *r;
}

// Concrete or opaque function slots and the derivatives the formulas need.
struct Slots {
  JetExpr f, fp;
  JetExpr phi1, phi1_u0, phi1_u1;
  JetExpr vphi, vphi1, vphi2;
};

Slots resolve_slots(const FamilyParams& p) {
  Slots s;
  s.f = p.f ? *p.f : JetExpr::atom(Atom::opaque("f", OpaqueArg::U0MinusU2, {0}));
  s.fp = diff_wrt(s.f, JetVar::u(0));
  s.phi1 = p.phi1 ? *p.phi1 : JetExpr::atom(Atom::opaque("phi1", OpaqueArg::U0U1, {0, 0}));
  s.phi1_u0 = diff_wrt(s.phi1, JetVar::u(0));
  s.phi1_u1 = diff_wrt(s.phi1, JetVar::u(1));
  s.vphi = p.vphi ? *p.vphi : JetExpr::atom(Atom::opaque("vphi", OpaqueArg::U0, {0}));
  s.vphi1 = diff_wrt(s.vphi, JetVar::u(0));
  s.vphi2 = diff_wrt(s.vphi1, JetVar::u(0));
  return s;
}

void require_vars(const JetExpr& e, std::initializer_list<JetVar> allowed, const std::string& slot) {
  for (JetVar v : e.variables()) {
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end())
      throw ValidationError(slot + "_arguments", slot + " may not depend on " + v.name());
  }
}

void check_slots(const FamilyParams& p) {
  if (p.f) {
    require_vars(*p.f, {JetVar::u(0), JetVar::u(2)}, "f");
    if (!(diff_wrt(*p.f, JetVar::u(0)) + diff_wrt(*p.f, JetVar::u(2))).is_zero())
      throw ValidationError("f_arguments", "f must be a function of u0-u2");
  }
  if (p.phi1) require_vars(*p.phi1, {JetVar::u(0), JetVar::u(1)}, "phi1");
  if (p.vphi) require_vars(*p.vphi, {JetVar::u(0)}, "vphi");
}

Rational gamma_of(const Rational& mu2, const Rational& mu3, const Rational& eta2, const Rational& eta3) {
  return mu2 * mu3 * eta2 - (Rational(1) + mu2 * mu2) * eta3;
}

Rational quadratic_constraint(const Rational& mu2, const Rational& mu3, const Rational& eta2, const Rational& eta3) {
  Rational p = mu2 * eta3 - mu3 * eta2;
  return eta2 * eta2 - eta3 * eta3 - p * p;
}

// Fills in implied mu3 / eta3 where the kind determines them.
FamilyParams with_implied_constants(FamilyParams p) {
  switch (p.kind) {
    case FamilyKind::T23:
      if (!p.mu3) p.mu3 = Rational(0);
      if (!p.eta3) p.eta3 = Rational(p.sign);
      break;
    case FamilyKind::T25i:
      if (!p.eta3 && p.nu != 0) {
        Rational r = root_of(p.mu2);
        p.eta3 = Rational(p.sign) * (p.theta + p.nu * p.mu2 * p.eta2) / (p.nu * r);
      }
      break;
    case FamilyKind::T25ii:
      // The branch with mu2 eta3 = mu3 eta2; consistent only when tau = nu.
      if (!p.eta3 && p.nu != 0) p.eta3 = -Rational(p.sign) * p.tau * p.eta2 / p.nu;
      if (!p.mu3 && p.eta2 != 0) p.mu3 = p.mu2 * *p.eta3 / p.eta2;
      break;
    default: break;
  }
  return p;
}

Rational zeta1(const FamilyParams& p) {
  Rational one_m = Rational(1) + p.mu2 * p.mu2;
  return Rational(2) * p.sigma / p.nu - Rational(1) / p.theta - p.theta / (p.nu * p.nu * one_m) -
         p.eta2 * (Rational(2) * p.theta * p.mu2 + p.nu * p.eta2) / (p.theta * p.nu * one_m);
}

Rational zeta2(const FamilyParams& p) {
  return p.sigma / p.nu - Rational(p.sign) * (*p.mu3 * p.eta2 - p.mu2 * *p.eta3) / p.tau;
}

// y = m * base + e with rational m, e.
std::optional<std::pair<Rational, Rational>> affine_in(const JetExpr& y, const JetExpr& base) {
  if (!y.denominator().empty() || !base.denominator().empty()) return std::nullopt;
  const Monomial* pick = nullptr;
  Rational bc;
  for (const auto& [m, c] : base.numerator()) {
    if (!m.is_unit()) {
      pick = &m;
      bc = c;
      break;
    }
  }
  if (!pick) return std::nullopt;
  Rational mu = 0;
  auto it = y.numerator().find(*pick);
  if (it != y.numerator().end()) mu = it->second / bc;
  JetExpr rest = y - K(mu) * base;
  if (!rest.is_constant()) return std::nullopt;
  return std::make_pair(mu, rest.constant_value());
}

}  // namespace

std::string to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::T22: return "T22";
    case FamilyKind::T23: return "T23";
    case FamilyKind::T24: return "T24";
    case FamilyKind::T25i: return "T25i";
    case FamilyKind::T25ii: return "T25ii";
    case FamilyKind::SG: return "SG";
  }
  return "?";
}

std::optional<FamilyKind> parse_family_kind(std::string_view text) {
  std::string lower;
  for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (FamilyKind k : {FamilyKind::T22, FamilyKind::T23, FamilyKind::T24, FamilyKind::T25i, FamilyKind::T25ii,
                       FamilyKind::SG}) {
    std::string name = to_string(k);
    for (char& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (name == lower) return k;
  }
  return std::nullopt;
}

FamilyParams default_params(FamilyKind kind, int sign) {
  FamilyParams p;
  p.kind = kind;
  p.sign = sign;
  const JetExpr identity = U(0) - U(2);
  switch (kind) {
    case FamilyKind::T22:
      p.f = identity;
      p.phi1 = U(1);
      break;
    case FamilyKind::T23:
      p.f = identity;
      p.mu3 = Rational(0);
      p.eta3 = Rational(sign);
      break;
    case FamilyKind::T24:
      p.f = identity;
      p.phi1 = U(0) * U(1) * U(1);
      break;
    case FamilyKind::T25i:
      p.eta2 = 0;
      break;
    case FamilyKind::T25ii:
      p.vphi = JetExpr(1);
      p.mu3 = Rational(0);
      p.eta3 = Rational(-sign);
      break;
    case FamilyKind::SG: break;
  }
  return p;
}

std::optional<FamilyParams> named_family(std::string_view name) {
  int sign = 1;
  std::string_view base = name;
  constexpr std::string_view minus = "-default-minus";
  constexpr std::string_view plus = "-default";
  if (base.size() > minus.size() && base.substr(base.size() - minus.size()) == minus) {
    sign = -1;
    base = base.substr(0, base.size() - minus.size());
  } else if (base.size() > plus.size() && base.substr(base.size() - plus.size()) == plus) {
    base = base.substr(0, base.size() - plus.size());
  } else {
    return std::nullopt;
  }
  auto kind = parse_family_kind(base);
  if (!kind) return std::nullopt;
  return default_params(*kind, sign);
}

void validate(const FamilyParams& raw) {
  if (raw.sign != 1 && raw.sign != -1) throw ValidationError("sign", "sign must be +1 or -1");
  check_slots(raw);
  FamilyParams p = with_implied_constants(raw);
  Slots s = resolve_slots(p);
  auto nonzero_slot = [](const JetExpr& e, const char* what) {
    if (e.is_zero()) throw ValidationError(std::string(what) + "_nonzero", std::string(what) + " vanishes identically");
  };
  switch (p.kind) {
    case FamilyKind::T22:
      root_of(p.mu2);
      if (p.eta2 == 0) throw ValidationError("eta2_nonzero", "eta2 = 0");
      nonzero_slot(s.phi1, "phi1");
      nonzero_slot(s.fp, "f_prime");
      break;
    case FamilyKind::T23: {
      if (p.lambda * p.eta2 == 0)
        throw ValidationError("lambda_eta2_nonzero", "lambda*eta2 = " + str(p.lambda * p.eta2));
      Rational c = quadratic_constraint(p.mu2, *p.mu3, p.eta2, *p.eta3);
      if (c != 0)
        throw ValidationError("eta_constraint", "eta2^2 - eta3^2 - (mu2 eta3 - mu3 eta2)^2 = " + str(c));
      if (gamma_of(p.mu2, *p.mu3, p.eta2, *p.eta3) == 0) throw ValidationError("gamma_nonzero", "gamma = 0");
      nonzero_slot(s.fp, "f_prime");
      break;
    }
    case FamilyKind::T24: {
      root_of(p.mu2);
      Rational v = p.lambda * p.eta2 * p.lambda * p.eta2 + p.C1 * p.C1;
      if (v == 0) throw ValidationError("lambda_eta2_C1", "(lambda eta2)^2 + C1^2 = 0");
      nonzero_slot(s.fp, "f_prime");
      break;
    }
    case FamilyKind::T25i:
      root_of(p.mu2);
      if (p.nu * p.theta == 0) throw ValidationError("nu_theta_nonzero", "nu*theta = 0");
      if (p.lambda * p.lambda + p.C2 * p.C2 == 0) throw ValidationError("lambda_C2", "lambda^2 + C2^2 = 0");
      break;
    case FamilyKind::T25ii: {
      if (p.tau <= 0) throw ValidationError("tau_positive", "tau = " + str(p.tau));
      if (p.nu * p.eta2 == 0) throw ValidationError("nu_eta2_nonzero", "nu*eta2 = 0");
      nonzero_slot(s.vphi, "vphi");
      Rational c = quadratic_constraint(p.mu2, *p.mu3, p.eta2, *p.eta3);
      if (c != 0)
        throw ValidationError("eta_constraint", "eta2^2 - eta3^2 - (mu2 eta3 - mu3 eta2)^2 = " + str(c));
      Rational g = gamma_of(p.mu2, *p.mu3, p.eta2, *p.eta3);
      Rational want = Rational(p.sign) * p.tau * p.eta2 / p.nu;
      if (g != want)
        throw ValidationError("gamma_tau", "gamma = " + str(g) + " but the connection form requires " + str(want));
      break;
    }
    case FamilyKind::SG:
      if (p.eta2 == 0) throw ValidationError("eta_nonzero", "eta = 0");
      break;
  }
}

FamilyInstance build_family(const FamilyParams& raw) {
  validate(raw);
  FamilyParams p = with_implied_constants(raw);
  Slots s = resolve_slots(p);
  const JetExpr eps = K(p.sign);
  const JetExpr u0 = U(0), u1 = U(1), u2 = U(2);
  const JetExpr u0sq = u0 * u0;
  FamilyInstance inst;
  inst.params = p;
  Frame& w = inst.forms;

  switch (p.kind) {
    case FamilyKind::T22: {
      Rational r = root_of(p.mu2);
      JetExpr g = (s.phi1_u0 * u1 + s.phi1_u1 * u2 + eps * K(p.eta2 / r) * s.phi1) / s.fp;
      inst.pde = PdeSpec::third_order(0, g);
      w[0] = {s.f, s.phi1};
      w[1] = {K(p.mu2) * s.f + K(p.eta2), K(p.mu2) * s.phi1};
      w[2] = {eps * (K(r) * s.f + K(p.mu2 * p.eta2 / r)), eps * K(r) * s.phi1};
      break;
    }
    case FamilyKind::T23: {
      Rational gam = gamma_of(p.mu2, *p.mu3, p.eta2, *p.eta3);
      JetExpr lam = K(p.lambda);
      JetExpr bracket = K(2) * u0 * u1 * s.f + u0sq * u1 * s.fp +
                        K(Rational(2) * p.eta2 / gam) *
                            (u1 * u1 + u0 * u2 + K(*p.mu3 * p.eta2 - p.mu2 * *p.eta3) * u0 * u1);
      inst.pde = PdeSpec::third_order(p.lambda, -lam * bracket / s.fp);
      JetExpr f21 = K(p.mu2) * s.f + K(p.eta2);
      JetExpr f31 = K(*p.mu3) * s.f + K(*p.eta3);
      JetExpr two_over = K(Rational(2) / gam);
      w[0] = {s.f, -lam * (u0sq * s.f + two_over * K(p.eta2) * u0 * u1)};
      w[1] = {f21, -lam * (u0sq * f21 + two_over * K(p.mu2 * p.eta2) * u0 * u1)};
      w[2] = {f31, -lam * (u0sq * f31 + two_over * K(*p.mu3 * p.eta2) * u0 * u1)};
      break;
    }
    case FamilyKind::T24: {
      Rational r = root_of(p.mu2);
      JetExpr lam = K(p.lambda);
      JetExpr bracket = u1 * s.phi1_u0 + u2 * s.phi1_u1 - lam * u0sq * u1 * s.fp + eps * K(p.eta2 / r) * s.phi1 -
                        (K(2) * lam * u0 * u1 + eps * K(p.eta2 / r) * lam * u0sq + eps * K(p.C1 / r)) * s.f;
      inst.pde = PdeSpec::third_order(p.lambda, bracket / s.fp);
      w[0] = {s.f, -(lam * u0sq * s.f - s.phi1)};
      w[1] = {K(p.mu2) * s.f + K(p.eta2), -(lam * K(p.mu2) * u0sq * s.f - K(p.mu2) * s.phi1 - K(p.C1))};
      w[2] = {eps * (K(r) * s.f + K(p.mu2 * p.eta2 / r)),
              -eps * K(r) * (lam * u0sq * s.f - s.phi1 - K(p.mu2 * p.C1 / (Rational(1) + p.mu2 * p.mu2)))};
      break;
    }
    case FamilyKind::T25i: {
      Rational r = root_of(p.mu2);
      Rational z1 = zeta1(p);
      inst.zeta = z1;
      JetExpr lam = K(p.lambda);
      JetExpr e = JetExpr::exp(LinearForm(JetVar::u(0), p.theta));
      JetExpr kfac = K(Rational(2) * p.lambda / p.theta) - K(p.theta * p.C2) * e + K(2) * lam * u0;
      JetExpr g = lam * (K(-5) * u0sq * u1 + K(4) * u0 * u1 * u2 + K(Rational(2) * z1 - Rational(4) / p.theta) * u0 * u1 -
                         K(Rational(2) / p.theta) * u1 * u2 + K(Rational(2) * z1 / p.theta) * u1) +
                  (K(p.theta) * u1 * u1 * u1 + K(2) * u0 * u1 + u1 * u2 - K(z1) * u1) * K(p.theta * p.C2) * e;
      inst.pde = PdeSpec::third_order(p.lambda, g);
      JetExpr f11 = K(p.nu) * (u0 - u2) - K(p.sigma);
      JetExpr f12 = -(lam * u0sq * f11 + K(p.nu / p.theta) * (K(2) * lam - K(p.theta * p.theta * p.C2) * e) * u1 * u1 +
                      kfac * ((K(p.nu) * u0 - K(p.sigma)) / K(p.theta) +
                              eps * K((p.mu2 - p.nu * p.eta2 / p.theta) / r) * u1));
      JetExpr f21 = K(p.mu2) * f11 + K(p.eta2);
      JetExpr f22 = K(p.mu2) * f12 - lam * K(p.eta2) * u0sq + kfac * (eps * K(r) * u1 - K(p.eta2 / p.theta));
      JetExpr f31 = eps * K(r) * f11 + K(*p.eta3);
      JetExpr f32 = eps * K(r) * f12 - lam * K(*p.eta3) * u0sq + kfac * (K(p.mu2) * u1 - K(*p.eta3));
      w[0] = {f11, f12};
      w[1] = {f21, f22};
      w[2] = {f31, f32};
      break;
    }
    case FamilyKind::T25ii: {
      Rational z2 = zeta2(p);
      inst.zeta = z2;
      JetExpr lam = K(p.lambda);
      JetExpr tau = K(p.tau);
      JetExpr e = JetExpr::exp(LinearForm(JetVar::u(1), Rational(p.sign) * p.tau));
      JetExpr g = lam * (K(-3) * u0sq * u1 + K(2) * u0 * u1 * u2 + K(Rational(2) * z2) * u0 * u1 -
                         eps * K(Rational(2) / p.tau) * (u1 * u1 + u0 * u2)) +
                  tau * (tau * u0 * u2 + eps * u1 - K(z2) * tau * u2) * s.vphi * e + s.vphi2 * u1 * u1 * e +
                  eps * (tau * u0 * u1 + tau * u1 * u2 + eps * u2 - K(z2) * tau * u1) * s.vphi1 * e;
      inst.pde = PdeSpec::third_order(p.lambda, g);
      JetExpr f11 = K(p.nu) * (u0 - u2) - K(p.sigma);
      JetExpr f12 = -(lam * u0sq * f11 - (eps * tau * (K(p.nu) * u0 - K(p.sigma)) * s.vphi + K(p.nu) * s.vphi1 * u1) * e +
                      eps * K(Rational(2) * p.lambda * p.nu / p.tau) * u0 * u1);
      JetExpr f21 = K(p.mu2) * f11 + K(p.eta2);
      JetExpr f22 = K(p.mu2) * f12 - lam * K(p.eta2) * u0sq + eps * tau * K(p.eta2) * s.vphi * e;
      Rational k = p.sigma / p.nu - z2;
      Rational one_m = Rational(1) + p.mu2 * p.mu2;
      JetExpr f31 = eps * tau * (K(k) * (K(one_m / p.eta2) * f11 + K(p.mu2)) - f21 / K(p.nu));
      JetExpr f32 = eps * tau *
                    (K(k) * (K(one_m / p.eta2) * f12 - K(p.mu2) * (lam * u0sq - eps * tau * s.vphi * e)) - f22 / K(p.nu));
      w[0] = {f11, f12};
      w[1] = {f21, f22};
      w[2] = {f31, f32};
      break;
    }
    case FamilyKind::SG: {
      JetExpr eta = K(p.eta2);
      LinearForm arg(JetVar::u(0), 1);
      inst.pde = PdeSpec::mixed(sin_of(arg));
      w[0] = {JetExpr(0), sin_of(arg) / eta};
      w[1] = {eta, cos_of(arg) / eta};
      w[2] = {u1, JetExpr(0)};
      break;
    }
  }
  refresh_derived(inst);
  return inst;
}

void refresh_derived(FamilyInstance& inst) {
  if (inst.params.kind == FamilyKind::SG) return;
  const Frame& w = inst.forms;
  const JetExpr& f11 = w[0].cdx;
  auto p2 = affine_in(w[1].cdx, f11).value_or(std::make_pair(Rational(0), Rational(0)));
  auto p3 = affine_in(w[2].cdx, f11).value_or(std::make_pair(Rational(0), Rational(0)));
  inst.mu2 = p2.first;
  inst.eta2 = p2.second;
  inst.mu3 = p3.first;
  inst.eta3 = p3.second;
  inst.gamma = gamma_of(inst.mu2, inst.mu3, inst.eta2, inst.eta3);
  JetExpr lu0sq = K(inst.pde.lambda()) * U(0) * U(0);
  for (int i = 0; i < 3; ++i) inst.phi[i] = w[i].cdt + lu0sq * w[i].cdx;
  const auto& phi = inst.phi;
  inst.L2 = phi[1] - K(inst.mu2) * phi[0];
  inst.L3 = phi[2] - K(inst.mu3) * phi[0];
  inst.M = K(inst.mu2) * phi[2] - K(inst.mu3) * phi[1];
  inst.N = K(inst.eta2) * phi[2] - K(inst.eta3) * phi[1];
  inst.Q = -(inst.L3 + K(inst.mu2) * inst.M);
  inst.f11_derivative = diff_wrt(f11, JetVar::u(0));
}

FamilyInstance with_form_coefficient(const FamilyInstance& inst, int form, char slot, const JetExpr& value) {
  if (form < 1 || form > 3 || (slot != 'x' && slot != 't'))
    throw std::out_of_range("form index must be 1..3 and slot 'x' or 't'");
  FamilyInstance out = inst;
  (slot == 'x' ? out.forms[form - 1].cdx : out.forms[form - 1].cdt) = value;
  refresh_derived(out);
  return out;
}

PssReport verify_pss(const FamilyInstance& inst) {
  PssReport r;
  r.residuals = structure_residuals(inst.forms, inst.pde);
  r.witness = independence_witness(inst.forms[0], inst.forms[1]);
  r.pass = r.residuals.zero() && !r.witness.is_zero();
  return r;
}

const LemmaCondition& LemmaReport::at(std::string_view name) const {
  for (const auto& c : conditions)
    if (c.name == name) return c;
  throw std::out_of_range("no condition named " + std::string(name));
}

bool LemmaReport::all_pass(const std::vector<std::string>& names) const {
  return std::all_of(names.begin(), names.end(), [&](const std::string& n) { return at(n).pass; });
}

namespace {

LemmaCondition condition(std::string name, std::string description, std::vector<JetExpr> values) {
  LemmaCondition c;
  c.name = std::move(name);
  c.description = std::move(description);
  for (auto& v : values)
    if (!v.is_zero()) c.residuals.push_back(std::move(v));
  c.pass = c.residuals.empty();
  return c;
}

// Brings a and b over a shared denominator and returns the numerators.
std::pair<JetExpr, JetExpr> common_numerators(const JetExpr& a, const JetExpr& b) {
  PowerProduct den = lcm(a.denominator(), b.denominator());
  JetExpr d = JetExpr::from_parts(Polynomial{{Monomial{den, {}}, Rational(1)}}, {});
  return {a * d, b * d};
}

}  // namespace

LemmaReport lemma21_check(const FamilyInstance& inst, const Rational& delta) {
  if (inst.pde.mode() != PdeSpec::Mode::ThirdOrder)
    throw ValidationError("third_order", "the classification conditions apply to third-order families only");
  const Frame& w = inst.forms;
  const JetExpr& f11 = w[0].cdx;
  const JetExpr u0 = U(0), u1 = U(1), u2 = U(2);
  const JetExpr lam = K(inst.pde.lambda());
  const JetExpr& G = inst.pde.g();
  const int top = inst.pde.max_order();
  auto d = [](const JetExpr& e, int i) { return diff_wrt(e, JetVar::u(i)); };

  LemmaReport rep;
  {
    std::vector<JetExpr> v;
    v.push_back(w[1].cdx - K(inst.mu2) * f11 - K(inst.eta2));
    v.push_back(w[2].cdx - K(inst.mu3) * f11 - K(inst.eta3));
    rep.conditions.push_back(condition("auxiliary_affine", "f_p1 = mu_p f11 + eta_p for p = 2, 3", std::move(v)));
  }
  {
    std::vector<JetExpr> v;
    for (const auto& form : w) {
      v.push_back(d(form.cdx, 1));
      for (int k = 3; k <= top; ++k) {
        v.push_back(d(form.cdx, k));
        v.push_back(d(form.cdt, k));
      }
    }
    rep.conditions.push_back(
        condition("jet_order", "f_i1 free of u1; f_i1, f_i2 free of u_k for k >= 3", std::move(v)));
  }
  {
    std::vector<JetExpr> v;
    for (const auto& form : w) v.push_back(d(form.cdx, 0) + d(form.cdx, 2));
    rep.conditions.push_back(condition("difference_argument", "f_i1,u0 + f_i1,u2 = 0", std::move(v)));
  }
  {
    std::vector<JetExpr> v;
    for (const auto& phi : inst.phi) {
      for (JetVar var : phi.variables()) {
        if (var == JetVar::u(0) || var == JetVar::u(1)) continue;
        v.push_back(diff_wrt(phi, var));
      }
    }
    rep.conditions.push_back(condition(
        "t_coefficient_shape", "f_i2 = -lambda u0^2 f_i1 + phi_i with phi_i = phi_i(u0, u1)", std::move(v)));
  }
  const JetExpr& phi1 = inst.phi[0];
  const JetExpr f11_u0 = d(f11, 0);
  {
    JetExpr r = -G * f11_u0 + (K(-2) * lam * u0 * f11 - lam * u0 * u0 * f11_u0 + d(phi1, 0)) * u1 + d(phi1, 1) * u2 +
                inst.M * f11 + inst.N;
    rep.conditions.push_back(condition("compatibility_1",
                                       "-G f11,u0 + (-2 lambda u0 f11 - lambda u0^2 f11,u0 + phi1,u0) u1 + "
                                       "phi1,u1 u2 + M f11 + N = 0",
                                       {r}));
  }
  {
    JetExpr r = inst.Q * f11 + d(inst.L2, 0) * u1 + d(inst.L2, 1) * u2 - K(2) * lam * K(inst.eta2) * u0 * u1 -
                K(inst.mu2) * inst.N + K(inst.eta3) * phi1;
    rep.conditions.push_back(condition(
        "compatibility_2", "Q f11 + L2,u0 u1 + L2,u1 u2 - 2 lambda eta2 u0 u1 - mu2 N + eta3 phi1 = 0", {r}));
  }
  JetExpr witness = -inst.L2 * f11 + K(inst.eta2) * phi1;
  {
    // affine in delta: a + delta * witness
    JetExpr a = -K(inst.mu3) * inst.M * f11 + d(inst.L3, 0) * u1 + d(inst.L3, 1) * u2 -
                K(2) * lam * K(inst.eta3) * u0 * u1 - K(inst.mu3) * inst.N;
    JetExpr r = a + K(delta) * witness;
    rep.conditions.push_back(condition("compatibility_3",
                                       "-(delta L2 + mu3 M) f11 + L3,u0 u1 + L3,u1 u2 - 2 lambda eta3 u0 u1 - "
                                       "mu3 N + delta eta2 phi1 = 0",
                                       {r}));
    if (a.is_zero()) {
      rep.zeroing_delta = Rational(0);
    } else if (!witness.is_zero()) {
      auto [na, nw] = common_numerators(a, witness);
      const auto& [m, cw] = *nw.numerator().begin();
      auto it = na.numerator().find(m);
      if (it != na.numerator().end()) {
        Rational cand = -it->second / cw;
        if ((a + K(cand) * witness).is_zero()) rep.zeroing_delta = cand;
      }
    }
  }
  {
    LemmaCondition c;
    c.name = "nondegeneracy";
    c.description = "-L2 f11 + eta2 phi1 is not identically zero";
    c.pass = !witness.is_zero();
    c.residuals.push_back(witness);
    rep.conditions.push_back(std::move(c));
  }
  return rep;
}

KindSignature kind_signature(const FamilyInstance& inst) {
  if (inst.params.kind == FamilyKind::SG)
    throw ValidationError("third_order", "the sine-Gordon fixture has no classification signature");
  KindSignature s{inst.Q.is_zero(), inst.L2.is_zero(), inst.gamma == 0, false};
  switch (inst.params.kind) {
    case FamilyKind::T22: s.matches = s.q_zero && s.l2_zero && s.gamma_zero; break;
    case FamilyKind::T23: s.matches = s.q_zero && s.l2_zero && !s.gamma_zero; break;
    case FamilyKind::T24: s.matches = s.q_zero && !s.l2_zero && s.gamma_zero; break;
    case FamilyKind::T25i:
    case FamilyKind::T25ii: s.matches = !s.q_zero && !s.l2_zero && !s.gamma_zero; break;
    case FamilyKind::SG: break;
  }
  return s;
}

JetExpr camassa_holm_rhs() {
  const JetExpr u0 = U(0), u1 = U(1), u2 = U(2), u3 = U(3);
  return u0 * u0 * u3 - u0 * u0 * u2 - K(3) * u0 * u1 * u1 - K(2) * u0 * u0 * u1 + K(4) * u0 * u1 * u2 + u1 * u1 * u1;
}

// ------------------------------------------------------------ CH matcher

namespace {

using SymValues = std::map<std::string, Rational>;

bool is_sym(const Atom& a) { return a.kind == AtomKind::Sym; }

int sym_degree(const Monomial& m) {
  int d = 0;
  for (const auto& [a, p] : m.factors) d += p;
  return d;
}

// Column order for elimination: higher degree first, constant last.
struct ColumnLess {
  bool operator()(const Monomial& a, const Monomial& b) const {
    int da = sym_degree(a), db = sym_degree(b);
    if (da != db) return da > db;
    return compare(a, b) < 0;
  }
};

// Each equation is a polynomial in the unknowns; returns RREF rows.
std::vector<std::vector<Rational>> rref(std::vector<std::vector<Rational>> rows, std::size_t cols) {
  std::size_t lead = 0;
  for (std::size_t r = 0; r < rows.size() && lead < cols; ++lead) {
    std::size_t i = r;
    while (i < rows.size() && rows[i][lead] == 0) ++i;
    if (i == rows.size()) continue;
    std::swap(rows[i], rows[r]);
    Rational piv = rows[r][lead];
    for (auto& v : rows[r]) v /= piv;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (k == r || rows[k][lead] == 0) continue;
      Rational f = rows[k][lead];
      for (std::size_t c = 0; c < cols; ++c) rows[k][c] -= f * rows[r][c];
    }
    ++r;
  }
  return rows;
}

struct SolveOutcome {
  bool ok = false;
  SymValues values;
  JetExpr residual;
};

JetExpr substitute_all(JetExpr e, const SymValues& vals) {
  for (const auto& [name, v] : vals) e = e.substitute(Atom::symbol(name), JetExpr(v));
  return e;
}

// Solves residual == 0 coefficient-wise in the jet monomials for the
// unknown symbols, pinning forced values and otherwise branching on 0, 1.
SolveOutcome solve_coefficients(const JetExpr& residual, const std::vector<std::string>& order, SymValues fixed,
                                int depth = 0) {
  JetExpr res = substitute_all(residual, fixed).cleared();
  for (;;) {
    if (res.is_zero()) {
      for (const auto& n : order)
        if (!fixed.count(n)) fixed[n] = 0;
      return {true, fixed, res};
    }
    auto eqs = collect(res, [](const Atom& a) { return !is_sym(a); });
    std::map<Monomial, std::size_t, ColumnLess> columns;
    std::vector<Polynomial> polys;
    for (const auto& [jet, coeff] : eqs) {
      polys.push_back(coeff.cleared().numerator());
      for (const auto& [m, c] : polys.back()) columns.emplace(m, 0);
    }
    std::vector<Monomial> col_list;
    for (auto& [m, idx] : columns) {
      idx = col_list.size();
      col_list.push_back(m);
    }
    std::vector<std::vector<Rational>> rows;
    for (const auto& p : polys) {
      std::vector<Rational> row(col_list.size(), Rational(0));
      for (const auto& [m, c] : p) row[columns.at(m)] = c;
      rows.push_back(std::move(row));
    }
    rows = rref(std::move(rows), col_list.size());
    SymValues pinned;
    for (const auto& row : rows) {
      std::vector<std::size_t> nz;
      Rational constant = 0;
      for (std::size_t c = 0; c < col_list.size(); ++c) {
        if (row[c] == 0) continue;
        if (col_list[c].is_unit())
          constant = row[c];
        else
          nz.push_back(c);
      }
      if (nz.empty() && constant != 0) return {false, fixed, res};
      if (nz.size() == 1) {
        const Monomial& m = col_list[nz[0]];
        if (m.factors.size() == 1 && m.factors[0].second == 1)
          pinned.emplace(m.factors[0].first.name, -constant / row[nz[0]]);
      }
    }
    if (pinned.empty()) break;
    for (const auto& [n, v] : pinned) fixed[n] = v;
    res = substitute_all(res, pinned).cleared();
  }
  // Stuck: branch on the first unknown still present.
  std::set<std::string> present = res.symbols();
  for (const auto& name : order) {
    if (!present.count(name)) continue;
    if (depth > 32) break;
    for (int trial : {0, 1}) {
      SymValues next = fixed;
      next[name] = trial;
      SolveOutcome o = solve_coefficients(residual, order, next, depth + 1);
      if (o.ok) return o;
    }
    break;
  }
  return {false, fixed, res};
}

}  // namespace

MatchResult match_generalized_ch(const JetExpr& target_rhs, FamilyKind ansatz) {
  if (ansatz != FamilyKind::T22 && ansatz != FamilyKind::T24)
    throw ValidationError("ansatz", "the matcher searches the T22 or T24 families");
  const JetExpr u0 = U(0), u1 = U(1), u2 = U(2), u3 = U(3);
  const std::vector<JetExpr> basis = {JetExpr(1), u0,       u1,           u0 * u0,      u0 * u1,
                                      u1 * u1,    u0 * u0 * u0, u0 * u0 * u1, u0 * u1 * u1, u1 * u1 * u1};
  std::vector<std::string> order = {"q", "c"};
  JetExpr phi;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    std::string n = "a" + std::to_string(i);
    order.push_back(n);
    phi += JetExpr::symbol(n) * basis[i];
  }
  order.push_back("k");
  JetExpr k = JetExpr::symbol("k");
  JetExpr phi_u0 = diff_wrt(phi, JetVar::u(0));
  JetExpr phi_u1 = diff_wrt(phi, JetVar::u(1));
  JetExpr residual;
  if (ansatz == FamilyKind::T22) {
    // f' = 1 after scaling; lambda = 0.
    residual = target_rhs - (u1 * phi_u0 + u2 * phi_u1 + k * phi);
  } else {
    order.push_back("lambda");
    JetExpr lam = JetExpr::symbol("lambda");
    JetExpr c = JetExpr::symbol("c");
    JetExpr f = u0 - u2 + JetExpr::symbol("q");
    JetExpr rhs = u1 * phi_u0 + u2 * phi_u1 - lam * u0 * u0 * u1 + k * phi -
                  (K(2) * lam * u0 * u1 + k * lam * u0 * u0 + c) * f;
    residual = target_rhs - lam * u0 * u0 * u3 - rhs;
  }

  MatchResult result;
  SolveOutcome sol = solve_coefficients(residual, order, {});
  result.residual = sol.residual;
  if (!sol.ok) {
    result.message = "no parameters in the ansatz reproduce the target";
    return result;
  }
  const auto& v = sol.values;
  JetExpr phi_value = substitute_all(phi, v);
  for (int sign : {1, -1}) {
    FamilyParams p = default_params(ansatz, sign);
    p.mu2 = 0;
    p.eta2 = Rational(sign) * v.at("k");
    p.phi1 = phi_value;
    if (ansatz == FamilyKind::T24) {
      p.lambda = v.at("lambda");
      p.C1 = Rational(sign) * v.at("c");
      p.f = u0 - u2 + K(v.at("q"));
    } else {
      p.f = u0 - u2;
    }
    try {
      FamilyInstance inst = build_family(p);
      JetExpr diff = inst.pde.f() - target_rhs;
      if (!diff.is_zero()) {
        result.residual = diff;
        continue;
      }
      if (!verify_pss(inst).pass) continue;
      result.params = p;
      result.residual = diff;
      result.message = "matched";
      return result;
    } catch (const ValidationError& e) {
      result.message = e.what();
    }
  }
  if (result.message.empty()) result.message = "solution violates the family hypotheses";
  return result;
}

}  // namespace psskit
