#include "psskit/immersion.hpp"

#include <algorithm>
#include <cctype>
#include <array>
#include <cmath>
#include <memory>

#include <boost/numeric/odeint.hpp>

#include "psskit/parse.hpp"

namespace psskit {

std::string to_string(SffCase c) {
  switch (c) {
    case SffCase::P35i: return "P35i";
    case SffCase::P35ii: return "P35ii";
    case SffCase::P37i: return "P37i";
    case SffCase::P37ii: return "P37ii";
    case SffCase::P37iii: return "P37iii";
  }
  return "?";
}

std::optional<SffCase> parse_sff_case(std::string_view text) {
  for (SffCase c : {SffCase::P35i, SffCase::P35ii, SffCase::P37i, SffCase::P37ii, SffCase::P37iii}) {
    const std::string name = to_string(c);
    if (name.size() != text.size()) continue;
    bool same = true;
    for (std::size_t i = 0; i < name.size(); ++i)
      if (std::tolower(static_cast<unsigned char>(name[i])) != std::tolower(static_cast<unsigned char>(text[i])))
        same = false;
    if (same) return c;
  }
  return std::nullopt;
}

SffSample SecondFundamentalForm::at(double x, double t) const {
  const double s = xi(x, t);
  if (!xi_domain.contains(s))
    throw ImmersionError("(x, t) = (" + std::to_string(x) + ", " + std::to_string(t) +
                         ") lies outside the domain of the coefficients (xi = " + std::to_string(s) + ")");
  const SffXi v = along(s);
  return {v.a, v.b, v.c, kx * v.a_xi, kt * v.a_xi, kx * v.b_xi, kt * v.b_xi, kx * v.c_xi, kt * v.c_xi};
}

SecondFundamentalForm SecondFundamentalForm::constant(double a, double b, double c) {
  SecondFundamentalForm out;
  out.kx = 1;
  out.kt = 0;
  out.xi_domain = {-HUGE_VAL, HUGE_VAL};
  out.along = [a, b, c](double) { return SffXi{a, b, c, 0, 0, 0}; };
  return out;
}

namespace {

void check_sign(int s, const char* what) {
  if (s != 1 && s != -1) throw ImmersionError(std::string(what) + " must be +1 or -1");
}

// (kx, kt) of xi for the closed-form cases.
std::pair<double, double> xi_rates(SffCase c, const ClosedFormScalars& s) {
  switch (c) {
    case SffCase::P35i: return {s.eta2, 0};
    case SffCase::P37i: return {0, s.C1};
    case SffCase::P37ii: return {s.eta2, s.C1};
    default: throw ImmersionError(to_string(c) + " has no closed form; use the ODE solver");
  }
}

void check_closed_form(SffCase c, double alpha, double beta, const ClosedFormScalars& s, int sign) {
  check_sign(sign, "sign");
  check_sign(s.root, "root");
  if (!(alpha > 0)) throw ImmersionError("alpha must be positive");
  if (!(alpha * alpha > 4 * beta * beta)) throw ImmersionError("alpha^2 > 4 beta^2 is required");
  if (c == SffCase::P35i && s.eta2 == 0) throw ImmersionError("P35i requires eta2 != 0");
  if (c == SffCase::P37i && s.C1 == 0) throw ImmersionError("P37i requires C1 != 0");
  if (c == SffCase::P37ii && s.eta2 == 0) throw ImmersionError("P37ii requires eta2 != 0");
  if (c == SffCase::P37ii && s.mu2 != 0) throw ImmersionError("P37ii requires mu2 = 0");
}

}  // namespace

Strip strip_domain(SffCase c, double alpha, double beta, const ClosedFormScalars& s, int sign) {
  check_closed_form(c, alpha, beta, s, sign);
  Strip out;
  if (beta == 0) {
    out.degenerate = true;
    out.e_range = {1 / alpha, HUGE_VAL};
  } else {
    const double disc = std::sqrt(alpha * alpha - 4 * beta * beta);
    out.e_range = {(alpha - disc) / (2 * beta * beta), (alpha + disc) / (2 * beta * beta)};
  }
  // e = exp(2 sign xi)
  const double l0 = 0.5 * std::log(out.e_range.lo);
  const double l1 = std::isinf(out.e_range.hi) ? HUGE_VAL : 0.5 * std::log(out.e_range.hi);
  out.xi_range = sign > 0 ? Interval{l0, l1} : Interval{-l1, -l0};

  auto [kx, kt] = xi_rates(c, s);
  double k = 1;
  switch (c) {
    case SffCase::P35i: out.coordinate = "x"; k = kx; break;
    case SffCase::P37i: out.coordinate = "t"; k = kt; break;
    default: out.coordinate = "xi"; break;
  }
  double a = out.xi_range.lo / k, b = out.xi_range.hi / k;
  if (a > b) std::swap(a, b);
  out.coordinate_range = {a, b};
  return out;
}

SecondFundamentalForm sff_closed_form(SffCase c, double alpha, double beta, const ClosedFormScalars& s, int sign) {
  const Strip strip = strip_domain(c, alpha, beta, s, sign);
  auto [kx, kt] = xi_rates(c, s);
  SecondFundamentalForm out;
  out.case_id = c;
  out.alpha = alpha;
  out.beta = beta;
  out.sign = sign;
  out.kx = kx;
  out.kt = kt;
  out.xi_domain = strip.xi_range;
  const double eps = sign;
  const double r = s.root;
  const double bsign = c == SffCase::P37i ? 1.0 : -1.0;
  out.along = [alpha, beta, eps, r, bsign](double xi) {
    const double e = std::exp(2 * eps * xi);
    const double L = alpha * e - beta * beta * e * e - 1;
    const double L1 = 2 * eps * alpha * e - 4 * eps * beta * beta * e * e;
    const double L2 = 4 * alpha * e - 16 * beta * beta * e * e;
    const double sq = std::sqrt(L);
    SffXi v;
    v.a = r * sq;
    v.a_xi = r * L1 / (2 * sq);
    const double a_xixi = r * (L2 / (2 * sq) - L1 * L1 / (4 * L * sq));
    v.b = bsign * beta * e;
    v.b_xi = 2 * eps * v.b;
    v.c = v.a - eps * v.a_xi;
    v.c_xi = v.a_xi - eps * a_xixi;
    return v;
  };
  return out;
}

// ---- the b-equation ------------------------------------------------------

namespace {

struct OdeBranch {
  double mu, R, beta, eps, sg, sr;
};

OdeBranch branch_of(const BOdeProblem& p) {
  check_sign(p.sign, "sign");
  const int sg = p.ode_sign.value_or(p.sign);
  const int sr = p.root_sign.value_or(p.sign);
  check_sign(sg, "ode_sign");
  check_sign(sr, "root_sign");
  if (p.mu2 == 0) throw ImmersionError("the b-equation requires mu2 != 0");
  return {p.mu2, std::sqrt(1 + p.mu2 * p.mu2), p.beta, double(p.sign), double(sg), double(sr)};
}

double exp_term(const OdeBranch& o, double xi) { return std::exp(2 * o.eps * xi / o.R); }

double phi_of(const OdeBranch& o, double xi, double b) {
  return (o.mu * o.mu - 1) / o.mu * b - o.beta / o.mu * exp_term(o, xi);
}

double delta_of(const OdeBranch& o, double xi, double b) {
  const double ph = phi_of(o, xi, b);
  return ph * ph - 4 * (1 - b * b);
}

struct SlopeParts {
  double num, den;
};

SlopeParts slope_parts(const OdeBranch& o, double xi, double b) {
  const double ph = phi_of(o, xi, b);
  const double sd = std::sqrt(delta_of(o, xi, b));
  const double e = exp_term(o, xi);
  const double m2 = o.mu * o.mu;
  return {o.sg * 2 * o.R * b * sd + 2 * o.beta / o.R * ph * e, (m2 + 1) * sd + o.sg * (m2 - 1) * ph + o.sg * 4 * o.mu * b};
}

// a' from the Codazzi relation mu a' = -mu^2 b' + eps R b + eps (beta/R) e.
double a_slope(const OdeBranch& o, double xi, double b, double b_xi) {
  return (-o.mu * o.mu * b_xi + o.eps * o.R * b + o.eps * o.beta / o.R * exp_term(o, xi)) / o.mu;
}

double phi_slope(const OdeBranch& o, double xi, double b_xi) {
  return (o.mu * o.mu - 1) / o.mu * b_xi - o.beta / o.mu * (2 * o.eps / o.R) * exp_term(o, xi);
}

// Cubic Hermite on one step.
double hermite(double h, double s, double y0, double d0, double y1, double d1) {
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * d1;
}
double hermite_d(double h, double s, double y0, double d0, double y1, double d1) {
  const double s2 = s * s;
  return ((6 * s2 - 6 * s) * y0 + (-6 * s2 + 6 * s) * y1) / h + (3 * s2 - 4 * s + 1) * d0 + (3 * s2 - 2 * s) * d1;
}

}  // namespace

double ode_delta(const BOdeProblem& p, double xi, double b) { return delta_of(branch_of(p), xi, b); }

double ode_slope(const BOdeProblem& p, double xi, double b) {
  const OdeBranch o = branch_of(p);
  if (delta_of(o, xi, b) < 0) throw ImmersionError("Delta < 0 at xi = " + std::to_string(xi));
  const SlopeParts sp = slope_parts(o, xi, b);
  if (sp.den == 0) throw ImmersionError("the coefficient of b' vanishes at xi = " + std::to_string(xi));
  return sp.num / sp.den;
}

OdeSolution solve_b_ode(const BOdeProblem& p, SffCase c) {
  if (c != SffCase::P35ii && c != SffCase::P37iii)
    throw ImmersionError(to_string(c) + " is a closed-form case; use sff_closed_form");
  if (p.eta2 == 0) throw ImmersionError("the b-equation requires eta2 != 0");
  if (c == SffCase::P35ii && p.C1 != 0) throw ImmersionError("P35ii has C1 = 0");
  if (!(p.abs_tol > 0) || !(p.rel_tol > 0)) throw ImmersionError("tolerances must be positive");
  const OdeBranch o = branch_of(p);

  const double d0 = delta_of(o, p.xi0, p.b0);
  if (!(d0 > 0))
    throw ImmersionError("initial condition gives Delta = " + std::to_string(d0) + " <= 0 at xi0 = " +
                         std::to_string(p.xi0));
  const SlopeParts sp0 = slope_parts(o, p.xi0, p.b0);
  if (std::abs(sp0.den) < 1e-12) throw ImmersionError("the coefficient of b' vanishes at the initial point");

  using State = std::array<double, 2>;  // (b, a)
  struct Guard {};
  auto rhs = [&o](const State& y, State& dy, double xi) {
    const double dl = delta_of(o, xi, y[0]);
    if (!(dl > 0)) throw Guard{};
    const SlopeParts s = slope_parts(o, xi, y[0]);
    dy[0] = s.num / s.den;
    dy[1] = a_slope(o, xi, y[0], dy[0]);
  };

  auto make_node = [&o](double xi, const State& y, const State& dy) {
    OdeNode n;
    n.xi = xi;
    n.b = y[0];
    n.a = y[1];
    n.b_xi = dy[0];
    n.a_xi = dy[1];
    const double ph = phi_of(o, xi, n.b);
    n.c = n.a + ph;
    n.c_xi = n.a_xi + phi_slope(o, xi, n.b_xi);
    n.relation = n.a * n.a + n.a * ph - n.b * n.b + 1;
    const double mu = o.mu;
    n.codazzi1 = -n.a_xi - mu * n.b_xi + o.eps / o.R * (2 * mu * n.b + n.a - n.c);
    n.codazzi2 = -n.b_xi - mu * n.c_xi + o.eps / o.R * (2 * n.b - mu * n.a + mu * n.c);
    return n;
  };

  OdeSolution out;
  State y{p.b0, (-phi_of(o, p.xi0, p.b0) + o.sr * std::sqrt(d0)) / 2};
  State dy;
  rhs(y, dy, p.xi0);
  out.initial_slope = dy[0];
  out.nodes.push_back(make_node(p.xi0, y, dy));

  namespace odeint = boost::numeric::odeint;
  auto stepper = odeint::make_controlled(p.abs_tol, p.rel_tol, odeint::runge_kutta_dopri5<State>());
  const double dir = p.xi_end >= p.xi0 ? 1.0 : -1.0;
  double xi = p.xi0;
  double h = dir * std::min(0.01, std::abs(p.xi_end - p.xi0) + 1e-300);
  int failures = 0;
  while (dir * (p.xi_end - xi) > 1e-14) {
    if (dir * (xi + h - p.xi_end) > 0) h = p.xi_end - xi;
    State trial = y;
    double xi_trial = xi, h_trial = h;
    odeint::controlled_step_result res;
    try {
      res = stepper.try_step(rhs, trial, xi_trial, h_trial);
    } catch (const Guard&) {
      h *= 0.5;
      if (std::abs(h) < 1e-12) {
        out.stop_reason = "Delta reaches zero near xi = " + std::to_string(xi);
        break;
      }
      continue;
    }
    if (res == odeint::fail) {
      h = h_trial;
      if (std::abs(h) < 1e-12 || ++failures > 100000) {
        out.stop_reason = "step size underflow near xi = " + std::to_string(xi);
        break;
      }
      continue;
    }
    // Singularity guard: the b' coefficient must stay away from zero.
    const SlopeParts s = slope_parts(o, xi_trial, trial[0]);
    const double scale = std::abs(s.num) + (1 + o.mu * o.mu) * std::sqrt(std::max(0.0, delta_of(o, xi_trial, trial[0])));
    if (std::abs(s.den) < 1e-8 * std::max(1.0, scale)) {
      out.stop_reason = "the coefficient of b' vanishes near xi = " + std::to_string(xi_trial);
      break;
    }
    y = trial;
    xi = xi_trial;
    h = h_trial;
    rhs(y, dy, xi);
    out.nodes.push_back(make_node(xi, y, dy));
  }
  out.completed = out.stop_reason.empty();
  for (const auto& n : out.nodes) {
    out.max_relation = std::max(out.max_relation, std::abs(n.relation));
    out.max_codazzi = std::max({out.max_codazzi, std::abs(n.codazzi1), std::abs(n.codazzi2)});
  }

  SecondFundamentalForm& f = out.sff;
  f.case_id = c;
  f.beta = p.beta;
  f.sign = p.sign;
  f.kx = p.eta2;
  f.kt = c == SffCase::P37iii ? p.C1 : 0.0;
  const double lo = std::min(out.nodes.front().xi, out.nodes.back().xi);
  const double hi = std::max(out.nodes.front().xi, out.nodes.back().xi);
  // Closed interval of integrated nodes, widened by rounding slack.
  const double slack = 1e-12 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
  f.xi_domain = {lo - slack, hi + slack};
  auto nodes = std::make_shared<std::vector<OdeNode>>(out.nodes);
  if (dir < 0) std::reverse(nodes->begin(), nodes->end());
  f.along = [nodes, o](double xi) {
    const auto& v = *nodes;
    if (v.size() == 1) return SffXi{v[0].a, v[0].b, v[0].c, v[0].a_xi, v[0].b_xi, v[0].c_xi};
    auto it = std::upper_bound(v.begin(), v.end(), xi, [](double s, const OdeNode& n) { return s < n.xi; });
    std::size_t i = it == v.begin() ? 0 : std::size_t(it - v.begin()) - 1;
    if (i + 1 >= v.size()) i = v.size() - 2;
    const OdeNode& n0 = v[i];
    const OdeNode& n1 = v[i + 1];
    const double h = n1.xi - n0.xi;
    const double s = std::clamp((xi - n0.xi) / h, 0.0, 1.0);
    SffXi r;
    r.b = hermite(h, s, n0.b, n0.b_xi, n1.b, n1.b_xi);
    r.a = hermite(h, s, n0.a, n0.a_xi, n1.a, n1.a_xi);
    r.b_xi = hermite_d(h, s, n0.b, n0.b_xi, n1.b, n1.b_xi);
    r.a_xi = hermite_d(h, s, n0.a, n0.a_xi, n1.a, n1.a_xi);
    r.c = r.a + phi_of(o, xi, r.b);
    r.c_xi = r.a_xi + phi_slope(o, xi, r.b_xi);
    return r;
  };
  return out;
}

std::vector<BranchReport> ode_branch_table(BOdeProblem problem, SffCase c) {
  std::vector<BranchReport> out;
  for (int sg : {1, -1})
    for (int sr : {1, -1}) {
      problem.ode_sign = sg;
      problem.root_sign = sr;
      BranchReport r{sg, sr, false, HUGE_VAL, HUGE_VAL};
      try {
        const OdeSolution s = solve_b_ode(problem, c);
        r.completed = s.completed;
        r.max_relation = s.max_relation;
        r.max_codazzi = s.max_codazzi;
      } catch (const ImmersionError&) {
      }
      out.push_back(r);
    }
  return out;
}

double gauss_residual(const SecondFundamentalForm& sff, const std::vector<std::pair<double, double>>& points) {
  double worst = 0;
  for (const auto& [x, t] : points) {
    const SffSample s = sff.at(x, t);
    worst = std::max(worst, std::abs(s.a * s.c - s.b * s.b + 1));
  }
  return worst;
}

// ---- Codazzi -------------------------------------------------------------

CodazziResidual codazzi_residuals(const FamilyInstance& inst, const SffSample& s, const JetSample& jet,
                                  const std::function<double(const Atom&)>& other) {
  EvalEnv env;
  env.var = [&jet](JetVar v) -> double {
    switch (v.kind) {
      case VarKind::X: return jet.x;
      case VarKind::T: return jet.t;
      case VarKind::U:
        if (v.index < 0 || v.index >= 6) throw ImmersionError("jet sample lacks u" + std::to_string(v.index));
        return jet.u[v.index];
      case VarKind::W:
        if (v.index == 1) return jet.w1;
        break;
      case VarKind::V:
        if (v.index == 1) return jet.v1;
        break;
    }
    throw ImmersionError("jet sample lacks " + v.name());
  };
  env.other = other;
  double f[3][2];
  for (int i = 0; i < 3; ++i) {
    f[i][0] = eval(inst.forms[i].cdx, env);
    f[i][1] = eval(inst.forms[i].cdt, env);
  }
  auto dlt = [&f](int i, int j) { return f[i][0] * f[j][1] - f[j][0] * f[i][1]; };
  const double d13 = dlt(0, 2), d23 = dlt(1, 2);
  CodazziResidual r;
  r.first = f[0][0] * s.a_t + f[1][0] * s.b_t - f[0][1] * s.a_x - f[1][1] * s.b_x - 2 * s.b * d13 + (s.a - s.c) * d23;
  r.second = f[0][0] * s.b_t + f[1][0] * s.c_t - f[0][1] * s.b_x - f[1][1] * s.c_x + (s.a - s.c) * d13 + 2 * s.b * d23;
  return r;
}

std::vector<CodazziResidual> codazzi_residuals(const FamilyInstance& inst, const SecondFundamentalForm& sff,
                                               const std::vector<JetSample>& jets,
                                               const std::function<double(const Atom&)>& other) {
  std::vector<CodazziResidual> out;
  out.reserve(jets.size());
  for (const auto& j : jets) out.push_back(codazzi_residuals(inst, sff.at(j.x, j.t), j, other));
  return out;
}

// ---- certificates --------------------------------------------------------

Certificate nonexistence_certificate(const FamilyParams& params) {
  validate(params);
  const FamilyInstance inst = build_family(params);
  Certificate c;
  c.kind = params.kind;
  switch (params.kind) {
    case FamilyKind::T23: {
      const Rational p = inst.mu3 * inst.eta2 - inst.mu2 * inst.eta3;
      const Rational v = inst.eta3 * inst.eta3 + p * p;
      c.values = {v};
      c.norm = v;
      c.confirmed = v != 0;
      c.explanation = "eta3^2 + (mu3 eta2 - mu2 eta3)^2 = " + to_string(v);
      break;
    }
    case FamilyKind::T25i: {
      const Rational& lam = params.lambda;
      const Rational& th = params.theta;
      const JetExpr u0 = JetExpr::u(0);
      JetExpr e = JetExpr(Rational(2) * lam / th) - JetExpr(th * params.C2) * JetExpr::exp(LinearForm(JetVar::u(0), th)) +
                  JetExpr(Rational(2) * lam) * u0;
      c.confirmed = !e.is_zero();
      c.explanation = "2 lambda/theta - theta C2 exp(theta u0) + 2 lambda u0 = " + render(e);
      c.expression = std::move(e);
      break;
    }
    case FamilyKind::T25ii: {
      const Rational p = inst.mu2 * inst.eta3 - inst.mu3 * inst.eta2;
      c.values = {inst.eta3, p};
      c.norm = inst.eta3 * inst.eta3 + p * p;
      c.confirmed = c.norm != 0;
      c.explanation = "(eta3, mu2 eta3 - mu3 eta2) = (" + to_string(inst.eta3) + ", " + to_string(p) + ")";
      break;
    }
    default:
      throw ValidationError("certificate_kind", "certificates exist for T23, T25i and T25ii only");
  }
  return c;
}

}  // namespace psskit
