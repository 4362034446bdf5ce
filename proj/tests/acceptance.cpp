// Acceptance run: one line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "psskit/bonnet.hpp"
#include "psskit/families.hpp"
#include "psskit/forms.hpp"
#include "psskit/immersion.hpp"
#include "psskit/parse.hpp"
#include "psskit/sampling.hpp"
#include "support/random_expr.hpp"

using namespace psskit;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(double v, int digits = 3) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

const std::vector<FamilyKind> kThirdOrder = {FamilyKind::T22, FamilyKind::T23, FamilyKind::T24, FamilyKind::T25i,
                                             FamilyKind::T25ii};

const LinearForm kU0(JetVar::u(0), Rational(1));

Verdict sine_gordon_fixture() {
  Verdict v;
  for (const Rational& eta : {Rational(1), Rational(3, 2)}) {
    FamilyParams p = default_params(FamilyKind::SG);
    p.eta2 = eta;
    const FamilyInstance inst = build_family(p);
    v.require(structure_residuals(inst.forms, inst.pde).zero(), "structure residual nonzero");
    const JetExpr s = sin_of(kU0), c = cos_of(kU0);
    for (int sign : {1, -1}) {
      const JetExpr e(sign);
      const FundamentalForms ff = fundamental_forms(inst.forms, JetExpr(-2) * e * c / s, e, JetExpr(0));
      v.require(ff.first.dxdx == JetExpr(eta * eta) && ff.first.dxdt == c && ff.first.dtdt == JetExpr(1 / (eta * eta)),
                "first fundamental form differs");
      v.require(ff.second.dxdx.is_zero() && ff.second.dxdt == e * s && ff.second.dtdt.is_zero(),
                "second fundamental form differs");
    }
  }
  if (v.pass) v.detail = "residuals exactly 0; I and II exact for eta in {1, 3/2}, both signs";
  return v;
}

Verdict family_verification() {
  Verdict v;
  const std::vector<std::string> conds = {"auxiliary_affine", "jet_order",       "difference_argument",
                                          "t_coefficient_shape", "compatibility_1", "compatibility_2",
                                          "nondegeneracy"};
  int n = 0;
  for (FamilyKind k : kThirdOrder) {
    for (int sign : {1, -1}) {
      const FamilyInstance inst = build_family(default_params(k, sign));
      const PssReport r = verify_pss(inst);
      const std::string tag = to_string(k) + (sign > 0 ? "+" : "-");
      v.require(r.pass && r.residuals.zero(), tag + " structure equations fail");
      v.require(lemma21_check(inst, Rational(1)).all_pass(conds), tag + " classification conditions fail");
      ++n;
    }
  }
  if (v.pass) v.detail = std::to_string(n) + " instances verified exactly, 7 lemma conditions each";
  return v;
}

Verdict mutation_sensitivity() {
  Verdict v;
  const JetExpr planted = JetExpr(Rational(1, 7)) * JetExpr::u(0) * JetExpr::u(1);
  int caught = 0, tried = 0;
  for (FamilyKind k : kThirdOrder) {
    const FamilyInstance inst = build_family(default_params(k));
    int here = 0;
    for (int form = 1; form <= 3; ++form) {
      for (char slot : {'x', 't'}) {
        const OneForm& w = inst.forms[form - 1];
        const PssReport r =
            verify_pss(with_form_coefficient(inst, form, slot, (slot == 'x' ? w.cdx : w.cdt) + planted));
        ++tried;
        if (!r.pass && !r.residuals.zero()) ++here;
      }
    }
    v.require(here > 0, to_string(k) + " insensitive to mutations");
    caught += here;
  }
  v.detail += (v.detail.empty() ? "" : "; ") + std::to_string(caught) + "/" + std::to_string(tried) +
              " single-term mutations rejected";
  return v;
}

Verdict camassa_holm_membership() {
  Verdict v;
  const JetExpr target = camassa_holm_rhs();
  const MatchResult m = match_generalized_ch(target);
  v.require(bool(m.params), "no match: " + m.message);
  if (!m.params) return v;
  v.require(m.residual.is_zero(), "coefficient residual " + render(m.residual));
  const FamilyInstance inst = build_family(*m.params);
  v.require((inst.pde.f() - target).is_zero(), "expanded equation differs");
  v.require(verify_pss(inst).pass, "matched instance fails verification");
  if (v.pass)
    v.detail = to_string(m.params->kind) + " with eta2=" + to_string(m.params->eta2) + ", C1=" +
               to_string(m.params->C1) + ", lambda=" + to_string(m.params->lambda) + "; residual 0";
  return v;
}

Verdict closed_form_immersions() {
  Verdict v;
  const double alpha = 2.5, beta = 1.0;
  struct Case {
    SffCase id;
    ClosedFormScalars sc;
    FamilyKind family;
    double b0;
  };
  ClosedFormScalars p35, p37i, p37ii;
  p37i.eta2 = 0;
  p37i.C1 = 1;
  p37ii.C1 = 0.5;
  const std::vector<Case> cases = {{SffCase::P35i, p35, FamilyKind::T22, -1},
                                   {SffCase::P37i, p37i, FamilyKind::T24, 1},
                                   {SffCase::P37ii, p37ii, FamilyKind::T24, -1}};
  std::mt19937_64 rng(testing::kPropertySeed);
  std::uniform_real_distribution<double> unit(0, 1), free(-2, 2), jet(-1, 1);
  double origin_err = 0, gauss = 0, codazzi = 0, strip_err = 0;
  for (const Case& c : cases) {
    const Strip strip = strip_domain(c.id, alpha, beta, c.sc, 1);
    strip_err = std::max({strip_err, std::abs(strip.e_range.lo - 0.5), std::abs(strip.e_range.hi - 2.0)});
    for (int sign : {1, -1}) {
      const SecondFundamentalForm sff = sff_closed_form(c.id, alpha, beta, c.sc, sign);
      const SffSample o = sff.at(0, 0);
      origin_err = std::max({origin_err, std::abs(o.a - std::sqrt(0.5)), std::abs(o.b - c.b0), std::abs(o.c)});
      FamilyParams fp = default_params(c.family, sign);
      fp.mu2 = 0;
      fp.eta2 = Rational(c.sc.eta2);
      fp.C1 = Rational(c.sc.C1);
      const FamilyInstance inst = build_family(fp);
      std::vector<std::pair<double, double>> pts;
      std::vector<JetSample> jets;
      for (int i = 0; i < 1000; ++i) {
        const double xi = sff.xi_domain.lo + (sff.xi_domain.hi - sff.xi_domain.lo) * (0.001 + 0.998 * unit(rng));
        JetSample j;
        if (sff.kx != 0) {
          j.t = free(rng);
          j.x = (xi - sff.kt * j.t) / sff.kx;
        } else {
          j.x = free(rng);
          j.t = xi / sff.kt;
        }
        for (double& u : j.u) u = jet(rng);
        j.w1 = jet(rng);
        j.v1 = jet(rng);
        pts.emplace_back(j.x, j.t);
        jets.push_back(j);
      }
      gauss = std::max(gauss, gauss_residual(sff, pts));
      for (const auto& r : codazzi_residuals(inst, sff, jets))
        codazzi = std::max({codazzi, std::abs(r.first), std::abs(r.second)});
    }
  }
  v.require(origin_err <= 1e-12, "origin error " + fmt(origin_err));
  v.require(gauss <= 1e-12, "Gauss residual " + fmt(gauss));
  v.require(codazzi <= 1e-10, "Codazzi residual " + fmt(codazzi));
  v.require(strip_err <= 1e-14, "strip error " + fmt(strip_err));
  if (v.pass)
    v.detail = "origin err " + fmt(origin_err) + ", Gauss " + fmt(gauss) + ", Codazzi " + fmt(codazzi) +
               ", strip err " + fmt(strip_err);
  return v;
}

Verdict ode_immersions() {
  Verdict v;
  BOdeProblem p;  // mu2 = eta2 = 1, beta = 0, b0 = 2 on [0, 1]
  const OdeSolution s = solve_b_ode(p, SffCase::P35ii);
  v.require(s.completed, "integration stopped: " + s.stop_reason);
  const double want = 2 * std::sqrt(6.0) / (2 + std::sqrt(3.0));
  const double slope_err = std::abs(s.initial_slope - want);
  v.require(slope_err <= 1e-9, "b'(0) error " + fmt(slope_err));
  v.require(s.max_relation <= 1e-8, "relation residual " + fmt(s.max_relation));
  BOdeProblem loose = p, tight = p;
  loose.abs_tol = loose.rel_tol = 1e-9;
  tight.abs_tol = tight.rel_tol = 1e-10;
  const OdeSolution a = solve_b_ode(loose, SffCase::P35ii), b = solve_b_ode(tight, SffCase::P35ii);
  const double gain = a.max_relation / b.max_relation;
  v.require(a.completed && b.completed && gain >= 5, "tolerance gain " + fmt(gain));
  if (v.pass)
    v.detail = "b'(0) err " + fmt(slope_err) + ", relation " + fmt(s.max_relation) + ", 10x tolerance gain " +
               fmt(gain) + "x";
  return v;
}

Verdict certificates() {
  Verdict v;
  Rng rng(testing::kPropertySeed);
  constexpr int kSweep = 100;
  for (FamilyKind k : {FamilyKind::T23, FamilyKind::T25i, FamilyKind::T25ii}) {
    int confirmed = 0;
    for (int i = 0; i < kSweep; ++i)
      if (nonexistence_certificate(random_admissible_params(k, rng)).confirmed) ++confirmed;
    v.require(confirmed == kSweep, to_string(k) + " " + std::to_string(confirmed) + "/" + std::to_string(kSweep));
  }
  if (v.pass) v.detail = "100/100 nonzero for T23, T25i, T25ii";
  return v;
}

Verdict reconstruction() {
  Verdict v;
  const FamilyInstance sg = build_family(default_params(FamilyKind::SG));
  auto mesh = [&](int n, double h) {
    Grid g;
    g.x0 = g.t0 = 0.25;
    g.hx = g.ht = h;
    g.nx = g.nt = n;
    return integrate_frame(sg_kink(1.0, g), sg, sine_gordon_sff());
  };
  const SurfaceMesh m = mesh(101, 0.01), fine = mesh(201, 0.005);
  const double K = median_interior_curvature(m), Kf = median_interior_curvature(fine);
  v.require(m.max_drift <= 1e-6, "drift " + fmt(m.max_drift));
  v.require(std::abs(K + 1) <= 0.05, "median K " + fmt(K));
  v.require(std::abs(Kf + 1) < std::abs(K + 1), "no improvement under refinement");
  if (v.pass)
    v.detail = "drift " + fmt(m.max_drift) + ", median K " + fmt(K, 7) + ", |K+1| " + fmt(std::abs(K + 1)) + " -> " +
               fmt(std::abs(Kf + 1)) + " at h/2";
  return v;
}

Verdict engine_properties() {
  Verdict v;
  std::mt19937_64 rng(testing::kPropertySeed);
  const PdeSpec pde = testing::camassa_holm_pde();
  testing::ExprOptions with_opaque;
  with_opaque.opaque = true;
  constexpr int kCases = 200;
  int fails[5] = {0, 0, 0, 0, 0};
  for (int i = 0; i < kCases; ++i) {
    const JetExpr a = testing::random_expr(rng), b = testing::random_expr(rng);
    const JetExpr p = testing::random_coefficient(rng), q = testing::random_coefficient(rng);
    const JetExpr s = p * a + q * b;
    if (!(total_dx(s, pde) == p * total_dx(a, pde) + q * total_dx(b, pde) &&
          total_dt(s, pde) == p * total_dt(a, pde) + q * total_dt(b, pde)))
      ++fails[0];
    if (!(total_dx(a * b, pde) == total_dx(a, pde) * b + a * total_dx(b, pde) &&
          total_dt(a * b, pde) == total_dt(a, pde) * b + a * total_dt(b, pde)))
      ++fails[1];
    if (!(total_dx(total_dt(a, pde), pde) == total_dt(total_dx(a, pde), pde))) ++fails[2];
    const JetExpr o = testing::random_expr(rng, with_opaque);
    JetExpr n = o;
    n.normalize();
    if (!(n == o)) ++fails[3];
    if (!(parse_expr(render(o)) == o)) ++fails[4];
  }
  const char* names[5] = {"linearity", "Leibniz", "commutation", "idempotence", "round-trip"};
  for (int k = 0; k < 5; ++k) v.require(fails[k] == 0, std::string(names[k]) + " " + std::to_string(fails[k]) + " failures");
  if (v.pass) v.detail = "5 x 200 cases pass, seed " + std::to_string(testing::kPropertySeed);
  return v;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "sine-Gordon fixture", 1, sine_gordon_fixture},
      {2, "family verification", 30, family_verification},
      {3, "mutation sensitivity", 10, mutation_sensitivity},
      {4, "Camassa-Holm membership", 60, camassa_holm_membership},
      {5, "closed-form immersions", 5, closed_form_immersions},
      {6, "ODE immersions", 5, ode_immersions},
      {7, "nonexistence certificates", 5, certificates},
      {8, "reconstruction", 60, reconstruction},
      {9, "engine properties", 30, engine_properties},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs >= c.limit_s) v.require(false, "runtime over " + fmt(c.limit_s) + " s");
    std::printf("[%s] %d %-26s %s (%.3f s, limit %g s)\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(),
                secs, c.limit_s);
    std::fflush(stdout);
    if (!v.pass) ++failed;
  }
  std::printf("%d/%zu criteria pass\n", int(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
