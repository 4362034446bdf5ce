#include "psskit/bonnet.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <memory>
#include <ostream>
#include <thread>

#include <boost/numeric/odeint.hpp>

namespace psskit {

JetSample to_jet_sample(const NodeJets& n, double x, double t) {
  JetSample s;
  s.x = x;
  s.t = t;
  for (int i = 0; i < 4; ++i) s.u[i] = n.u[i];
  s.w1 = n.ut[0];
  s.v1 = n.ut[1];
  return s;
}

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::TravelingWave: return "traveling_wave";
    case Provenance::SgKink: return "sg_kink";
    case Provenance::Tabulated: return "tabulated";
  }
  return "?";
}

namespace {

EvalEnv jet_env(const NodeJets& n, double x = 0, double t = 0) {
  EvalEnv env;
  env.var = [&n, x, t](JetVar v) -> double {
    switch (v.kind) {
      case VarKind::X: return x;
      case VarKind::T: return t;
      case VarKind::U:
        if (v.index >= 0 && v.index < 4) return n.u[v.index];
        break;
      case VarKind::W:
        if (v.index == 1) return n.ut[0];
        break;
      case VarKind::V:
        if (v.index == 1) return n.ut[1];
        break;
    }
    throw BonnetError("no numeric value for " + v.name());
  };
  env.other = [](const Atom&) -> double { throw BonnetError("opaque slots cannot be evaluated numerically"); };
  return env;
}

bool finite(const NodeJets& n) {
  for (double v : n.u)
    if (!std::isfinite(v)) return false;
  for (double v : n.ut)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace

double pde_residual(const PdeSpec& pde, const NodeJets& n) {
  const EvalEnv env = jet_env(n);
  if (pde.mode() == PdeSpec::Mode::Mixed) return n.ut[1] - eval(pde.h(), env);
  return n.ut[0] - n.ut[2] - eval(pde.f(), env);
}

SolutionSampler SolutionSampler::from_function(const Grid& g, Provenance p, std::string label,
                                               std::function<NodeJets(double, double)> f, const PdeSpec& pde,
                                               double tolerance) {
  if (g.nx < 1 || g.nt < 1) throw BonnetError("grid needs at least one node in each direction");
  if (!(g.hx > 0) || !(g.ht > 0)) throw BonnetError("grid spacings must be positive");
  SolutionSampler s;
  s.grid = g;
  s.provenance = p;
  s.label = std::move(label);
  s.tolerance = tolerance;
  s.eval_ = std::move(f);
  for (int j = 0; j < g.nt; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const NodeJets n = s.node(i, j);
      if (!finite(n)) throw BonnetError("non-finite jet at node (" + std::to_string(i) + ", " + std::to_string(j) + ")");
      const double r = std::abs(pde_residual(pde, n));
      s.max_residual = std::max(s.max_residual, r);
      if (!(r <= tolerance)) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "PDE residual %.3g exceeds %.3g at node (%d, %d)", r, tolerance, i, j);
        throw BonnetError(buf);
      }
    }
  return s;
}

SolutionSampler SolutionSampler::tabulated(const Grid& g, std::vector<NodeJets> nodes, const PdeSpec& pde,
                                           double tolerance) {
  if (nodes.size() != std::size_t(g.nx) * std::size_t(g.nt))
    throw BonnetError("tabulated sampler needs nx * nt nodes");
  auto table = std::make_shared<std::vector<NodeJets>>(std::move(nodes));
  auto f = [table, g](double x, double t) {
    const double sx = g.nx > 1 ? std::clamp((x - g.x0) / g.hx, 0.0, double(g.nx - 1)) : 0.0;
    const double st = g.nt > 1 ? std::clamp((t - g.t0) / g.ht, 0.0, double(g.nt - 1)) : 0.0;
    const int i = std::min(int(sx), std::max(g.nx - 2, 0));
    const int j = std::min(int(st), std::max(g.nt - 2, 0));
    const double px = sx - i, pt = st - j;
    auto at = [&](int a, int b) -> const NodeJets& {
      return (*table)[std::size_t(std::min(a, g.nx - 1) + g.nx * std::min(b, g.nt - 1))];
    };
    NodeJets out;
    const NodeJets &n00 = at(i, j), &n10 = at(i + 1, j), &n01 = at(i, j + 1), &n11 = at(i + 1, j + 1);
    auto mix = [&](double v00, double v10, double v01, double v11) {
      return (1 - px) * (1 - pt) * v00 + px * (1 - pt) * v10 + (1 - px) * pt * v01 + px * pt * v11;
    };
    for (int k = 0; k < 4; ++k) out.u[k] = mix(n00.u[k], n10.u[k], n01.u[k], n11.u[k]);
    for (int k = 0; k < 3; ++k) out.ut[k] = mix(n00.ut[k], n10.ut[k], n01.ut[k], n11.ut[k]);
    return out;
  };
  return from_function(g, Provenance::Tabulated, "tabulated", f, pde, tolerance);
}

SolutionSampler sg_kink(double a, const Grid& grid) {
  if (a == 0 || !std::isfinite(a)) throw BonnetError("sg_kink requires a != 0");
  auto f = [a](double x, double t) {
    const double s = a * x + t / a;
    const double sech = 1 / std::cosh(s);
    const double th = std::tanh(s);
    NodeJets n;
    n.u[0] = 4 * std::atan(std::exp(s));
    n.u[1] = 2 * a * sech;
    n.u[2] = -2 * a * a * sech * th;
    n.u[3] = 2 * a * a * a * sech * (th * th - sech * sech);
    n.ut[0] = 2 / a * sech;
    n.ut[1] = -2 * sech * th;
    n.ut[2] = 2 * a * sech * (th * th - sech * sech);
    return n;
  };
  char label[64];
  std::snprintf(label, sizeof label, "sg_kink(a=%.17g)", a);
  return SolutionSampler::from_function(grid, Provenance::SgKink, label, f, PdeSpec::mixed(sin_of(LinearForm(JetVar::u(0), Rational(1)))),
                                       1e-10);
}

// ---- traveling waves -----------------------------------------------------

namespace {

struct WaveNode {
  double xi;
  std::array<double, 3> y, dy;  // (U, U', U'') and its derivative
};

double hermite(double h, double s, double y0, double d0, double y1, double d1) {
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * d1;
}
double hermite_d(double h, double s, double y0, double d0, double y1, double d1) {
  const double s2 = s * s;
  return ((6 * s2 - 6 * s) * y0 + (-6 * s2 + 6 * s) * y1) / h + (3 * s2 - 4 * s + 1) * d0 + (3 * s2 - 2 * s) * d1;
}

}  // namespace

SolutionSampler traveling_wave(const FamilyInstance& inst, double c, double xi0, double U0, double U1, double U2,
                               const Grid& grid, const TravelingWaveOptions& opt) {
  const PdeSpec& pde = inst.pde;
  if (pde.mode() != PdeSpec::Mode::ThirdOrder) throw BonnetError("traveling_wave needs a third-order equation");
  const double lam = to_double(pde.lambda());
  const JetExpr g = pde.g();
  auto coeff = [c, lam](double U) { return c - lam * U * U; };
  const double scale = std::max(1.0, std::abs(c));
  if (std::abs(coeff(U0)) <= 1e-12 * scale)
    throw BonnetError("c - lambda U^2 vanishes at the initial point; the reduced equation is singular");

  using State = std::array<double, 3>;
  struct Singular {
    double xi;
  };
  auto rhs = [&](const State& y, State& dy, double xi) {
    const double k = coeff(y[0]);
    if (std::abs(k) <= 1e-10 * scale) throw Singular{xi};
    NodeJets n;
    n.u[0] = y[0];
    n.u[1] = y[1];
    n.u[2] = y[2];
    dy[0] = y[1];
    dy[1] = y[2];
    dy[2] = (c * y[1] + eval(g, jet_env(n))) / k;
  };

  // xi range covering the grid rectangle.
  const double x1 = grid.x(grid.nx - 1), t1 = grid.t(grid.nt - 1);
  double lo = xi0, hi = xi0;
  for (double x : {grid.x0, x1})
    for (double t : {grid.t0, t1}) {
      lo = std::min(lo, x - c * t);
      hi = std::max(hi, x - c * t);
    }

  namespace odeint = boost::numeric::odeint;
  auto sweep = [&](double end) {
    std::vector<WaveNode> nodes;
    State y{U0, U1, U2}, dy;
    rhs(y, dy, xi0);
    nodes.push_back({xi0, y, dy});
    if (end == xi0) return nodes;
    auto stepper = odeint::make_controlled(opt.abs_tol, opt.rel_tol, odeint::runge_kutta_dopri5<State>());
    const double dir = end > xi0 ? 1.0 : -1.0;
    double xi = xi0, h = dir * std::min(opt.max_step, std::abs(end - xi0));
    int fails = 0;
    while (dir * (end - xi) > 1e-14) {
      if (dir * (xi + h - end) > 0) h = end - xi;
      if (std::abs(h) > opt.max_step) h = dir * opt.max_step;
      State trial = y;
      double xt = xi, ht = h;
      odeint::controlled_step_result res;
      try {
        res = stepper.try_step(rhs, trial, xt, ht);
      } catch (const Singular& s) {
        throw BonnetError("c - lambda U^2 crosses zero near xi = " + std::to_string(s.xi));
      }
      if (res == odeint::fail) {
        h = ht;
        if (std::abs(h) < 1e-14 || ++fails > 1000000)
          throw BonnetError("step size underflow near xi = " + std::to_string(xi));
        continue;
      }
      y = trial;
      xi = xt;
      h = ht;
      for (double v : y)
        if (!std::isfinite(v)) throw BonnetError("solution blows up near xi = " + std::to_string(xi));
      rhs(y, dy, xi);
      nodes.push_back({xi, y, dy});
    }
    return nodes;
  };
  std::vector<WaveNode> back = sweep(lo);
  std::vector<WaveNode> fwd = sweep(hi);
  auto table = std::make_shared<std::vector<WaveNode>>();
  table->assign(back.rbegin(), back.rend());
  table->insert(table->end(), fwd.begin() + 1, fwd.end());

  auto f = [table, c](double x, double t) {
    const double xi = x - c * t;
    const auto& v = *table;
    NodeJets n;
    std::array<double, 4> U{};  // U .. U'''
    if (v.size() == 1) {
      U = {v[0].y[0], v[0].y[1], v[0].y[2], v[0].dy[2]};
    } else {
      auto it = std::upper_bound(v.begin(), v.end(), xi, [](double s, const WaveNode& w) { return s < w.xi; });
      std::size_t i = it == v.begin() ? 0 : std::size_t(it - v.begin()) - 1;
      if (i + 1 >= v.size()) i = v.size() - 2;
      const WaveNode &a = v[i], &b = v[i + 1];
      const double h = b.xi - a.xi;
      const double s = std::clamp((xi - a.xi) / h, 0.0, 1.0);
      for (int k = 0; k < 3; ++k) U[k] = hermite(h, s, a.y[k], a.dy[k], b.y[k], b.dy[k]);
      U[3] = hermite_d(h, s, a.y[2], a.dy[2], b.y[2], b.dy[2]);
    }
    for (int k = 0; k < 4; ++k) n.u[k] = U[k];
    for (int k = 0; k < 3; ++k) n.ut[k] = -c * U[k + 1];
    return n;
  };
  char label[96];
  std::snprintf(label, sizeof label, "traveling_wave(c=%.17g)", c);
  return SolutionSampler::from_function(grid, Provenance::TravelingWave, label, f, pde, opt.tolerance);
}

// ---- second fundamental form fields --------------------------------------

SffField sff_field(const SecondFundamentalForm& sff) {
  return [sff](const JetSample& j) {
    const SffSample s = sff.at(j.x, j.t);
    return std::array<double, 3>{s.a, s.b, s.c};
  };
}

SffField constant_sff(double a, double b, double c) {
  return [a, b, c](const JetSample&) { return std::array<double, 3>{a, b, c}; };
}

SffField sine_gordon_sff(int s) {
  if (s != 1 && s != -1) throw BonnetError("sign must be +1 or -1");
  return [s](const JetSample& j) {
    const double sn = std::sin(j.u[0]);
    if (std::abs(sn) < 1e-12) throw BonnetError("cot u is singular where sin u = 0");
    return std::array<double, 3>{-2.0 * s * std::cos(j.u[0]) / sn, double(s), 0.0};
  };
}


// ---- frame ---------------------------------------------------------------

double FrameState::drift() const {
  return (e * e.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
}

namespace {

// One derivative of (r, E) along x (dir 0) or t (dir 1).
struct FrameRate {
  Eigen::Vector3d r;
  Eigen::Matrix3d e;
};

class FrameField {
 public:
  FrameField(const SolutionSampler& s, const FamilyInstance& inst, const SffField& sff)
      : s_(s), inst_(inst), sff_(sff) {}

  FrameRate rate(double x, double t, int dir, const FrameState& f) const {
    const NodeJets n = s_.jets(x, t);
    const EvalEnv env = jet_env(n, x, t);
    double w[3];
    for (int i = 0; i < 3; ++i) w[i] = eval(dir == 0 ? inst_.forms[i].cdx : inst_.forms[i].cdt, env);
    const auto abc = sff_(to_jet_sample(n, x, t));
    const double w13 = abc[0] * w[0] + abc[1] * w[1];
    const double w23 = abc[1] * w[0] + abc[2] * w[1];
    Eigen::Matrix3d omega;
    omega << 0, w[2], w13, -w[2], 0, w23, -w13, -w23, 0;
    return {w[0] * f.e.row(0).transpose() + w[1] * f.e.row(1).transpose(), omega * f.e};
  }

  FrameState step(double x, double t, int dir, double h, const FrameState& f) const {
    auto shifted = [&](double s) { return dir == 0 ? std::pair{x + s, t} : std::pair{x, t + s}; };
    auto advance = [](const FrameState& f0, const FrameRate& k, double s) {
      FrameState o;
      o.r = f0.r + s * k.r;
      o.e = f0.e + s * k.e;
      return o;
    };
    const auto [xm, tm] = shifted(h / 2);
    const auto [xe, te] = shifted(h);
    const FrameRate k1 = rate(x, t, dir, f);
    const FrameRate k2 = rate(xm, tm, dir, advance(f, k1, h / 2));
    const FrameRate k3 = rate(xm, tm, dir, advance(f, k2, h / 2));
    const FrameRate k4 = rate(xe, te, dir, advance(f, k3, h));
    FrameState o;
    o.r = f.r + h / 6 * (k1.r + 2 * k2.r + 2 * k3.r + k4.r);
    o.e = f.e + h / 6 * (k1.e + 2 * k2.e + 2 * k3.e + k4.e);
    return o;
  }

 private:
  const SolutionSampler& s_;
  const FamilyInstance& inst_;
  const SffField& sff_;
};

void orthonormalize(FrameState& f) {
  Eigen::Vector3d e1 = f.e.row(0).transpose().normalized();
  Eigen::Vector3d e2 = f.e.row(1).transpose();
  e2 = (e2 - e2.dot(e1) * e1).normalized();
  Eigen::Vector3d e3 = f.e.row(2).transpose();
  e3 = (e3 - e3.dot(e1) * e1 - e3.dot(e2) * e2).normalized();
  f.e.row(0) = e1.transpose();
  f.e.row(1) = e2.transpose();
  f.e.row(2) = e3.transpose();
}

bool finite(const FrameState& f) { return f.r.allFinite() && f.e.allFinite(); }

std::string where(int i, int j, double x, double t) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "node (%d, %d) at (x, t) = (%.6g, %.6g)", i, j, x, t);
  return buf;
}

}  // namespace

SurfaceMesh integrate_frame(const SolutionSampler& s, const FamilyInstance& inst, const SffField& sff,
                            const FrameOptions& opt) {
  const Grid& g = s.grid;
  SurfaceMesh mesh;
  mesh.grid = g;
  const std::size_t n = std::size_t(g.nx) * std::size_t(g.nt);
  mesh.frames.resize(n);
  mesh.sff.resize(n);
  mesh.drift.assign(n, 0.0);

  for (int j = 0; j < g.nt; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double x = g.x(i), t = g.t(j);
      const auto abc = sff(to_jet_sample(s.jets(x, t), x, t));
      const double gauss = abc[0] * abc[2] - abc[1] * abc[1] + 1;
      if (!(std::abs(gauss) <= opt.gauss_tolerance))
        throw BonnetError("Gauss equation ac - b^2 = -1 fails (residual " + std::to_string(gauss) + ") at " +
                          where(i, j, x, t));
      mesh.sff[mesh.index(i, j)] = abc;
    }

  const FrameField field(s, inst, sff);
  auto advance = [&](const FrameState& f, double x, double t, int dir, double h, int i, int j) {
    FrameState o = field.step(x, t, dir, h, f);
    if (opt.reorthonormalize) orthonormalize(o);
    if (!finite(o)) throw BonnetError("non-finite frame at " + where(i, j, x, t));
    return o;
  };

  // Shared sweep along t = t0.
  for (int i = 1; i < g.nx; ++i)
    mesh.frames[mesh.index(i, 0)] = advance(mesh.frames[mesh.index(i - 1, 0)], g.x(i - 1), g.t0, 0, g.hx, i, 0);

  // x = const lines in parallel; each line writes only its own column.
  unsigned threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, unsigned(g.nx));
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(std::size_t(g.nx));
  auto work = [&] {
    for (int i = next++; i < g.nx; i = next++) {
      try {
        for (int j = 1; j < g.nt; ++j)
          mesh.frames[mesh.index(i, j)] =
              advance(mesh.frames[mesh.index(i, j - 1)], g.x(i), g.t(j - 1), 1, g.ht, i, j);
      } catch (...) {
        errors[std::size_t(i)] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (int j = 0; j < g.nt; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double d = mesh.at(i, j).drift();
      mesh.drift[mesh.index(i, j)] = d;
      mesh.max_drift = std::max(mesh.max_drift, d);
      if (!(d <= opt.drift_threshold))
        throw BonnetError("frame orthonormality drift " + std::to_string(d) + " exceeds threshold at " +
                          where(i, j, g.x(i), g.t(j)));
    }

  // Other path to the far corner: up x = x0 (column 0), then along the top row.
  FrameState f = mesh.at(0, g.nt - 1);
  for (int i = 1; i < g.nx; ++i) f = advance(f, g.x(i - 1), g.t(g.nt - 1), 0, g.hx, i, g.nt - 1);
  const FrameState& corner = mesh.at(g.nx - 1, g.nt - 1);
  mesh.commutation_defect = std::max((f.r - corner.r).cwiseAbs().maxCoeff(), (f.e - corner.e).cwiseAbs().maxCoeff());

  mesh.curvature = discrete_curvature(mesh);
  return mesh;
}

// ---- curvature -----------------------------------------------------------

namespace {

template <typename F>
void for_each_triangle(const Grid& g, F&& f) {
  auto id = [&g](int i, int j) { return std::size_t(i + g.nx * j); };
  for (int j = 0; j + 1 < g.nt; ++j)
    for (int i = 0; i + 1 < g.nx; ++i) {
      f(id(i, j), id(i + 1, j), id(i + 1, j + 1));
      f(id(i, j), id(i + 1, j + 1), id(i, j + 1));
    }
}

}  // namespace

std::vector<double> discrete_curvature(const SurfaceMesh& mesh) {
  const Grid& g = mesh.grid;
  const std::size_t n = mesh.frames.size();
  std::vector<double> angle(n, 0.0), area(n, 0.0);
  for_each_triangle(g, [&](std::size_t a, std::size_t b, std::size_t c) {
    const Eigen::Vector3d& pa = mesh.frames[a].r;
    const Eigen::Vector3d& pb = mesh.frames[b].r;
    const Eigen::Vector3d& pc = mesh.frames[c].r;
    const double A = 0.5 * (pb - pa).cross(pc - pa).norm();
    const double scale = std::max({(pb - pa).squaredNorm(), (pc - pa).squaredNorm(), (pc - pb).squaredNorm()});
    if (!(A > 1e-14 * scale)) throw BonnetError("degenerate triangle in the mesh");
    auto corner = [](const Eigen::Vector3d& p, const Eigen::Vector3d& q, const Eigen::Vector3d& r) {
      const Eigen::Vector3d u = q - p, v = r - p;
      return std::atan2(u.cross(v).norm(), u.dot(v));
    };
    angle[a] += corner(pa, pb, pc);
    angle[b] += corner(pb, pc, pa);
    angle[c] += corner(pc, pa, pb);
    for (std::size_t v : {a, b, c}) area[v] += A / 3;
  });
  std::vector<double> K(n, std::numeric_limits<double>::quiet_NaN());
  for (int j = 1; j + 1 < g.nt; ++j)
    for (int i = 1; i + 1 < g.nx; ++i) {
      const std::size_t v = mesh.index(i, j);
      K[v] = (2 * M_PI - angle[v]) / area[v];
    }
  return K;
}

double median_interior_curvature(const SurfaceMesh& mesh) {
  const std::vector<double> K = mesh.curvature.empty() ? discrete_curvature(mesh) : mesh.curvature;
  std::vector<double> v;
  for (double k : K)
    if (!std::isnan(k)) v.push_back(k);
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t m = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + std::ptrdiff_t(m), v.end());
  if (v.size() % 2) return v[m];
  const double hi = v[m];
  const double lo = *std::max_element(v.begin(), v.begin() + std::ptrdiff_t(m));
  return 0.5 * (lo + hi);
}

double edge_length_defect(const SurfaceMesh& mesh, const SolutionSampler& s, const FamilyInstance& inst) {
  const Grid& g = mesh.grid;
  auto metric = [&](double x, double t, int dir) {
    const NodeJets n = s.jets(x, t);
    const EvalEnv env = jet_env(n, x, t);
    const double w1 = eval(dir == 0 ? inst.forms[0].cdx : inst.forms[0].cdt, env);
    const double w2 = eval(dir == 0 ? inst.forms[1].cdx : inst.forms[1].cdt, env);
    return std::sqrt(w1 * w1 + w2 * w2);
  };
  double worst = 0;
  for (int j = 0; j < g.nt; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (i + 1 < g.nx) {
        const double len = (mesh.at(i + 1, j).r - mesh.at(i, j).r).norm();
        worst = std::max(worst, std::abs(len - g.hx * metric(g.x(i) + g.hx / 2, g.t(j), 0)));
      }
      if (j + 1 < g.nt) {
        const double len = (mesh.at(i, j + 1).r - mesh.at(i, j).r).norm();
        worst = std::max(worst, std::abs(len - g.ht * metric(g.x(i), g.t(j) + g.ht / 2, 1)));
      }
    }
  return worst;
}

// ---- export --------------------------------------------------------------

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_obj(const SurfaceMesh& mesh, std::ostream& out) {
  for (const auto& f : mesh.frames) out << "v " << num(f.r.x()) << ' ' << num(f.r.y()) << ' ' << num(f.r.z()) << '\n';
  for_each_triangle(mesh.grid, [&](std::size_t a, std::size_t b, std::size_t c) {
    out << "f " << a + 1 << ' ' << b + 1 << ' ' << c + 1 << '\n';
  });
}

void write_csv(const SurfaceMesh& mesh, std::ostream& out) {
  const Grid& g = mesh.grid;
  out << "x,t,rx,ry,rz,a,b,c,K,drift\n";
  for (int j = 0; j < g.nt; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t v = mesh.index(i, j);
      const auto& r = mesh.frames[v].r;
      const auto& abc = mesh.sff[v];
      const double K = v < mesh.curvature.size() ? mesh.curvature[v] : std::numeric_limits<double>::quiet_NaN();
      const double d = v < mesh.drift.size() ? mesh.drift[v] : mesh.frames[v].drift();
      out << num(g.x(i)) << ',' << num(g.t(j)) << ',' << num(r.x()) << ',' << num(r.y()) << ',' << num(r.z()) << ','
          << num(abc[0]) << ',' << num(abc[1]) << ',' << num(abc[2]) << ',' << num(K) << ',' << num(d) << '\n';
    }
}

void export_mesh(const SurfaceMesh& mesh, MeshFormat format, const std::string& path) {
  for (const auto& f : mesh.frames)
    if (!f.r.allFinite()) throw BonnetError("mesh has non-finite vertices");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw BonnetError("cannot open " + path + " for writing");
  if (format == MeshFormat::Obj)
    write_obj(mesh, out);
  else
    write_csv(mesh, out);
  out.flush();
  if (!out) throw BonnetError("write to " + path + " failed");
}

}  // namespace psskit
