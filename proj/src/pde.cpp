#include "psskit/pde.hpp"

#include <string>

namespace psskit {

namespace {

void require_args(const JetExpr& e, std::initializer_list<JetVar> allowed, const char* what) {
  for (JetVar v : e.variables()) {
    bool ok = false;
    for (JetVar a : allowed) ok = ok || a == v;
    if (!ok) throw JetError(std::string(what) + " may not depend on " + v.name());
  }
}

}  // namespace

PdeSpec PdeSpec::third_order(Rational lambda, JetExpr g, int max_order) {
  require_args(g, {JetVar::u(0), JetVar::u(1), JetVar::u(2)}, "G");
  PdeSpec p;
  p.mode_ = Mode::ThirdOrder;
  p.lambda_ = std::move(lambda);
  p.f_ = JetExpr(p.lambda_) * JetExpr::u(0) * JetExpr::u(0) * JetExpr::u(3) + g;
  p.g_ = std::move(g);
  p.max_order_ = max_order;
  return p;
}

PdeSpec PdeSpec::mixed(JetExpr h, int max_order) {
  require_args(h, {JetVar::u(0), JetVar::u(1)}, "H");
  PdeSpec p;
  p.mode_ = Mode::Mixed;
  p.h_ = std::move(h);
  p.max_order_ = max_order;
  return p;
}

JetExpr PdeSpec::dx_power_f(int n) const {
  if (mode_ != Mode::ThirdOrder) throw JetError("D_x^n F is defined for third-order equations only");
  {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    auto it = cache_->dx_f.find(n);
    if (it != cache_->dx_f.end()) return it->second;
  }
  JetExpr value = n == 0 ? f_ : total_dx(dx_power_f(n - 1), this, max_order_);
  std::lock_guard<std::mutex> lock(cache_->mutex);
  return cache_->dx_f.emplace(n, std::move(value)).first->second;
}

JetExpr PdeSpec::u_t(int i) const {
  if (i == 0) return JetExpr::variable(JetVar::w(1));
  {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    auto it = cache_->u_t.find(i);
    if (it != cache_->u_t.end()) return it->second;
  }
  if (i > max_order_) throw OrderError("prolongation u" + std::to_string(i) + ",t exceeds jet order");
  JetExpr value;
  if (mode_ == Mode::Mixed) {
    // u_{i,t} = D_x^{i-1} H
    value = i == 1 ? h_ : total_dx(u_t(i - 1), this, max_order_);
  } else if (i == 1) {
    value = JetExpr::variable(JetVar::v(1));
  } else {
    // u_{2q,t} = w1 - sum_{k<q} D_x^{2k} F,  u_{2q+1,t} = v1 - sum_{k<q} D_x^{2k+1} F
    int q = i / 2;
    bool odd = i % 2 == 1;
    value = JetExpr::variable(odd ? JetVar::v(1) : JetVar::w(1));
    for (int k = 0; k < q; ++k) value -= dx_power_f(2 * k + (odd ? 1 : 0));
  }
  std::lock_guard<std::mutex> lock(cache_->mutex);
  return cache_->u_t.emplace(i, std::move(value)).first->second;
}

namespace {

// D_t^n applied n times, used for v_{k,x} and mixed-mode w_{j,x}.
JetExpr dt_power(JetExpr e, int n, const PdeSpec& pde) {
  for (int i = 0; i < n; ++i) e = total_dt(e, pde);
  return e;
}

}  // namespace

JetExpr total_dx(const JetExpr& e, const PdeSpec* pde, int max_order) {
  JetExpr out = diff_wrt(e, JetVar::x());
  for (JetVar v : e.variables()) {
    JetExpr partial;
    JetExpr next;
    switch (v.kind) {
      case VarKind::X:
      case VarKind::T: continue;
      case VarKind::U:
        if (v.index + 1 > max_order) throw OrderError("D_x of " + v.name() + " exceeds jet order");
        next = JetExpr::u(v.index + 1);
        break;
      case VarKind::W:
        if (!pde) {
          next = JetExpr::variable(JetVar::v(v.index));  // w_{j,x} = v_j
        } else if (pde->mode() == PdeSpec::Mode::Mixed) {
          next = dt_power(pde->u_t(1), v.index - 1, *pde);
        } else {
          next = JetExpr::variable(JetVar::v(v.index));
        }
        break;
      case VarKind::V:
        if (!pde) throw JetError("D_x of " + v.name() + " needs a bound equation");
        if (pde->mode() == PdeSpec::Mode::Mixed) throw JetError("v variables are not used in mixed mode");
        // v_{k,x} = d_t^k u_2 = D_t^{k-1} u_{2,t}
        next = dt_power(pde->u_t(2), v.index - 1, *pde);
        break;
    }
    partial = diff_wrt(e, v);
    if (!partial.is_zero()) out += partial * next;
  }
  return out;
}

JetExpr total_dt(const JetExpr& e, const PdeSpec& pde) {
  JetExpr out = diff_wrt(e, JetVar::t());
  for (JetVar v : e.variables()) {
    JetExpr next;
    switch (v.kind) {
      case VarKind::X:
      case VarKind::T: continue;
      case VarKind::U: next = pde.u_t(v.index); break;
      case VarKind::W:
        if (v.index + 1 > pde.max_order()) throw OrderError("D_t of " + v.name() + " exceeds jet order");
        next = JetExpr::variable(JetVar::w(v.index + 1));
        break;
      case VarKind::V:
        if (pde.mode() == PdeSpec::Mode::Mixed) throw JetError("v variables are not used in mixed mode");
        if (v.index + 1 > pde.max_order()) throw OrderError("D_t of " + v.name() + " exceeds jet order");
        next = JetExpr::variable(JetVar::v(v.index + 1));
        break;
    }
    JetExpr partial = diff_wrt(e, v);
    if (!partial.is_zero()) out += partial * next;
  }
  return out;
}

}  // namespace psskit
