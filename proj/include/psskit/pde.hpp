#pragma once

// Total derivatives on the jet space and the prolongation of
//   u_{0,t} - u_{2,t} = lambda u0^2 u3 + G(u0, u1, u2)     (third-order mode)
// or of a mixed second-order equation u_{1,t} = H(u0, u1)   (mixed mode, used
// for the sine-Gordon fixture).

#include <map>
#include <memory>
#include <mutex>

#include "psskit/jet.hpp"

namespace psskit {

class PdeSpec {
 public:
  enum class Mode { ThirdOrder, Mixed };

  /// The trivial third-order equation (lambda = 0, G = 0).
  PdeSpec() = default;

  static PdeSpec third_order(Rational lambda, JetExpr g, int max_order = kDefaultJetOrder);
  static PdeSpec mixed(JetExpr h, int max_order = kDefaultJetOrder);

  Mode mode() const { return mode_; }
  const Rational& lambda() const { return lambda_; }
  const JetExpr& g() const { return g_; }
  const JetExpr& h() const { return h_; }
  /// F = lambda u0^2 u3 + G, the right-hand side in third-order mode.
  const JetExpr& f() const { return f_; }
  int max_order() const { return max_order_; }

  /// u_{i,t} rewritten into the u/w/v alphabet (cached, thread-safe).
  JetExpr u_t(int i) const;
  /// D_x^n F (third-order mode only; cached).
  JetExpr dx_power_f(int n) const;

 private:
  Mode mode_ = Mode::ThirdOrder;
  Rational lambda_;
  JetExpr g_, h_, f_;
  int max_order_ = kDefaultJetOrder;

  struct Cache {
    std::mutex mutex;
    std::map<int, JetExpr> u_t;
    std::map<int, JetExpr> dx_f;
  };
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

/// D_x. Without a PDE, expressions containing v_k cannot be differentiated.
JetExpr total_dx(const JetExpr& e, const PdeSpec* pde = nullptr, int max_order = kDefaultJetOrder);
inline JetExpr total_dx(const JetExpr& e, const PdeSpec& pde) { return total_dx(e, &pde, pde.max_order()); }

/// D_t with every u_{i,t} substituted from the prolongation.
JetExpr total_dt(const JetExpr& e, const PdeSpec& pde);

}  // namespace psskit
