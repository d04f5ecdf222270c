#pragma once

// Shared internals of the nonlinear and linearised solvers.

#include <cmath>
#include <functional>
#include <numbers>

#include "tfw/grid.hpp"
#include "tfw/spectral.hpp"

namespace tfw::detail {

inline constexpr double kFourPi = 4.0 * std::numbers::pi;

/// 4 pi (-lap)^+ rho; the mean of rho is ignored.
inline ScalarField coulomb_potential(ScalarField const& rho) {
  ScalarField phi = inverse_minus_laplacian(rho);
  phi *= kFourPi;
  return phi;
}

/// Second variation of the constrained TFW energy at (u, phi, theta), halved:
///   H d = -lap d + (35/9 u^(4/3) - phi - theta) d + 8 pi u (-lap)^+ (u d).
class TfwHessian {
 public:
  TfwHessian(ScalarField const& u, ScalarField const& phi, double theta);

  ScalarField apply(ScalarField const& d) const;
  /// Multiplicative part 35/9 u^(4/3) - phi - theta.
  ScalarField const& potential() const { return potential_; }
  ScalarField const& u() const { return u_; }

 private:
  ScalarField u_;
  ScalarField potential_;
};

struct PcgResult {
  ScalarField x;
  double relative_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  bool breakdown = false;  // non-positive curvature encountered
};

/// Preconditioned CG for H x = b restricted to {x : <c, x> = 0}. b need not lie
/// in the subspace; only its projection is solved for.
PcgResult projected_pcg(std::function<ScalarField(ScalarField const&)> const& apply_h,
                        std::function<ScalarField(ScalarField const&)> const& apply_m, ScalarField const& constraint,
                        ScalarField const& b, double rel_tol, int max_iter);

/// Removes the component along c: x - <c, x>/<c, c> c.
ScalarField project_out(ScalarField const& x, ScalarField const& c);

}  // namespace tfw::detail
