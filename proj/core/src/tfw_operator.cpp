#include "tfw_operator.hpp"

#include <algorithm>

namespace tfw::detail {

TfwHessian::TfwHessian(ScalarField const& u, ScalarField const& phi, double theta) : u_(u), potential_(u.grid()) {
  for (std::size_t i = 0; i < u.size(); ++i) {
    potential_[i] = (35.0 / 9.0) * std::pow(std::abs(u[i]), 4.0 / 3.0) - phi[i] - theta;
  }
}

ScalarField TfwHessian::apply(ScalarField const& d) const {
  ScalarField out = minus_laplacian(d);
  ScalarField ud = multiply(u_, d);
  ScalarField const g = inverse_minus_laplacian(ud);
  double const c = 2.0 * kFourPi;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += potential_[i] * d[i] + c * u_[i] * g[i];
  return out;
}

ScalarField project_out(ScalarField const& x, ScalarField const& c) {
  double const cc = inner(c, c);
  if (cc == 0.0) return x;
  double const a = inner(c, x) / cc;
  ScalarField out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= a * c[i];
  return out;
}

PcgResult projected_pcg(std::function<ScalarField(ScalarField const&)> const& apply_h,
                        std::function<ScalarField(ScalarField const&)> const& apply_m, ScalarField const& constraint,
                        ScalarField const& b, double rel_tol, int max_iter) {
  PcgResult result{ScalarField(b.grid()), 0.0, 0, false, false};
  ScalarField r = project_out(b, constraint);
  double const bnorm = l2_norm(r);
  if (bnorm == 0.0) {
    result.converged = true;
    return result;
  }
  ScalarField z = project_out(apply_m(r), constraint);
  ScalarField p = z;
  double rz = inner(r, z);
  double best = 1.0;
  int since_best = 0;
  for (int it = 1; it <= max_iter; ++it) {
    ScalarField q = project_out(apply_h(p), constraint);
    double const pq = inner(p, q);
    if (!(pq > 0.0)) {
      result.breakdown = true;
      break;
    }
    double const alpha = rz / pq;
    for (std::size_t i = 0; i < r.size(); ++i) {
      result.x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    result.iterations = it;
    result.relative_residual = l2_norm(r) / bnorm;
    if (result.relative_residual <= rel_tol) {
      result.converged = true;
      break;
    }
    if (result.relative_residual < 0.5 * best) {
      best = result.relative_residual;
      since_best = 0;
    } else if (++since_best > 200) {
      break;
    }
    z = project_out(apply_m(r), constraint);
    double const rz_new = inner(r, z);
    double const beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
  }
  // Keep the iterate exactly on the constraint.
  result.x = project_out(result.x, constraint);
  return result;
}

}  // namespace tfw::detail
