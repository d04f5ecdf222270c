#include "tfw/report.hpp"

#include <charconv>
#include <cmath>

namespace tfw {

using nlohmann::json;

namespace {

// JSON has no NaN or infinity; those become null.
json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json complex_json(std::complex<double> z) { return json{{"re", number(z.real())}, {"im", number(z.imag())}}; }

}  // namespace

std::string format_double(double x) {
  char buf[32];
  auto const res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

json to_json(DecayFit const& fit) {
  json pts = json::array();
  for (auto const& p : fit.points) pts.push_back({number(p.r), number(p.y)});
  return json{{"C", number(fit.c)},       {"gamma", number(fit.gamma)}, {"r_squared", number(fit.r_squared)},
              {"floor", number(fit.floor)}, {"degenerate", fit.degenerate}, {"points", std::move(pts)}};
}

json to_json(NamedFit const& fit) {
  json j{{"name", fit.name}, {"r_min", number(fit.r_min)}, {"r_max", number(fit.r_max)}};
  j["fit"] = fit.fit ? to_json(*fit.fit) : json(nullptr);
  if (!fit.note.empty()) j["note"] = fit.note;
  return j;
}

json to_json(Check const& check) {
  return json{{"name", check.name},
              {"value", number(check.value)},
              {"relation", check.relation},
              {"threshold", number(check.threshold)},
              {"passed", check.passed}};
}

json to_json(ExperimentReport const& report) {
  json j;
  j["experiment"] = report.name;
  j["passed"] = report.passed();
  j["trivial"] = report.trivial;
  j["solver_tol"] = number(report.solver_tol);
  j["noise_floor"] = number(report.noise_floor);
  j["runtime_seconds"] = number(report.runtime_seconds);
  json scalars = json::object();
  for (auto const& [k, v] : report.scalars) scalars[k] = number(v);
  j["scalars"] = std::move(scalars);
  j["fits"] = json::array();
  for (auto const& f : report.fits) j["fits"].push_back(to_json(f));
  j["checks"] = json::array();
  for (auto const& c : report.checks) j["checks"].push_back(to_json(c));
  return j;
}

json to_json(GroundState const& state) {
  BoundsDiagnostic const b = bounds_diagnostic(state);
  return json{{"theta", number(state.theta)},
              {"energy", number(state.energy)},
              {"residual_u", number(state.residual_u)},
              {"residual_phi", number(state.residual_phi)},
              {"iterations", state.iterations},
              {"electron_charge", number(inner(state.u, state.u))},
              {"gauge", "phi has zero cell mean; phi + theta is the full potential"},
              {"bounds",
               {{"u_min", number(b.u_min)},
                {"u_max", number(b.u_max)},
                {"phi_min", number(b.phi_min)},
                {"phi_max", number(b.phi_max)},
                {"solovej_c", number(b.solovej_c)}}}};
}

json to_json(ScreeningConstants const& sc) {
  return json{{"u0", number(sc.u0)},
              {"C_W", number(sc.c_w)},
              {"a", number(sc.a)},
              {"c", number(sc.c)},
              {"t_plus", complex_json(sc.t_plus)},
              {"t_minus", complex_json(sc.t_minus)},
              {"kappa_plus", complex_json(sc.kappa_plus)},
              {"kappa_minus", complex_json(sc.kappa_minus)},
              {"alpha", number(sc.alpha)},
              {"beta", complex_json(sc.beta)},
              {"decay_rate", number(sc.decay_rate)},
              {"oscillation_wavenumber", number(sc.oscillation_wavenumber)},
              {"oscillatory", sc.oscillatory}};
}

json to_json(SiteEnergyReport const& report) {
  return json{{"flavor", to_string(report.flavor)},
              {"energies", report.energies},
              {"total", number(report.total)},
              {"density_integral", number(report.density_integral)},
              {"reference_energy", number(report.reference_energy)}};
}

json to_json(ForceMatrixRow const& row) {
  return json{{"k", row.k},
              {"direction", row.direction},
              {"method", to_string(row.method)},
              {"step", number(row.step)},
              {"entries", row.entries},
              {"distances", row.distances}};
}

json to_json(InvarianceReport const& report) {
  return json{{"flavor", to_string(report.flavor)},
              {"energies", report.energies},
              {"permutation", number(report.permutation)},
              {"translation", number(report.translation)},
              {"rotation", number(report.rotation)}};
}

json to_json(FdConsistencyRow const& row) {
  return json{{"step", number(row.step)}, {"error", number(row.error)}, {"ratio", number(row.ratio)}};
}

std::string to_csv(Curve const& curve) {
  std::string out;
  for (std::size_t c = 0; c < curve.columns.size(); ++c) {
    if (c) out += ',';
    out += curve.columns[c];
  }
  out += '\n';
  for (auto const& row : curve.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += format_double(row[c]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace tfw
