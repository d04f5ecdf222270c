#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <functional>
#include <iostream>
#include <map>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "artifacts.hpp"
#include "run_config.hpp"
#include "tfw/errors.hpp"
#include "tfw/experiments.hpp"
#include "tfw/field_io.hpp"
#include "tfw/ground_state.hpp"
#include "tfw/linear_response.hpp"
#include "tfw/nuclei.hpp"
#include "tfw/report.hpp"
#include "tfw/site_energy.hpp"
#include "tfw/spectral.hpp"

#ifndef TFW_VERSION
#define TFW_VERSION "unknown"
#endif

namespace tfw::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

// Everything a command adds to the report besides the common header.
struct Outcome {
  json results = json::object();
  std::vector<Check> checks;
};

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string utc_timestamp() {
  std::time_t const now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json vec_json(Vec3 const& v) { return json::array({v[0], v[1], v[2]}); }

json config_json(NuclearConfig const& c) {
  json coords = json::array();
  for (auto const& y : c.coords) coords.push_back(vec_json(y));
  json j{{"R0", c.shape.radius}, {"background", c.background}, {"coords", std::move(coords)}};
  if (!c.charges.empty()) j["charges"] = c.charges;
  return j;
}

ExperimentOptions experiment_options(ParamReader& p, RunConfig const& cfg) {
  ExperimentOptions o;
  o.solver = cfg.solver_options();
  o.r_min = p.number("r_min", -1.0);
  o.r_max_fraction = p.number("r_max_fraction", 0.4);
  if (!(o.r_max_fraction > 0.0 && o.r_max_fraction <= 0.5)) {
    throw ConfigError("'experiment.r_max_fraction' must lie in (0, 0.5]");
  }
  return o;
}

std::size_t nucleus_index(ParamReader& p, std::string const& key, NuclearConfig const& config) {
  int const k = p.integer(key);
  if (k < 0 || static_cast<std::size_t>(k) >= config.size()) {
    throw ConfigError("'experiment." + key + "' = " + std::to_string(k) + " is not a nucleus index (have " +
                      std::to_string(config.size()) + ")");
  }
  return static_cast<std::size_t>(k);
}

SolverOptions warm_start(SolverOptions opts, ScalarField const& u) {
  opts.init = Initialization::supplied;
  opts.initial = u;
  return opts;
}

// Writes the curves and fields of an experiment and returns its JSON with the
// artifact paths filled in.
json emit_experiment(ArtifactWriter& out, ExperimentReport const& report, std::string const& prefix) {
  json j = to_json(report);
  json curves = json::array();
  for (auto const& c : report.curves) {
    std::string const path = "curves/" + safe_file_stem(prefix + c.name) + ".csv";
    out.write_text(path, to_csv(c), "csv");
    curves.push_back({{"name", c.name}, {"path", path}, {"columns", c.columns}, {"rows", c.rows.size()}});
  }
  json fields = json::array();
  for (auto const& f : report.fields) {
    std::string const path = "fields/" + safe_file_stem(prefix + f.name) + ".tfwf";
    out.write_field(path, f.field);
    fields.push_back({{"name", f.name}, {"path", path}});
  }
  j["curves"] = std::move(curves);
  j["fields"] = std::move(fields);
  return j;
}

void append_checks(std::vector<Check>& to, std::vector<Check> const& from, std::string const& prefix) {
  for (Check c : from) {
    c.name = prefix + c.name;
    to.push_back(std::move(c));
  }
}

// ---------------------------------------------------------------- commands

struct Command {
  std::string name;
  std::string description;
  bool needs_nuclei = true;
  std::function<void(RunConfig const&)> validate;
  std::function<Outcome(RunConfig const&, ArtifactWriter&)> run;
};

// solve

Outcome run_solve(RunConfig const& cfg, ArtifactWriter& out) {
  ParamReader(cfg.experiment, "experiment").finish();
  Grid const grid = cfg.make_grid();
  NuclearConfig const config = cfg.make_nuclear_config();
  ScalarField const m = assemble_density(config, grid);
  Outcome o;
  bool converged = true;
  GroundState const state = [&] {
    try {
      return solve_ground_state(m, cfg.solver_options());
    } catch (MaxIterExceeded const& e) {
      converged = false;
      o.results["solver_message"] = e.what();
      return e.best();
    }
  }();
  out.write_field("u.tfwf", state.u);
  out.write_field("phi.tfwf", state.phi);
  out.write_field("m.tfwf", m);
  json s = to_json(state);
  s["energy_field_form"] = number(tfw_energy_field_form(state.u, m));
  s["nuclear_charge"] = number(integrate(m));
  s["grid"] = {{"n", grid.n()}, {"L", grid.length()}};
  s["energy_history"] = state.energy_history;
  out.write_text("state.json", s.dump(2) + "\n", "json");
  o.results["state"] = to_json(state);
  o.checks.push_back(make_check("converged", converged ? 1.0 : 0.0, "==", 1.0));
  return o;
}

// locality

struct LocalityParams {
  NuclearConfig base;
  std::size_t nucleus = 0;
  Vec3 displacement{0.3, 0.0, 0.0};
  std::optional<std::pair<Vec3, double>> charge_scaling;  // site, Z
  ExperimentOptions opts;
};

LocalityParams parse_locality(RunConfig const& cfg) {
  ParamReader p(cfg.experiment, "experiment");
  LocalityParams lp;
  lp.base = cfg.make_nuclear_config();
  lp.nucleus = nucleus_index(p, "nucleus", lp.base);
  if (auto d = p.optional_vec3("displacement")) lp.displacement = *d;
  if (p.has("charge_scaling")) {
    ParamReader cs(p.raw("charge_scaling"), "experiment.charge_scaling");
    double const half = 0.5 * cfg.grid.length;
    Vec3 const site = cs.optional_vec3("site").value_or(Vec3{half, half, half});
    double const z = cs.number("charge");
    cs.finish();
    if (!(z > 0.0)) throw ConfigError("'experiment.charge_scaling.charge' must be positive");
    lp.charge_scaling = std::make_pair(site, z);
  }
  lp.opts = experiment_options(p, cfg);
  p.finish();
  return lp;
}

Outcome run_locality(RunConfig const& cfg, ArtifactWriter& out) {
  LocalityParams const lp = parse_locality(cfg);
  Grid const grid = cfg.make_grid();
  Outcome o;
  ExperimentReport const r = locality_experiment(lp.base, lp.nucleus, lp.displacement, grid, lp.opts);
  o.results["locality"] = emit_experiment(out, r, "");
  o.results["locality"]["displaced_nucleus"] = lp.nucleus;
  o.results["locality"]["displacement"] = vec_json(lp.displacement);
  append_checks(o.checks, r.checks, "");
  if (lp.charge_scaling) {
    auto const& [site, z] = *lp.charge_scaling;
    ExperimentReport const cs = charge_scaling_experiment(lp.base, site, z, grid, lp.opts);
    o.results["charge_scaling"] = emit_experiment(out, cs, "charge_scaling_");
    append_checks(o.checks, cs.checks, "charge_scaling.");
  }
  return o;
}

// screening

struct ScreeningParams {
  double m0 = 1.0;
  double charge = 0.1;
  double radius = 1.0;
  ExperimentOptions opts;
};

ScreeningParams parse_screening(RunConfig const& cfg) {
  ParamReader p(cfg.experiment, "experiment");
  ScreeningParams sp;
  sp.m0 = p.number("m0", 1.0);
  sp.charge = p.number("charge", 0.1);
  sp.radius = p.number("R0", cfg.nuclei ? cfg.nuclei->radius : 1.0);
  sp.opts = experiment_options(p, cfg);
  p.finish();
  if (!(sp.m0 > 0.0)) throw ConfigError("'experiment.m0' must be positive");
  if (sp.charge < 0.0) throw ConfigError("'experiment.charge' must be non-negative");
  if (!(sp.radius > 0.0)) throw ConfigError("'experiment.R0' must be positive");
  return sp;
}

Outcome run_screening(RunConfig const& cfg, ArtifactWriter& out) {
  ScreeningParams const sp = parse_screening(cfg);
  Grid const grid = cfg.make_grid();
  Outcome o;
  ExperimentReport const r = screening_experiment(sp.m0, sp.charge, NucleusShape{sp.radius}, grid, sp.opts);
  o.results["screening"] = emit_experiment(out, r, "");
  o.results["screening_constants"] = to_json(screening_constants(sp.m0));
  append_checks(o.checks, r.checks, "");
  return o;
}

// tdl

struct TdlParams {
  NuclearConfig full;
  Vec3 center{};
  std::vector<double> radii;
  double observation_radius = 0.0;
  ExperimentOptions opts;
};

TdlParams parse_tdl(RunConfig const& cfg) {
  ParamReader p(cfg.experiment, "experiment");
  TdlParams tp;
  tp.full = cfg.make_nuclear_config();
  double const half = 0.5 * cfg.grid.length;
  tp.center = p.optional_vec3("center").value_or(Vec3{half, half, half});
  tp.radii = p.numbers("radii", {});
  if (tp.radii.empty()) throw ConfigError("missing key 'experiment.radii'");
  tp.observation_radius = p.number("observation_radius");
  tp.opts = experiment_options(p, cfg);
  p.finish();
  if (!(tp.observation_radius > 0.0)) throw ConfigError("'experiment.observation_radius' must be positive");
  return tp;
}

Outcome run_tdl(RunConfig const& cfg, ArtifactWriter& out) {
  TdlParams const tp = parse_tdl(cfg);
  Grid const grid = cfg.make_grid();
  Outcome o;
  ExperimentReport const r = tdl_experiment(tp.full, tp.center, tp.radii, tp.observation_radius, grid, tp.opts);
  o.results["tdl"] = emit_experiment(out, r, "");
  o.results["tdl"]["center"] = vec_json(tp.center);
  o.results["tdl"]["radii"] = tp.radii;
  o.results["tdl"]["observation_radius"] = tp.observation_radius;
  append_checks(o.checks, r.checks, "");
  return o;
}

// neutrality

struct NeutralityParams {
  NuclearConfig c1;
  NuclearConfig c2;
  Vec3 center{};
  std::vector<double> radii;
  ExperimentOptions opts;
};

NeutralityParams parse_neutrality(RunConfig const& cfg) {
  ParamReader p(cfg.experiment, "experiment");
  NeutralityParams np;
  np.c1 = cfg.make_nuclear_config();
  ParamReader pert(p.raw("perturbation"), "experiment.perturbation");
  Vec3 site{};
  if (pert.has("nucleus")) {
    int const k = pert.integer("nucleus");
    if (k < 0 || static_cast<std::size_t>(k) >= np.c1.size()) {
      throw ConfigError("'experiment.perturbation.nucleus' = " + std::to_string(k) + " is not a nucleus index");
    }
    Vec3 const d = pert.vec3("displacement");
    np.c2 = perturb(np.c1, static_cast<std::size_t>(k), d, 1.0, cfg.grid.length);
    site = np.c1.coords[static_cast<std::size_t>(k)];
  } else if (pert.has("position")) {
    site = pert.vec3("position");
    double const q = pert.number("charge", 1.0);
    std::vector<Vec3> coords = np.c1.coords;
    std::vector<double> charges = np.c1.charges;
    if (charges.empty()) charges.assign(coords.size(), 1.0);
    coords.push_back(site);
    charges.push_back(q);
    np.c2 = make_config(coords, np.c1.shape, np.c1.background, cfg.grid.length, charges);
  } else {
    throw ConfigError("'experiment.perturbation' needs either 'nucleus' and 'displacement' or 'position'");
  }
  pert.finish();
  np.center = p.optional_vec3("center").value_or(site);
  np.radii = p.numbers("radii", {});
  np.opts = experiment_options(p, cfg);
  p.finish();
  return np;
}

Outcome run_neutrality(RunConfig const& cfg, ArtifactWriter& out) {
  NeutralityParams const np = parse_neutrality(cfg);
  Grid const grid = cfg.make_grid();
  Outcome o;
  ExperimentReport const r = neutrality_experiment(np.c1, np.c2, np.center, np.radii, grid, np.opts);
  o.results["neutrality"] = emit_experiment(out, r, "");
  o.results["neutrality"]["center"] = vec_json(np.center);
  o.results["neutrality"]["configs"] = {config_json(np.c1), config_json(np.c2)};
  append_checks(o.checks, r.checks, "");
  return o;
}

// site-energies

struct SiteParams {
  NuclearConfig config;
  std::vector<EnergyFlavor> flavors;
  double gamma_tilde = 0.5;
};

std::vector<EnergyFlavor> read_flavors(ParamReader& p) {
  std::vector<EnergyFlavor> out;
  for (auto const& name : p.strings("flavors", {"E1", "E2"})) {
    try {
      out.push_back(parse_flavor(name));
    } catch (InvalidArgument const&) {
      throw ConfigError("'experiment.flavors' entry \"" + name + "\" is not E1 or E2");
    }
  }
  if (out.empty()) throw ConfigError("'experiment.flavors' must not be empty");
  return out;
}

double read_gamma_tilde(ParamReader& p) {
  double const g = p.number("gamma_tilde", 0.5);
  if (!(g > 0.0)) throw ConfigError("'experiment.gamma_tilde' must be positive");
  return g;
}

SiteParams parse_site_energies(RunConfig const& cfg) {
  ParamReader p(cfg.experiment, "experiment");
  SiteParams sp;
  sp.config = cfg.make_nuclear_config();
  if (sp.config.size() == 0) throw ConfigError("site energies need at least one nucleus");
  sp.flavors = read_flavors(p);
  sp.gamma_tilde = read_gamma_tilde(p);
  p.finish();
  return sp;
}

double relative_gap(double a, double b) {
  double const scale = std::max(std::abs(a), std::abs(b));
  return scale > 0.0 ? std::abs(a - b) / scale : 0.0;
}

Outcome run_site_energies(RunConfig const& cfg, ArtifactWriter& out) {
  SiteParams const sp = parse_site_energies(cfg);
  Grid const grid = cfg.make_grid();
  ScalarField const m = assemble_density(sp.config, grid);
  GroundState const state = solve_ground_state(m, cfg.solver_options());
  Partition const partition = build_partition(sp.config, grid, sp.gamma_tilde);

  Outcome o;
  double sum_dev = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double s = 0.0;
    for (auto const& w : partition.weights) s += w[i];
    sum_dev = std::max(sum_dev, std::abs(s - 1.0));
  }
  o.results["state"] = to_json(state);
  o.results["partition"] = {{"gamma_tilde", sp.gamma_tilde}, {"max_sum_deviation", number(sum_dev)}};
  o.checks.push_back(make_check("partition_sum_deviation", sum_dev, "<=", 1e-12));

  json reports = json::array();
  std::map<EnergyFlavor, double> integrals;
  for (EnergyFlavor flavor : sp.flavors) {
    SiteEnergyReport const r = site_energies(state, m, partition, flavor);
    integrals[flavor] = r.density_integral;
    Curve c{"site_energies_" + to_string(flavor), {"j", "x", "y", "z", "E_j"}, {}};
    for (std::size_t j = 0; j < r.energies.size(); ++j) {
      auto const& y = sp.config.coords[j];
      c.rows.push_back({static_cast<double>(j), y[0], y[1], y[2], r.energies[j]});
    }
    std::string const path = "curves/" + c.name + ".csv";
    out.write_text(path, to_csv(c), "csv");
    json j = to_json(r);
    j["csv"] = path;
    reports.push_back(std::move(j));
    std::string const f = to_string(flavor);
    o.checks.push_back(make_check(f + ".sum_vs_integral", relative_gap(r.total, r.density_integral), "<=", 1e-9));
    o.checks.push_back(make_check(f + ".sum_vs_energy", relative_gap(r.total, r.reference_energy), "<=", 1e-9));
  }
  o.results["site_energies"] = std::move(reports);
  if (integrals.count(EnergyFlavor::e1) && integrals.count(EnergyFlavor::e2)) {
    o.checks.push_back(make_check("E1_vs_E2_integral",
                                  relative_gap(integrals[EnergyFlavor::e1], integrals[EnergyFlavor::e2]), "<=", 1e-9));
  }
  return o;
}

// forces

struct ForceParams {
  NuclearConfig config;
  std::size_t nucleus = 0;
  std::vector<Vec3> directions;
  std::vector<EnergyFlavor> flavors;
  double gamma_tilde = 0.5;
  double step = 1e-3;
  bool central_difference = true;
};

ForceParams parse_forces(RunConfig const& cfg) {
  ParamReader p(cfg.experiment, "experiment");
  ForceParams fp;
  fp.config = cfg.make_nuclear_config();
  fp.nucleus = nucleus_index(p, "nucleus", fp.config);
  fp.directions = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  if (p.has("directions")) {
    json const& d = p.raw("directions");
    if (!d.is_array() || d.empty()) throw ConfigError("'experiment.directions' must be a non-empty array of [x, y, z]");
    fp.directions.clear();
    for (auto const& v : d) {
      if (!v.is_array() || v.size() != 3) throw ConfigError("'experiment.directions' entries must be [x, y, z]");
      fp.directions.push_back({v[0].get<double>(), v[1].get<double>(), v[2].get<double>()});
    }
  }
  fp.flavors = read_flavors(p);
  fp.gamma_tilde = read_gamma_tilde(p);
  fp.step = p.number("step", 1e-3);
  if (!(fp.step > 0.0)) throw ConfigError("'experiment.step' must be positive");
  if (p.has("central_difference")) {
    json const& v = p.raw("central_difference");
    if (!v.is_boolean()) throw ConfigError("'experiment.central_difference' must be true or false");
    fp.central_difference = v.get<bool>();
  }
  p.finish();
  return fp;
}

void write_force_rows(ArtifactWriter& out, std::string const& path, std::vector<ForceMatrixRow> const& rows,
                      std::vector<std::size_t> const& direction_index) {
  std::string csv = "j,k,direction,distance,value,method\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto const& row = rows[r];
    for (std::size_t j = 0; j < row.entries.size(); ++j) {
      csv += std::to_string(j) + ',' + std::to_string(row.k) + ',' + std::to_string(direction_index[r]) + ',' +
             format_double(row.distances[j]) + ',' + format_double(row.entries[j]) + ',' + to_string(row.method) +
             '\n';
    }
  }
  out.write_text(path, csv, "csv");
}

Outcome run_forces(RunConfig const& cfg, ArtifactWriter& out) {
  ForceParams const fp = parse_forces(cfg);
  Grid const grid = cfg.make_grid();
  ScalarField const m = assemble_density(fp.config, grid);
  GroundState const state = solve_ground_state(m, cfg.solver_options());
  Partition const partition = build_partition(fp.config, grid, fp.gamma_tilde);

  ForceOptions fo;
  fo.step = fp.step;
  fo.solver = warm_start(cfg.solver_options(), state.u);
  fo.linear.tol = std::min(1e-10, cfg.solver.tol);

  Outcome o;
  std::map<EnergyFlavor, std::vector<ForceMatrixRow>> rows;
  std::map<EnergyFlavor, std::vector<std::size_t>> row_direction;
  json totals = json::array();
  double identity_gap = 0.0;
  double method_gap = 0.0;
  std::vector<double> magnitude(fp.config.size(), 0.0);
  std::vector<double> distances;
  for (std::size_t d = 0; d < fp.directions.size(); ++d) {
    Vec3 const& v = fp.directions[d];
    std::vector<ForceMatrixRow> const lin =
        site_forces_linearised(state, m, fp.config, partition, fp.nucleus, v, fp.flavors, fo.linear);
    double const hf = total_force(state, fp.config, fp.nucleus, v);
    json t{{"direction", vec_json(v)}, {"hellmann_feynman", number(hf)}};
    std::vector<double> sums{hf};
    for (std::size_t f = 0; f < fp.flavors.size(); ++f) {
      double const s = compensated_sum(lin[f].entries);
      t["sum_" + to_string(fp.flavors[f])] = number(s);
      sums.push_back(s);
      rows[fp.flavors[f]].push_back(lin[f]);
      row_direction[fp.flavors[f]].push_back(d);
      if (f == 0) {
        distances = lin[f].distances;
        for (std::size_t j = 0; j < magnitude.size(); ++j) magnitude[j] += lin[f].entries[j] * lin[f].entries[j];
      }
      if (fp.central_difference) {
        ForceMatrixRow const cd = site_forces(state, m, fp.config, partition, fp.nucleus, v, fp.flavors[f],
                                              ForceMethod::central_difference, fo);
        for (std::size_t j = 0; j < cd.entries.size(); ++j) {
          method_gap = std::max(method_gap, std::abs(cd.entries[j] - lin[f].entries[j]));
        }
        rows[fp.flavors[f]].push_back(cd);
        row_direction[fp.flavors[f]].push_back(d);
      }
    }
    // Pairwise relative deviation; totals that vanish by symmetry are compared absolutely.
    for (std::size_t a = 0; a < sums.size(); ++a) {
      for (std::size_t b = a + 1; b < sums.size(); ++b) {
        double const scale = std::max({std::abs(sums[a]), std::abs(sums[b]), 1e-10});
        identity_gap = std::max(identity_gap, std::abs(sums[a] - sums[b]) / scale);
      }
    }
    totals.push_back(std::move(t));
  }

  json files = json::array();
  for (EnergyFlavor flavor : fp.flavors) {
    std::string const path = "curves/forces_" + to_string(flavor) + ".csv";
    write_force_rows(out, path, rows[flavor], row_direction[flavor]);
    files.push_back({{"flavor", to_string(flavor)}, {"path", path}});
  }
  o.results["state"] = to_json(state);
  o.results["nucleus"] = fp.nucleus;
  o.results["force_tables"] = std::move(files);
  o.results["totals"] = std::move(totals);
  o.checks.push_back(make_check("total_force_identity", identity_gap, "<=", 1e-6));
  if (fp.central_difference) {
    double const tol = std::max(1e-6, 10.0 * fp.step * fp.step);
    o.results["method_agreement"] = {{"max_difference", number(method_gap)}, {"tolerance", tol}, {"step", fp.step}};
    o.checks.push_back(make_check("method_agreement", method_gap, "<=", tol));
  }

  // Decay of |dE_j/dY_k| over the given directions, first flavour, j != k.
  std::vector<DecayPoint> points;
  Curve curve{"force_magnitude", {"distance", "magnitude"}, {}};
  for (std::size_t j = 0; j < magnitude.size(); ++j) {
    if (j == fp.nucleus) continue;
    double const mag = std::sqrt(magnitude[j]);
    points.push_back({distances[j], mag});
    curve.rows.push_back({distances[j], mag});
  }
  std::sort(curve.rows.begin(), curve.rows.end());
  out.write_text("curves/force_magnitude.csv", to_csv(curve), "csv");
  NamedFit nf{"force_magnitude", std::nullopt, 0.0, 0.5 * std::sqrt(3.0) * grid.length(), {}};
  try {
    nf.fit = decay_fit(points);
  } catch (TooFewPoints const& e) {
    nf.note = e.what();
  }
  o.results["force_decay"] = to_json(nf);
  double const gamma = nf.fit ? nf.fit->gamma : std::nan("");
  double const r2 = nf.fit ? nf.fit->r_squared : std::nan("");
  o.checks.push_back(make_check("force_decay.gamma", gamma, ">", 0.0));
  o.checks.push_back(make_check("force_decay.r_squared", r2, ">=", 0.9));
  return o;
}

// invariance

struct InvarianceParams {
  NuclearConfig config;
  std::vector<EnergyFlavor> flavors;
  double gamma_tilde = 0.5;
};

InvarianceParams parse_invariance(RunConfig const& cfg) {
  ParamReader p(cfg.experiment, "experiment");
  InvarianceParams ip;
  ip.config = cfg.make_nuclear_config();
  if (ip.config.size() == 0) throw ConfigError("invariance needs at least one nucleus");
  ip.flavors = read_flavors(p);
  ip.gamma_tilde = read_gamma_tilde(p);
  p.finish();
  return ip;
}

Outcome run_invariance(RunConfig const& cfg, ArtifactWriter& out) {
  InvarianceParams const ip = parse_invariance(cfg);
  Grid const grid = cfg.make_grid();
  Outcome o;
  json list = json::array();
  for (EnergyFlavor flavor : ip.flavors) {
    InvarianceReport const r = invariance_suite(ip.config, grid, cfg.solver_options(), flavor, ip.gamma_tilde);
    list.push_back(to_json(r));
    std::string const f = to_string(flavor);
    o.checks.push_back(make_check(f + ".permutation", r.permutation, "==", 0.0));
    o.checks.push_back(make_check(f + ".translation", r.translation, "<=", 1e-8));
    o.checks.push_back(make_check(f + ".rotation", r.rotation, "<=", 1e-8));
  }
  (void)out;
  o.results["invariance"] = std::move(list);
  return o;
}

// linearise

struct LineariseParams {
  NuclearConfig config;
  std::size_t nucleus = 0;
  Vec3 direction{1.0, 0.0, 0.0};
  std::vector<double> steps;
};

LineariseParams parse_linearise(RunConfig const& cfg) {
  ParamReader p(cfg.experiment, "experiment");
  LineariseParams lp;
  lp.config = cfg.make_nuclear_config();
  lp.nucleus = nucleus_index(p, "nucleus", lp.config);
  if (auto d = p.optional_vec3("direction")) lp.direction = *d;
  lp.steps = p.numbers("fd_steps", {0.2, 0.1, 0.05, 0.025});
  p.finish();
  if (lp.steps.size() < 2) throw ConfigError("'experiment.fd_steps' needs at least two steps");
  for (double h : lp.steps) {
    if (!(h > 0.0)) throw ConfigError("'experiment.fd_steps' must be positive");
  }
  return lp;
}

Outcome run_linearise(RunConfig const& cfg, ArtifactWriter& out) {
  LineariseParams const lp = parse_linearise(cfg);
  Grid const grid = cfg.make_grid();
  ScalarField const m = assemble_density(lp.config, grid);
  SolverOptions const so = cfg.solver_options();
  GroundState const state = solve_ground_state(m, so);
  LinearOptions lo;
  lo.tol = std::min(1e-10, cfg.solver.tol);
  ScalarField const mdot = density_derivative(lp.config, grid, lp.nucleus, lp.direction);
  LinearisedSolution const lin = solve_linearised(state, mdot, lo);
  SolverOptions const warm = warm_start(so, state.u);
  auto solve_at = [&](double h) {
    NuclearConfig const moved = perturb(lp.config, lp.nucleus, lp.direction, h, grid.length());
    return solve_ground_state(assemble_density(moved, grid), warm).u;
  };
  std::vector<FdConsistencyRow> const rows = fd_consistency(solve_at, state, lin, lp.steps);

  Outcome o;
  out.write_field("fields/u_dot.tfwf", lin.u_dot);
  out.write_field("fields/phi_dot.tfwf", lin.phi_dot);
  out.write_field("fields/m_dot.tfwf", mdot);
  Curve curve{"fd_consistency", {"step", "error", "ratio"}, {}};
  json table = json::array();
  for (auto const& r : rows) {
    curve.rows.push_back({r.step, r.error, r.ratio});
    table.push_back(to_json(r));
  }
  out.write_text("curves/fd_consistency.csv", to_csv(curve), "csv");
  o.results["state"] = to_json(state);
  o.results["linearised"] = {{"theta_dot", number(lin.theta_dot)},
                             {"residual", number(lin.residual)},
                             {"iterations", lin.iterations},
                             {"nucleus", lp.nucleus},
                             {"direction", vec_json(lp.direction)}};
  o.results["fd_consistency"] = std::move(table);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::string const name = "ratio_h" + format_double(rows[i].step);
    o.checks.push_back(make_check(name + ".min", rows[i].ratio, ">=", 0.35));
    o.checks.push_back(make_check(name + ".max", rows[i].ratio, "<=", 0.65));
  }
  return o;
}

std::vector<Command> const& commands() {
  static std::vector<Command> const list = [] {
    std::vector<Command> c;
    c.push_back({"solve", "Ground state of the configured nuclei", true, [](RunConfig const& r) {
                   ParamReader(r.experiment, "experiment").finish();
                   r.make_nuclear_config();
                 }, run_solve});
    c.push_back({"locality", "Decay of the response to one displaced nucleus", true,
                 [](RunConfig const& r) { parse_locality(r); }, run_locality});
    c.push_back({"screening", "Impurity in jellium against the linear screening rate", false,
                 [](RunConfig const& r) { parse_screening(r); }, run_screening});
    c.push_back({"tdl", "Errors from deleting far nuclei", true, [](RunConfig const& r) { parse_tdl(r); }, run_tdl});
    c.push_back({"neutrality", "Charge of the induced density in growing balls", true,
                 [](RunConfig const& r) { parse_neutrality(r); }, run_neutrality});
    c.push_back({"site-energies", "Site energies of the configured nuclei", true,
                 [](RunConfig const& r) { parse_site_energies(r); }, run_site_energies});
    c.push_back({"forces", "Site-energy derivatives, two ways, and their decay", true,
                 [](RunConfig const& r) { parse_forces(r); }, run_forces});
    c.push_back({"invariance", "Permutation, translation and rotation of site energies", true,
                 [](RunConfig const& r) { parse_invariance(r); }, run_invariance});
    c.push_back({"linearise", "Linear response against finite differences", true,
                 [](RunConfig const& r) { parse_linearise(r); }, run_linearise});
    return c;
  }();
  return list;
}

Command const* find_command(std::string const& name) {
  for (auto const& c : commands()) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

void validate_for(Command const& command, RunConfig const& cfg) {
  if (!cfg.experiment_name.empty() && cfg.experiment_name != command.name) {
    throw ConfigError("'experiment.name' is \"" + cfg.experiment_name + "\" but the command is " + command.name);
  }
  if (command.needs_nuclei && !cfg.nuclei) throw ConfigError(command.name + " needs a 'nuclei' block");
  cfg.make_grid();
  command.validate(cfg);
}

struct Flags {
  std::string config;
  std::string output;
  int threads = 0;
  std::uint64_t seed = 0;
};

fs::path output_directory(std::string const& command, Flags const& flags, CLI::App const& sub,
                          RunConfig const& cfg) {
  if (sub.count("--output")) return flags.output;
  if (cfg.output) return *cfg.output;
  if (char const* root = std::getenv("TFW_OUTPUT_DIR"); root && *root) return fs::path(root) / command;
  return fs::path("tfw-output") / command;
}

int run_command(Command const& command, Flags const& flags, CLI::App const& sub) {
  RunConfig cfg = load_run_config(flags.config);
  if (sub.count("--seed")) cfg.seed = flags.seed;
  if (sub.count("--threads")) cfg.threads = flags.threads;
  if (!cfg.threads) cfg.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (*cfg.threads < 1) throw ConfigError("--threads must be at least 1");
  validate_for(command, cfg);
  set_fft_threads(*cfg.threads);

  fs::path const dir = output_directory(command.name, flags, sub, cfg);
  cfg.output = dir.string();
  ArtifactWriter out(dir);

  std::string const started = utc_timestamp();
  auto const t0 = Clock::now();
  Outcome o = command.run(cfg, out);
  double const runtime = std::chrono::duration<double>(Clock::now() - t0).count();

  bool passed = true;
  json checks = json::array();
  for (auto const& c : o.checks) {
    passed = passed && c.passed;
    checks.push_back(to_json(c));
  }
  json report{{"tool", "tfw"},
              {"version", TFW_VERSION},
              {"command", command.name},
              {"started_at", started},
              {"runtime_seconds", runtime},
              {"config", to_json(cfg)},
              {"thresholds", "pass/fail thresholds are acceptance choices of this tool"},
              {"passed", passed},
              {"checks", std::move(checks)},
              {"results", std::move(o.results)}};
  out.write_report(std::move(report));

  for (auto const& c : o.checks) {
    std::cout << (c.passed ? "pass  " : "FAIL  ") << c.name << "  " << format_double(c.value) << ' ' << c.relation
              << ' ' << format_double(c.threshold) << '\n';
  }
  std::cout << command.name << ": " << (passed ? "passed" : "threshold failure") << ", report "
            << (dir / "report.json").string() << '\n';
  return passed ? kExitOk : kExitThresholdFailure;
}

int validate_config(std::string const& path) {
  RunConfig const cfg = load_run_config(path);
  cfg.make_grid();
  if (!cfg.experiment_name.empty()) {
    Command const* command = find_command(cfg.experiment_name);
    if (!command) throw ConfigError("unknown experiment name \"" + cfg.experiment_name + "\"");
    validate_for(*command, cfg);
  } else if (cfg.nuclei) {
    cfg.make_nuclear_config();
  }
  std::cout << path << ": valid";
  if (!cfg.experiment_name.empty()) std::cout << " (" << cfg.experiment_name << ")";
  std::cout << '\n';
  return kExitOk;
}

}  // namespace

int cli_main(int argc, char const* const* argv) {
  CLI::App app{"Thomas-Fermi-von Weizsaecker ground states, responses and site energies", "tfw"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(TFW_VERSION));

  Flags flags;
  std::map<CLI::App const*, Command const*> by_app;
  for (auto const& command : commands()) {
    CLI::App* sub = app.add_subcommand(command.name, command.description);
    sub->add_option("config,-c,--config", flags.config, "Run configuration (JSON)")->required();
    sub->add_option("-o,--output", flags.output, "Output directory (default $TFW_OUTPUT_DIR/<command>)");
    sub->add_option("--threads", flags.threads, "Cap on internal threads (default: available cores)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", flags.seed, "Seed for randomized initial guesses");
    by_app[sub] = &command;
  }
  std::string validate_path;
  CLI::App* validate = app.add_subcommand("validate-config", "Check a configuration against the schema");
  validate->add_option("config", validate_path, "Run configuration (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (CLI::CallForHelp const& e) {
    return app.exit(e);
  } catch (CLI::CallForAllHelp const& e) {
    return app.exit(e);
  } catch (CLI::CallForVersion const& e) {
    return app.exit(e);
  } catch (CLI::ParseError const& e) {
    std::cerr << "tfw: " << e.what() << "\n\n" << app.help() << '\n' << schema_help();
    return kExitError;
  }

  try {
    if (validate->parsed()) return validate_config(validate_path);
    for (auto const& [sub, command] : by_app) {
      if (sub->parsed()) return run_command(*command, flags, *sub);
    }
  } catch (ConfigError const& e) {
    std::cerr << "tfw: configuration error: " << e.what() << '\n';
    return kExitError;
  } catch (std::exception const& e) {
    std::cerr << "tfw: error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace tfw::cli
