#include "run_config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "tfw/errors.hpp"

namespace tfw::cli {

using nlohmann::json;

namespace {

void reject_unknown(json const& obj, std::string const& where, std::set<std::string> const& allowed) {
  for (auto const& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      std::string const path = where.empty() ? key : where + "." + key;
      throw ConfigError("unknown key '" + path + "'");
    }
  }
}

json const& require_object(json const& j, std::string const& where) {
  if (!j.is_object()) throw ConfigError("'" + where + "' must be an object");
  return j;
}

double get_number(json const& obj, std::string const& key, std::string const& where) {
  if (!obj.contains(key)) throw ConfigError("missing key '" + where + "." + key + "'");
  json const& v = obj.at(key);
  if (!v.is_number()) throw ConfigError("'" + where + "." + key + "' must be a number");
  return v.get<double>();
}

int get_integer(json const& v, std::string const& path) {
  if (!v.is_number_integer()) throw ConfigError("'" + path + "' must be an integer");
  return v.get<int>();
}

Vec3 get_vec3(json const& v, std::string const& path) {
  if (!v.is_array() || v.size() != 3 || !std::all_of(v.begin(), v.end(), [](json const& x) { return x.is_number(); })) {
    throw ConfigError("'" + path + "' must be an array of three numbers");
  }
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

NucleiBlock parse_nuclei(json const& j, double length) {
  require_object(j, "nuclei");
  reject_unknown(j, "nuclei", {"R0", "background", "coords", "lattice", "charges"});
  NucleiBlock b;
  if (j.contains("R0")) b.radius = get_number(j, "R0", "nuclei");
  if (j.contains("background")) b.background = get_number(j, "background", "nuclei");
  if (j.contains("coords") && j.contains("lattice")) {
    throw ConfigError("'nuclei' takes either 'coords' or 'lattice', not both");
  }
  if (j.contains("coords")) {
    json const& c = j.at("coords");
    if (!c.is_array()) throw ConfigError("'nuclei.coords' must be an array of [x, y, z]");
    for (std::size_t i = 0; i < c.size(); ++i) {
      b.coords.push_back(get_vec3(c[i], "nuclei.coords[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("lattice")) {
    json const& lat = require_object(j.at("lattice"), "nuclei.lattice");
    reject_unknown(lat, "nuclei.lattice", {"cells", "origin"});
    if (!lat.contains("cells")) throw ConfigError("missing key 'nuclei.lattice.cells'");
    int const cells = get_integer(lat.at("cells"), "nuclei.lattice.cells");
    Vec3 const origin = lat.contains("origin") ? get_vec3(lat.at("origin"), "nuclei.lattice.origin") : Vec3{0, 0, 0};
    if (cells < 1) throw ConfigError("'nuclei.lattice.cells' must be at least 1");
    b.coords = cubic_lattice(cells, length, origin);
  }
  if (j.contains("charges")) {
    json const& q = j.at("charges");
    if (!q.is_array()) throw ConfigError("'nuclei.charges' must be an array of numbers");
    for (auto const& v : q) {
      if (!v.is_number()) throw ConfigError("'nuclei.charges' must be an array of numbers");
      b.charges.push_back(v.get<double>());
    }
    if (b.charges.size() != b.coords.size()) {
      throw ConfigError("'nuclei.charges' has " + std::to_string(b.charges.size()) + " entries for " +
                        std::to_string(b.coords.size()) + " nuclei");
    }
  }
  if (!(b.radius > 0.0)) throw ConfigError("'nuclei.R0' must be positive");
  if (b.background < 0.0) throw ConfigError("'nuclei.background' must be non-negative");
  return b;
}

SolverBlock parse_solver(json const& j) {
  require_object(j, "solver");
  reject_unknown(j, "solver", {"tol", "max_iter", "init"});
  SolverBlock s;
  if (j.contains("tol")) s.tol = get_number(j, "tol", "solver");
  if (j.contains("max_iter")) s.max_iter = get_integer(j.at("max_iter"), "solver.max_iter");
  if (j.contains("init")) {
    if (!j.at("init").is_string()) throw ConfigError("'solver.init' must be a string");
    std::string const init = j.at("init").get<std::string>();
    if (init == "uniform") s.init = Initialization::uniform;
    else if (init == "randomized") s.init = Initialization::randomized;
    else throw ConfigError("'solver.init' must be \"uniform\" or \"randomized\", got \"" + init + "\"");
  }
  if (!(s.tol > 0.0)) throw ConfigError("'solver.tol' must be positive");
  if (s.max_iter < 1) throw ConfigError("'solver.max_iter' must be at least 1");
  return s;
}

}  // namespace

Grid RunConfig::make_grid() const {
  try {
    return Grid(grid.n, grid.length);
  } catch (InvalidArgument const& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
}

NuclearConfig RunConfig::make_nuclear_config() const {
  if (!nuclei) throw ConfigError("this command needs a 'nuclei' block");
  return make_config(nuclei->coords, NucleusShape{nuclei->radius}, nuclei->background, grid.length, nuclei->charges);
}

SolverOptions RunConfig::solver_options() const {
  SolverOptions o;
  o.tol = solver.tol;
  o.max_iter = solver.max_iter;
  o.init = solver.init;
  o.seed = seed;
  return o;
}

RunConfig parse_run_config(json const& j) {
  require_object(j, "configuration");
  reject_unknown(j, "", {"grid", "nuclei", "solver", "experiment", "output", "seed", "threads"});
  RunConfig c;
  if (!j.contains("grid")) throw ConfigError("missing key 'grid'");
  json const& g = require_object(j.at("grid"), "grid");
  reject_unknown(g, "grid", {"n", "L"});
  if (!g.contains("n")) throw ConfigError("missing key 'grid.n'");
  c.grid.n = get_integer(g.at("n"), "grid.n");
  c.grid.length = get_number(g, "L", "grid");
  if (c.grid.n < 4 || c.grid.n % 2 != 0) throw ConfigError("'grid.n' must be even and at least 4");
  if (!(c.grid.length > 0.0)) throw ConfigError("'grid.L' must be positive");

  if (j.contains("nuclei")) c.nuclei = parse_nuclei(j.at("nuclei"), c.grid.length);
  if (j.contains("solver")) c.solver = parse_solver(j.at("solver"));
  if (j.contains("experiment")) {
    json const& e = require_object(j.at("experiment"), "experiment");
    if (e.contains("name")) {
      if (!e.at("name").is_string()) throw ConfigError("'experiment.name' must be a string");
      c.experiment_name = e.at("name").get<std::string>();
    }
    c.experiment = e;
    c.experiment.erase("name");
  }
  if (j.contains("output")) {
    if (!j.at("output").is_string()) throw ConfigError("'output' must be a string");
    c.output = j.at("output").get<std::string>();
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ConfigError("'seed' must be a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("threads")) {
    c.threads = get_integer(j.at("threads"), "threads");
    if (*c.threads < 1) throw ConfigError("'threads' must be at least 1");
  }
  return c;
}

RunConfig load_run_config(std::filesystem::path const& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (json::parse_error const& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  return parse_run_config(j);
}

json to_json(RunConfig const& c) {
  json j;
  j["grid"] = {{"n", c.grid.n}, {"L", c.grid.length}};
  if (c.nuclei) {
    json coords = json::array();
    for (auto const& y : c.nuclei->coords) coords.push_back({y[0], y[1], y[2]});
    j["nuclei"] = {{"R0", c.nuclei->radius}, {"background", c.nuclei->background}, {"coords", std::move(coords)}};
    if (!c.nuclei->charges.empty()) j["nuclei"]["charges"] = c.nuclei->charges;
  }
  j["solver"] = {{"tol", c.solver.tol},
                 {"max_iter", c.solver.max_iter},
                 {"init", c.solver.init == Initialization::randomized ? "randomized" : "uniform"}};
  json e = c.experiment;
  if (!c.experiment_name.empty()) e["name"] = c.experiment_name;
  j["experiment"] = std::move(e);
  if (c.output) j["output"] = *c.output;
  j["seed"] = c.seed;
  if (c.threads) j["threads"] = *c.threads;
  return j;
}

std::string schema_help() {
  return R"(Run configuration (JSON). Unknown keys are rejected.

  {
    "grid":   { "n": 64, "L": 12.8 },                      required; n even, n >= 4
    "nuclei": {                                             required except for screening
      "R0": 1.0, "background": 0.0,
      "coords": [[x, y, z], ...]    or    "lattice": { "cells": 3, "origin": [x, y, z] },
      "charges": [q, ...]                                   optional, one per nucleus
    },
    "solver": { "tol": 1e-11, "max_iter": 50000, "init": "uniform" | "randomized" },
    "experiment": { "name": "...", <parameters of the command> },
    "output": "dir", "seed": 0, "threads": 4
  }

Experiment parameters by command:
  solve          (none)
  locality       nucleus, displacement [3], r_min, r_max_fraction,
                 charge_scaling {charge, site [3]} (optional)
  screening      m0, charge, R0, r_min, r_max_fraction
  tdl            center [3], radii [...], observation_radius, r_min, r_max_fraction
  neutrality     perturbation {nucleus, displacement [3]} or {position [3], charge},
                 center [3], radii [...], r_min, r_max_fraction
  site-energies  flavors ["E1", "E2"], gamma_tilde
  forces         nucleus, directions [[3], ...], flavors, gamma_tilde, step,
                 central_difference (bool)
  invariance     flavors, gamma_tilde
  linearise      nucleus, direction [3], fd_steps [...]

Flags --output, --threads and --seed override the file; TFW_OUTPUT_DIR sets the
default output root.
)";
}

ParamReader::ParamReader(json const& block, std::string prefix) : block_(block), prefix_(std::move(prefix)) {
  require_object(block_, prefix_);
}

json const& ParamReader::find(std::string const& key) {
  used_.push_back(key);
  if (!block_.contains(key)) throw ConfigError("missing key '" + prefix_ + "." + key + "'");
  return block_.at(key);
}

bool ParamReader::has(std::string const& key) const { return block_.contains(key); }

json const& ParamReader::raw(std::string const& key) { return find(key); }

double ParamReader::number(std::string const& key) {
  json const& v = find(key);
  if (!v.is_number()) throw ConfigError("'" + prefix_ + "." + key + "' must be a number");
  return v.get<double>();
}

double ParamReader::number(std::string const& key, double fallback) {
  used_.push_back(key);
  return has(key) ? number(key) : fallback;
}

int ParamReader::integer(std::string const& key) { return get_integer(find(key), prefix_ + "." + key); }

int ParamReader::integer(std::string const& key, int fallback) {
  used_.push_back(key);
  return has(key) ? integer(key) : fallback;
}

std::string ParamReader::string(std::string const& key, std::string const& fallback) {
  used_.push_back(key);
  if (!has(key)) return fallback;
  json const& v = find(key);
  if (!v.is_string()) throw ConfigError("'" + prefix_ + "." + key + "' must be a string");
  return v.get<std::string>();
}

Vec3 ParamReader::vec3(std::string const& key) { return get_vec3(find(key), prefix_ + "." + key); }

std::optional<Vec3> ParamReader::optional_vec3(std::string const& key) {
  used_.push_back(key);
  if (!has(key)) return std::nullopt;
  return vec3(key);
}

std::vector<double> ParamReader::numbers(std::string const& key, std::vector<double> fallback) {
  used_.push_back(key);
  if (!has(key)) return fallback;
  json const& v = find(key);
  if (!v.is_array()) throw ConfigError("'" + prefix_ + "." + key + "' must be an array of numbers");
  std::vector<double> out;
  for (auto const& x : v) {
    if (!x.is_number()) throw ConfigError("'" + prefix_ + "." + key + "' must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<std::string> ParamReader::strings(std::string const& key, std::vector<std::string> fallback) {
  used_.push_back(key);
  if (!has(key)) return fallback;
  json const& v = find(key);
  if (!v.is_array()) throw ConfigError("'" + prefix_ + "." + key + "' must be an array of strings");
  std::vector<std::string> out;
  for (auto const& x : v) {
    if (!x.is_string()) throw ConfigError("'" + prefix_ + "." + key + "' must be an array of strings");
    out.push_back(x.get<std::string>());
  }
  return out;
}

void ParamReader::finish() const {
  for (auto const& [key, value] : block_.items()) {
    if (std::find(used_.begin(), used_.end(), key) == used_.end()) {
      throw ConfigError("unknown key '" + prefix_ + "." + key + "'");
    }
  }
}

}  // namespace tfw::cli
