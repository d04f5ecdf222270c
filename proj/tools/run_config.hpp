#pragma once

// Run configuration: JSON schema, validation and conversion to library types.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tfw/ground_state.hpp"
#include "tfw/grid.hpp"
#include "tfw/nuclei.hpp"

namespace tfw::cli {

struct GridBlock {
  int n = 0;
  double length = 0.0;
};

struct NucleiBlock {
  double radius = 1.0;
  double background = 0.0;
  std::vector<Vec3> coords;
  std::vector<double> charges;
};

struct SolverBlock {
  double tol = 1e-11;
  int max_iter = 50000;
  Initialization init = Initialization::uniform;
};

struct RunConfig {
  GridBlock grid;
  std::optional<NucleiBlock> nuclei;
  SolverBlock solver;
  std::string experiment_name;
  /// Experiment parameters, validated per experiment when the run starts.
  nlohmann::json experiment = nlohmann::json::object();
  std::optional<std::string> output;
  std::uint64_t seed = 0;
  std::optional<int> threads;

  Grid make_grid() const;
  /// Requires a nuclei block.
  NuclearConfig make_nuclear_config() const;
  SolverOptions solver_options() const;
};

/// Validates against the schema; unknown keys raise ConfigError naming the key.
RunConfig parse_run_config(nlohmann::json const& j);
RunConfig load_run_config(std::filesystem::path const& path);

/// Normalised JSON echo of a configuration, embedded in every report.
nlohmann::json to_json(RunConfig const& config);

/// Human-readable schema, printed on usage errors.
std::string schema_help();

/// Reads a required or optional key of an experiment block; every key read is
/// recorded so that leftover keys can be rejected.
class ParamReader {
 public:
  ParamReader(nlohmann::json const& block, std::string prefix);

  double number(std::string const& key);
  double number(std::string const& key, double fallback);
  int integer(std::string const& key);
  int integer(std::string const& key, int fallback);
  std::string string(std::string const& key, std::string const& fallback);
  Vec3 vec3(std::string const& key);
  std::optional<Vec3> optional_vec3(std::string const& key);
  std::vector<double> numbers(std::string const& key, std::vector<double> fallback);
  std::vector<std::string> strings(std::string const& key, std::vector<std::string> fallback);
  bool has(std::string const& key) const;
  nlohmann::json const& raw(std::string const& key);
  /// Throws ConfigError on any key that was never read.
  void finish() const;

 private:
  nlohmann::json const& find(std::string const& key);

  nlohmann::json const& block_;
  std::string prefix_;
  std::vector<std::string> used_;
};

}  // namespace tfw::cli
