#pragma once

// JSON and CSV views of the library's result types.

#include <string>

#include <nlohmann/json.hpp>

#include "tfw/decay_fit.hpp"
#include "tfw/experiments.hpp"
#include "tfw/ground_state.hpp"
#include "tfw/linear_response.hpp"
#include "tfw/site_energy.hpp"

namespace tfw {

nlohmann::json to_json(DecayFit const& fit);
nlohmann::json to_json(NamedFit const& fit);
nlohmann::json to_json(Check const& check);
/// Everything except curves and fields, which are written as separate artifacts.
nlohmann::json to_json(ExperimentReport const& report);
/// Scalars and diagnostics of a state; the fields themselves are not included.
nlohmann::json to_json(GroundState const& state);
nlohmann::json to_json(ScreeningConstants const& sc);
nlohmann::json to_json(SiteEnergyReport const& report);
nlohmann::json to_json(ForceMatrixRow const& row);
nlohmann::json to_json(InvarianceReport const& report);
nlohmann::json to_json(FdConsistencyRow const& row);

/// Header line plus one line per row, numbers printed round-trip exact.
std::string to_csv(Curve const& curve);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double x);

}  // namespace tfw
