// SPDX-License-Identifier: Apache-2.0
//
// Scenario ingestion: JSON files with unit-suffixed field names, built-in
// deployment presets, and a deterministic JSON echo for run manifests.
#pragma once

#include <string>

#include "pebopt/geometry.hpp"

namespace pebopt {

struct ScenarioBundle {
  Scenario scenario;
  OfdmConfig ofdm;
};

// Built-in deployments: "table1-scen1" (wide reflector uncertainty, 16-beam
// budget) and "table1-scen2" (tight reflector uncertainty, 8-beam budget).
ScenarioBundle preset_scenario(const std::string& name);

// Parses a scenario JSON object. Unknown fields are rejected by name;
// missing required fields (ue_pos_m, incidence_pos_m, nlos_gamma,
// sigma_clk_m) are reported together; all other fields default to the
// "table1-scen1" values.
ScenarioBundle parse_scenario_json(const std::string& text);

// parse_scenario_json over a file's contents.
ScenarioBundle ingest_scenario(const std::string& path);

// Full-field JSON echo with deterministic key order; parses back to an
// identical bundle.
std::string scenario_to_json(const ScenarioBundle& bundle);

// Desk-scale override: drops the subcarrier count to 64 so every design
// solve stays fast; the noise variance follows the reduced band.
void apply_desk_scale(ScenarioBundle& bundle);

}  // namespace pebopt
