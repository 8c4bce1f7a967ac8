// SPDX-License-Identifier: Apache-2.0

#include "pebopt/scenario_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace pebopt {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kRequiredList =
    "ue_pos_m, incidence_pos_m, nlos_gamma, sigma_clk_m";

const char* const kKnownFields[] = {
    // waveform
    "fc_hz", "num_subcarriers", "subcarrier_spacing_hz", "symbols_per_beam",
    "num_beams", "total_power_mw", "noise_psd_dbm_hz", "noise_figure_db",
    // geometry
    "bs_pos_m", "ue_pos_m", "ue_orientation_rad", "clock_bias_s",
    "incidence_pos_m", "nlos_gamma", "gain_phase_rad", "sigma_clk_m",
    // uncertainty boxes
    "ue_box_halfwidth_m", "incidence_box_halfwidth_m", "ue_grid_per_axis",
    "incidence_grid_per_axis",
    // arrays
    "num_tx_elements", "tx_spacing_wavelengths", "num_rx_elements",
    "uca_radius_m", "num_rf_chains"};

[[noreturn]] void fail(const std::string& what) {
  throw std::invalid_argument("scenario: " + what);
}

double as_number(const ordered_json& j, const char* field) {
  if (!j.is_number()) fail(std::string(field) + " must be a number");
  return j.get<double>();
}

int as_int(const ordered_json& j, const char* field) {
  if (!j.is_number_integer())
    fail(std::string(field) + " must be an integer");
  return j.get<int>();
}

Eigen::Vector2d as_point(const ordered_json& j, const char* field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() ||
      !j[1].is_number())
    fail(std::string(field) + " must be a [x, y] pair of numbers");
  return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<double> as_doubles(const ordered_json& j, const char* field) {
  if (!j.is_array()) fail(std::string(field) + " must be an array");
  std::vector<double> out;
  for (const auto& e : j) {
    if (!e.is_number())
      fail(std::string(field) + " must hold numbers only");
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace

ScenarioBundle preset_scenario(const std::string& name) {
  ScenarioBundle b;
  b.scenario.incidence_pos_m = {{15.0, 25.0}};
  b.scenario.nlos_gamma = {0.1};
  b.ofdm.symbols_per_beam = 1;
  if (name == "table1-scen1") {
    b.ofdm.num_beams = 16;
  } else if (name == "table1-scen2") {
    b.scenario.incidence_box_halfwidth_m = 0.15;
    b.scenario.incidence_grid_per_axis = 2;
    b.ofdm.num_beams = 8;
  } else {
    fail("unknown preset '" + name +
         "' (available: table1-scen1, table1-scen2)");
  }
  // 20 dBm per beam per symbol.
  b.ofdm.total_power_mw =
      100.0 * b.ofdm.num_beams * b.ofdm.symbols_per_beam;
  return b;
}

ScenarioBundle parse_scenario_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::exception& e) {
    fail(std::string("not valid JSON (") + e.what() +
         "); required fields: " + kRequiredList);
  }
  if (!j.is_object())
    fail(std::string("top level must be an object; required fields: ") +
         kRequiredList);

  std::string unknown;
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : kKnownFields)
      if (item.key() == k) {
        known = true;
        break;
      }
    if (!known) unknown += (unknown.empty() ? "" : ", ") + item.key();
  }
  if (!unknown.empty()) fail("unknown fields: " + unknown);

  std::string missing;
  for (const char* k :
       {"ue_pos_m", "incidence_pos_m", "nlos_gamma", "sigma_clk_m"})
    if (!j.contains(k)) missing += (missing.empty() ? "" : ", ") + std::string(k);
  if (!missing.empty())
    fail("missing required fields: " + missing +
         " (required: " + kRequiredList + ")");

  ScenarioBundle b;
  Scenario& s = b.scenario;
  OfdmConfig& c = b.ofdm;

  if (j.contains("fc_hz")) c.carrier_hz = as_number(j["fc_hz"], "fc_hz");
  if (j.contains("num_subcarriers"))
    c.num_subcarriers = as_int(j["num_subcarriers"], "num_subcarriers");
  if (j.contains("subcarrier_spacing_hz"))
    c.subcarrier_spacing_hz =
        as_number(j["subcarrier_spacing_hz"], "subcarrier_spacing_hz");
  if (j.contains("symbols_per_beam"))
    c.symbols_per_beam = as_int(j["symbols_per_beam"], "symbols_per_beam");
  if (j.contains("num_beams")) c.num_beams = as_int(j["num_beams"], "num_beams");
  if (j.contains("total_power_mw"))
    c.total_power_mw = as_number(j["total_power_mw"], "total_power_mw");
  else
    c.total_power_mw = 100.0 * c.num_beams * c.symbols_per_beam;
  if (j.contains("noise_psd_dbm_hz"))
    c.noise_psd_dbm_hz = as_number(j["noise_psd_dbm_hz"], "noise_psd_dbm_hz");
  if (j.contains("noise_figure_db"))
    c.noise_figure_db = as_number(j["noise_figure_db"], "noise_figure_db");

  if (j.contains("bs_pos_m")) s.bs_pos_m = as_point(j["bs_pos_m"], "bs_pos_m");
  s.ue_pos_m = as_point(j["ue_pos_m"], "ue_pos_m");
  if (j.contains("ue_orientation_rad"))
    s.ue_orientation_rad =
        as_number(j["ue_orientation_rad"], "ue_orientation_rad");
  if (j.contains("clock_bias_s"))
    s.clock_bias_s = as_number(j["clock_bias_s"], "clock_bias_s");

  const auto& ip = j["incidence_pos_m"];
  if (!ip.is_array()) fail("incidence_pos_m must be an array of [x, y] pairs");
  s.incidence_pos_m.clear();
  for (const auto& e : ip)
    s.incidence_pos_m.push_back(as_point(e, "incidence_pos_m entry"));
  s.nlos_gamma = as_doubles(j["nlos_gamma"], "nlos_gamma");
  if (s.nlos_gamma.size() != s.incidence_pos_m.size())
    fail("nlos_gamma must list one coefficient per incidence point");
  if (j.contains("gain_phase_rad")) {
    s.gain_phase_rad = as_doubles(j["gain_phase_rad"], "gain_phase_rad");
    if (!s.gain_phase_rad.empty() &&
        s.gain_phase_rad.size() != s.incidence_pos_m.size() + 1)
      fail("gain_phase_rad needs one phase per path (LOS first)");
  }
  s.sigma_clk_m = as_number(j["sigma_clk_m"], "sigma_clk_m");
  if (!(s.sigma_clk_m > 0.0)) fail("sigma_clk_m must be positive");

  if (j.contains("ue_box_halfwidth_m"))
    s.ue_box_halfwidth_m =
        as_number(j["ue_box_halfwidth_m"], "ue_box_halfwidth_m");
  if (j.contains("incidence_box_halfwidth_m"))
    s.incidence_box_halfwidth_m =
        as_number(j["incidence_box_halfwidth_m"], "incidence_box_halfwidth_m");
  if (j.contains("ue_grid_per_axis"))
    s.ue_grid_per_axis = as_int(j["ue_grid_per_axis"], "ue_grid_per_axis");
  if (j.contains("incidence_grid_per_axis"))
    s.incidence_grid_per_axis =
        as_int(j["incidence_grid_per_axis"], "incidence_grid_per_axis");
  if (s.ue_grid_per_axis < 1 || s.incidence_grid_per_axis < 1)
    fail("grid sizes must be at least 1 per axis");

  if (j.contains("num_tx_elements"))
    s.tx_array.num_elements = as_int(j["num_tx_elements"], "num_tx_elements");
  if (j.contains("tx_spacing_wavelengths"))
    s.tx_array.spacing_wavelengths =
        as_number(j["tx_spacing_wavelengths"], "tx_spacing_wavelengths");
  if (j.contains("num_rx_elements"))
    s.rx_array.num_elements = as_int(j["num_rx_elements"], "num_rx_elements");
  if (j.contains("uca_radius_m"))
    s.rx_array.radius_m = as_number(j["uca_radius_m"], "uca_radius_m");
  if (j.contains("num_rf_chains"))
    s.num_rf_chains = as_int(j["num_rf_chains"], "num_rf_chains");

  if (c.num_subcarriers < 1) fail("num_subcarriers must be at least 1");
  if (c.symbols_per_beam < 1) fail("symbols_per_beam must be at least 1");
  if (c.num_beams < 1) fail("num_beams must be at least 1");
  if (!(c.total_power_mw > 0.0)) fail("total_power_mw must be positive");
  if (s.tx_array.num_elements < 2 || s.rx_array.num_elements < 2)
    fail("arrays need at least 2 elements");
  if (s.num_rf_chains < 1) fail("num_rf_chains must be at least 1");
  return b;
}

ScenarioBundle ingest_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario_json(ss.str());
}

std::string scenario_to_json(const ScenarioBundle& b) {
  const Scenario& s = b.scenario;
  const OfdmConfig& c = b.ofdm;
  ordered_json j;
  j["fc_hz"] = c.carrier_hz;
  j["num_subcarriers"] = c.num_subcarriers;
  j["subcarrier_spacing_hz"] = c.subcarrier_spacing_hz;
  j["symbols_per_beam"] = c.symbols_per_beam;
  j["num_beams"] = c.num_beams;
  j["total_power_mw"] = c.total_power_mw;
  j["noise_psd_dbm_hz"] = c.noise_psd_dbm_hz;
  j["noise_figure_db"] = c.noise_figure_db;
  j["bs_pos_m"] = {s.bs_pos_m.x(), s.bs_pos_m.y()};
  j["ue_pos_m"] = {s.ue_pos_m.x(), s.ue_pos_m.y()};
  j["ue_orientation_rad"] = s.ue_orientation_rad;
  j["clock_bias_s"] = s.clock_bias_s;
  auto ip = ordered_json::array();
  for (const auto& p : s.incidence_pos_m) ip.push_back({p.x(), p.y()});
  j["incidence_pos_m"] = ip;
  j["nlos_gamma"] = s.nlos_gamma;
  j["gain_phase_rad"] = s.gain_phase_rad;
  j["sigma_clk_m"] = s.sigma_clk_m;
  j["ue_box_halfwidth_m"] = s.ue_box_halfwidth_m;
  j["incidence_box_halfwidth_m"] = s.incidence_box_halfwidth_m;
  j["ue_grid_per_axis"] = s.ue_grid_per_axis;
  j["incidence_grid_per_axis"] = s.incidence_grid_per_axis;
  j["num_tx_elements"] = s.tx_array.num_elements;
  j["tx_spacing_wavelengths"] = s.tx_array.spacing_wavelengths;
  j["num_rx_elements"] = s.rx_array.num_elements;
  j["uca_radius_m"] = s.rx_array.radius_m;
  j["num_rf_chains"] = s.num_rf_chains;
  return j.dump(2);
}

void apply_desk_scale(ScenarioBundle& bundle) {
  bundle.ofdm.num_subcarriers = 64;
}

}  // namespace pebopt
