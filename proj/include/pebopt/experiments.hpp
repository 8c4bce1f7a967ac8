// SPDX-License-Identifier: Apache-2.0
//
// Experiment drivers: clock-uncertainty sweeps, strategy comparison,
// beampattern export, time-sharing sweeps, and CSV emission.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pebopt/codebook.hpp"
#include "pebopt/scenario_io.hpp"

namespace pebopt {

// One sweep row. worst_peb_m may be +inf (serialized as "inf");
// los_illum is NaN when the radiated power vanishes.
struct SweepRecord {
  double sweep_var = 0.0;
  std::string method;
  double worst_peb_m = std::numeric_limits<double>::infinity();
  double los_illum = std::numeric_limits<double>::quiet_NaN();
  std::string solver_status = "optimal";
  double wall_s = 0.0;
};

struct BeampatternRecord {
  double sigma_clk_m = 0.0;
  std::string method;
  double theta_rad = 0.0;
  double pattern_db = 0.0;
};

struct ExperimentOptions {
  ScenarioBundle bundle;
  uint64_t seed = 0;
  int workers = 0;     // <= 0 selects the hardware concurrency
  bool timing = false; // leave wall_s at 0 so output stays byte-identical

  std::vector<double> gammas{0.0, 0.1, 0.5, 1.0};
  int regime_points = 13;
  int compare_points = 7;
  double sigma_lo_m = 1e-3;
  double sigma_hi_m = 1e3;

  int pattern_points = 2001;
  double pattern_floor_db = -80.0;
  std::vector<double> pattern_sigmas_m{0.01, 10.0};

  std::vector<int> timeshare_factors{1, 2, 4, 8, 16, 32, 64};
  double timeshare_sigma_m = 10.0;
  double max_power_mw = 100.0;  // per beam per symbol
};

// Fraction of radiated angular power falling in the LOS departure interval
// relative to the union of all path intervals; trapezoid rule with 1000
// points per merged segment. NaN when the denominator vanishes.
double relative_los_illumination(const Eigen::MatrixXcd& x_cov,
                                 const std::vector<AodInterval>& intervals,
                                 const UlaConfig& tx);

// Digital-codebook worst-case PEB across reflection strengths and clock
// uncertainties, plus a perfect-LOS curve (LOS channel parameters treated
// as known) at reflection strength 0.1. Zero reflection drops the NLOS
// path from the model entirely.
std::vector<SweepRecord> run_regimes(const ExperimentOptions& opts);

// {robust, digital-opt, analog-opt, sum-opt, sum-uniform} across a clock
// uncertainty sweep; each codebook's budget scales with its beam count so
// every method spends the same per-beam power.
std::vector<SweepRecord> run_compare(const ExperimentOptions& opts);

// Aggregated transmit patterns of the compared strategies at representative
// clock uncertainties, in dB with a floor.
std::vector<BeampatternRecord> run_beampattern(const ExperimentOptions& opts);

// Power allocation versus integer time sharing across symbol budgets.
std::vector<SweepRecord> run_timeshare(const ExperimentOptions& opts);

void write_sweep_csv(const std::vector<SweepRecord>& rows, std::ostream& os);
void write_beampattern_csv(const std::vector<BeampatternRecord>& rows,
                           std::ostream& os);

}  // namespace pebopt
