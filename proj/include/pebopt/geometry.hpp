// SPDX-License-Identifier: Apache-2.0
//
// Deployment geometry for a single-BS downlink positioning link in the plane:
// one LOS path plus first-order reflections, each described by a departure
// angle at the BS array, an arrival angle in the UE array frame, a delay
// offset by the UE clock bias, and a free-space complex gain.
#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "pebopt/arrays.hpp"
#include "pebopt/common.hpp"

namespace pebopt {

// Waveform and RF bookkeeping. num_beams and total_power_mw describe the
// frame actually transmitted (M beams, L symbols each) and are filled in by
// whoever builds the transmit strategy.
struct OfdmConfig {
  double carrier_hz = 28e9;
  int num_subcarriers = 1024;        // K
  double subcarrier_spacing_hz = 120e3;
  int symbols_per_beam = 1;          // L
  int num_beams = 1;                 // M
  double total_power_mw = 100.0;     // P_tot across the whole frame
  double noise_psd_dbm_hz = -174.0;
  double noise_figure_db = 8.0;

  double wavelength_m() const { return kSpeedOfLight / carrier_hz; }
  // Post-combining noise power over the K-subcarrier band, in mW.
  double noise_variance_mw() const {
    return db_to_lin(noise_figure_db + noise_psd_dbm_hz) * num_subcarriers *
           subcarrier_spacing_hz;
  }
  double omega(int k) const {  // 2 pi k subcarrier offset in rad/s
    return 2.0 * kPi * k * subcarrier_spacing_hz;
  }
};

// Physical layout plus the priors and uncertainty boxes attached to it.
// Path 0 is LOS; NLOS path g >= 1 bounces at incidence_pos_m[g-1] with
// reflection magnitude nlos_gamma[g-1]. gain_phase_rad holds one phase per
// path (LOS first) and must be populated (realize_gain_phases) before gains
// are evaluated.
struct Scenario {
  Eigen::Vector2d bs_pos_m{0.0, 0.0};
  Eigen::Vector2d ue_pos_m{25.0, 10.0};
  double ue_orientation_rad = 0.0;
  double clock_bias_s = 0.0;
  std::vector<Eigen::Vector2d> incidence_pos_m;
  std::vector<double> nlos_gamma;
  std::vector<double> gain_phase_rad;

  double sigma_clk_m = 1.0;  // clock prior std expressed as a distance
  double ue_box_halfwidth_m = 0.15;
  double incidence_box_halfwidth_m = 2.5;
  int ue_grid_per_axis = 2;
  int incidence_grid_per_axis = 3;

  UlaConfig tx_array{32, 0.5};
  UcaConfig rx_array{16, -1.0};
  int num_rf_chains = 16;

  int num_paths() const { return 1 + static_cast<int>(incidence_pos_m.size()); }
};

// Channel-domain parameter vector eta = [theta; phi; Re alpha; Im alpha; tau]
// over all paths (LOS first). Delays are in seconds.
struct ChannelParams {
  Eigen::VectorXd theta_rad;
  Eigen::VectorXd phi_rad;
  Eigen::VectorXcd alpha;
  Eigen::VectorXd tau_s;

  int num_paths() const { return static_cast<int>(theta_rad.size()); }
  int dim() const { return 5 * num_paths(); }
};

// Position-domain parameter vector
//   eta~ = [p; psi; r_1..r_{P-1}; Re alpha; Im alpha; Delta t]
// of dimension 4P + 2 for P paths. Gains are free parameters here, not
// functions of the geometry.
struct PositionParams {
  Eigen::Vector2d ue_pos_m;
  double ue_orientation_rad = 0.0;
  std::vector<Eigen::Vector2d> incidence_pos_m;
  Eigen::VectorXcd alpha;
  double clock_bias_s = 0.0;

  int num_paths() const { return static_cast<int>(alpha.size()); }
  int dim() const { return 4 * num_paths() + 2; }

  // Flat-vector indices, matching the ordering above.
  int idx_pos() const { return 0; }
  int idx_orientation() const { return 2; }
  int idx_incidence(int g) const { return 3 + 2 * (g - 1); }  // g >= 1
  int idx_alpha_re(int g) const { return 2 * num_paths() + 1 + g; }
  int idx_alpha_im(int g) const { return idx_alpha_re(g) + num_paths(); }
  int idx_clock() const { return dim() - 1; }

  Eigen::VectorXd to_vector() const;
  static PositionParams from_vector(const Eigen::VectorXd& v, int num_paths);
};

// Departure angles at the BS (LOS toward the UE, NLOS toward the incidence
// points), then arrival angles in the UE frame. Both in (-pi, pi].
std::pair<Eigen::VectorXd, Eigen::VectorXd> path_angles(const Scenario& scn);

// Absolute delays including the clock bias, in seconds.
Eigen::VectorXd path_delays(const Scenario& scn);

// Complex gains: free-space magnitude lambda / (4 pi path_length), scaled by
// the reflection magnitude for NLOS paths, with the scenario's phases.
Eigen::VectorXcd path_gains(const Scenario& scn, double wavelength_m);

// Draws any missing gain phases uniformly from (-pi, pi], deterministically
// from the seed. Existing phases are kept.
void realize_gain_phases(Scenario& scn, uint64_t seed);

// Full channel- and position-domain parameter vectors for a scenario.
std::pair<ChannelParams, PositionParams> params_from_scenario(
    const Scenario& scn, const OfdmConfig& cfg);

// The map eta(eta~): recomputes angles and delays from the positions in
// pos (BS location taken from scn), passing the gains through untouched.
ChannelParams channel_params_of_position(const PositionParams& pos,
                                         const Scenario& scn);

// Drops zero-gain NLOS paths (gamma == 0) from the scenario so the
// estimation model only carries parameters the observation can inform.
Scenario active_paths_only(const Scenario& scn);

}  // namespace pebopt
