// SPDX-License-Identifier: Apache-2.0
//
// Sum/difference beam codebooks over departure-angle uncertainty intervals,
// beam power allocation, and integer time-sharing schedules.
#pragma once

#include <iosfwd>
#include <vector>

#include "pebopt/sdp_design.hpp"

namespace pebopt {

// Departure-angle uncertainty interval of one propagation path. lower/upper
// include half a beamwidth of padding beyond the extreme grid angles;
// beam_angles_rad start at the unpadded minimum, step by the broadside
// half-power beamwidth, and end exactly at the unpadded maximum.
struct AodInterval {
  int path = 0;
  double lower_rad = 0.0;
  double upper_rad = 0.0;
  Eigen::VectorXd beam_angles_rad;
};

enum class BeamKind { Sum, Diff };
enum class CodebookKind { Digital, Analog, SumOnly };

const char* beam_kind_name(BeamKind k);
const char* codebook_kind_name(CodebookKind k);

// One transmit beam: a conjugated steering vector (sum) or a conjugated
// steering derivative (diff), scaled to the common per-beam norm.
struct Beam {
  BeamKind kind = BeamKind::Sum;
  int path = 0;
  double pointing_rad = 0.0;
  Eigen::VectorXcd weights;
};

struct Codebook {
  CodebookKind kind = CodebookKind::Digital;
  std::vector<Beam> beams;
  Eigen::VectorXd rho;  // power weights, uniform 1 until optimized

  int size() const { return static_cast<int>(beams.size()); }
  // Beams stacked as columns (array elements x beams).
  Eigen::MatrixXcd matrix() const;
  // Covariance of the repeated transmission, num_repeats * F diag(rho) F^H.
  Eigen::MatrixXcd covariance(int num_repeats) const;
};

// Integer time-sharing schedule derived from a power allocation.
struct TimeSharing {
  SolveStatus status = SolveStatus::NumericalFailure;
  Eigen::VectorXd rho;        // generating continuous allocation
  Eigen::VectorXi factors;    // symbols per beam after rounding
  int symbols_per_beam = 1;   // L
  double max_power_mw = 0.0;  // per-beam transmit power cap
  double continuous_peb_m = 0.0;
  double quantized_peb_m = 0.0;
  bool degenerate = false;  // every factor rounded to zero
};

// Half-power width of the broadside beam, used as the beam spacing and the
// interval padding unit.
double broadside_hpbw_rad(const UlaConfig& cfg);

// Per-path departure-angle intervals spanned by the uncertainty grid, padded
// by half a beamwidth per side, with covering beam angles.
std::vector<AodInterval> aod_intervals_from_grid(const UncertaintyGrid& grid);

// Codebook over the intervals: sum beams for every interval, plus difference
// beams (Digital) or their constant-modulus projections (Analog). Every
// column is scaled to squared norm total_power / (subcarriers * repeats *
// beam count), with repeats = cfg.symbols_per_beam.
Codebook build_codebook(const std::vector<AodInterval>& intervals,
                        CodebookKind kind, const UlaConfig& tx,
                        const OfdmConfig& cfg);

// Worst-case-optimal beam power weights for a fixed codebook; weights are
// nonnegative and average to one so the transmit budget is preserved.
PowerResult optimize_power(const Codebook& cb, const UncertaintyGrid& grid,
                           const OfdmConfig& cfg, const ClockPrior& prior,
                           const DesignOptions& opts = {});

// Nearest-integer symbol counts L * rho, with the all-zero outcome repaired
// by granting one symbol to the strongest beam (flagged via degenerate).
Eigen::VectorXi round_time_share(const Eigen::VectorXd& rho,
                                 int symbols_per_beam, bool* degenerate);

// Power allocation under the budget symbols * beams * max_power, followed by
// rounding to integer per-beam symbol counts; reports the worst-case PEB of
// both the continuous and the quantized schedules.
TimeSharing time_share(const Codebook& cb, const UncertaintyGrid& grid,
                       const OfdmConfig& cfg, const ClockPrior& prior,
                       int symbols_per_beam, double max_power_mw,
                       const DesignOptions& opts = {});

// One row per beam: kind, path, pointing angle, weight, interleaved re/im.
void write_codebook_csv(const Codebook& cb, std::ostream& os);

// Inverse of write_codebook_csv. The file does not record the codebook
// variant, so the result reports Digital; beams and power weights round-trip
// exactly.
Codebook read_codebook_csv(std::istream& is);

}  // namespace pebopt
