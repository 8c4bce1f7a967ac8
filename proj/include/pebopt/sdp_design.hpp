// SPDX-License-Identifier: Apache-2.0
//
// Transmit-covariance design by semidefinite programming: single-point
// designs over the full covariance or its steering subspace, worst-case
// designs over a position-uncertainty grid, beam power allocation over a
// fixed codebook, and rank-constrained precoder recovery.
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "pebopt/conic.hpp"
#include "pebopt/fisher.hpp"

namespace pebopt {

// Departure steering vectors and their derivatives, conjugated, one pair
// per path. Near-coincident departure angles are collapsed to a single
// pair so the basis keeps full column rank.
struct SubspaceBasis {
  Eigen::MatrixXcd u;            // N_tx x 2P'
  Eigen::VectorXd pointing_rad;  // retained departure angles
  bool collapsed = false;

  static SubspaceBasis from_angles(const Eigen::VectorXd& theta_rad,
                                   const UlaConfig& tx);
};

// Position hypotheses the robust design protects against: a uniform
// lattice over the UE and incidence boxes described by the scenario,
// box corners included, with gains recomputed from each point's geometry
// (phases shared with the base scenario).
struct UncertaintyGrid {
  Scenario base;
  std::vector<PositionParams> points;
  std::vector<ChannelParams> channels;

  int size() const { return static_cast<int>(points.size()); }

  static UncertaintyGrid from_scenario(const Scenario& scn,
                                       const OfdmConfig& cfg);
  // Degenerate grid holding only the scenario's own geometry.
  static UncertaintyGrid single_point(const Scenario& scn,
                                      const OfdmConfig& cfg);
};

struct DesignOptions {
  SolverOptions solver;
  // Treat the LOS departure angle and delay as perfectly known.
  bool known_los = false;
};

struct DesignResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  Eigen::MatrixXcd X;         // N_tx x N_tx covariance (per subcarrier)
  Eigen::MatrixXcd reduced;   // subspace variable when one was used
  Eigen::VectorXd epigraph;   // u values, two per grid point
  double bound_peb_m = std::numeric_limits<double>::infinity();  // solver
  double worst_peb_m = std::numeric_limits<double>::infinity();  // re-eval
  int iterations = 0;
};

// Beam power allocation over a fixed codebook.
struct PowerResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  Eigen::VectorXd rho;  // nonnegative, sums to the number of beams
  double bound_peb_m = std::numeric_limits<double>::infinity();
  double worst_peb_m = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

struct RecoveryOptions {
  int trials = 100;
  std::uint64_t seed = 0;
};

struct RecoveryResult {
  Eigen::MatrixXcd F;  // N_tx x M
  double peb_m = std::numeric_limits<double>::infinity();
  bool randomized = false;  // best candidate came from randomization
};

// Minimum-PEB covariance at a single known position. Budget is
// total_power_mw / num_subcarriers on the trace.
DesignResult solve_perfect(const Scenario& scn, const OfdmConfig& cfg,
                           const ClockPrior& prior,
                           const DesignOptions& opts = {});

// Same optimum through the steering-subspace variable Lambda (2P x 2P),
// with X = U Lambda U^H. Throws if the subspace is rank deficient.
DesignResult solve_reduced(const Scenario& scn, const OfdmConfig& cfg,
                           const ClockPrior& prior,
                           const DesignOptions& opts = {});

// Minimize the worst PEB over the grid. The variable lives in the union
// of the per-point steering subspaces, which loses nothing because every
// point's information depends on X only through its own subspace block.
DesignResult solve_robust(const UncertaintyGrid& grid, const OfdmConfig& cfg,
                          const ClockPrior& prior,
                          const DesignOptions& opts = {});

// Worst-case-PEB power allocation over fixed beams: X = L F diag(rho) F^H
// with rho >= 0 summing to the beam count.
PowerResult solve_power_allocation(const UncertaintyGrid& grid,
                                   const OfdmConfig& cfg,
                                   const ClockPrior& prior,
                                   const Eigen::MatrixXcd& beams,
                                   int num_repeats,
                                   const DesignOptions& opts = {});

// Best rank-M precoder for a solved covariance: the top-M eigenvector
// factorization plus seeded Gaussian randomizations, each rescaled to the
// covariance's trace and ranked by the supplied PEB oracle (which receives
// the candidate covariance L F F^H).
RecoveryResult recover_precoder(
    const Eigen::MatrixXcd& x_cov, int num_beams, int num_repeats,
    const std::function<double(const Eigen::MatrixXcd&)>& peb_oracle,
    const RecoveryOptions& opts = {});

}  // namespace pebopt
