// SPDX-License-Identifier: Apache-2.0
//
// Fisher information for the positioning link. The channel-domain matrix is
// linear in the transmit covariance X (aggregated over beams and repeats),
// maps to the position domain through the geometry Jacobian, and picks up a
// rank-one clock prior. The position error bound (PEB) is the root trace of
// the UE-position block of the inverse.
#pragma once

#include <limits>
#include <vector>

#include "pebopt/channel.hpp"
#include "pebopt/geometry.hpp"
#include "pebopt/hermitian.hpp"

namespace pebopt {

// Gaussian prior on the clock bias, expressed as a distance (c * sigma_t).
// An infinite sigma disables the prior.
struct ClockPrior {
  double sigma_m = std::numeric_limits<double>::infinity();

  // Information 1 / sigma_t^2 in 1/s^2.
  double info_s() const {
    if (std::isinf(sigma_m)) return 0.0;
    if (!(sigma_m > 0.0))
      throw std::invalid_argument("clock prior sigma must be positive");
    double s = sigma_m / kSpeedOfLight;
    return 1.0 / (s * s);
  }
};

// Transmit covariance with its intended budget, for interface clarity at
// the design boundaries. X aggregates the whole frame: L F diag(rho) F^H.
struct PrecoderCovariance {
  Eigen::MatrixXcd X;
  double power_budget_mw = 0.0;  // expected trace(X) * K

  bool consistent(int num_subcarriers, double rel_tol = 1e-6) const;
};

// Channel-domain FIM (5P x 5P, ordering [theta; phi; Re alpha; Im alpha;
// tau]) for transmit covariance X and receive combiner W (defaults to the
// identity, i.e. one RF chain per element).
Eigen::MatrixXd fim_channel(const Eigen::MatrixXcd& X,
                            const ChannelParams& params, const Scenario& scn,
                            const OfdmConfig& cfg,
                            const Eigen::MatrixXcd& combiner = {});

// Jacobian d eta / d eta~ ((5P) x (4P+2)) at the given position-domain point.
// Delays are in seconds, so clock-bias columns carry 1/c-free entries and
// position columns carry 1/c factors on the delay rows.
Eigen::MatrixXd jacobian_T(const PositionParams& pos, const Scenario& scn);

// J~ = T^T J T + prior, with the clock prior on the last coordinate.
Eigen::MatrixXd fim_position(const Eigen::MatrixXd& fim_chan,
                             const Eigen::MatrixXd& T, const ClockPrior& prior);

// sqrt(tr(P F^-1 P^T)) guarded against rank deficiency: the matrix is
// Jacobi-equilibrated, and a zero diagonal entry or an equilibrated
// condition number beyond 1e12 yields +infinity.
double peb_linear(const Eigen::MatrixXd& fim, const Eigen::MatrixXd& rows);

// PEB over the first two coordinates (UE position).
double peb(const Eigen::MatrixXd& fim_pos);

// One-call evaluation for a covariance at a scenario point.
double peb_of_covariance(const Eigen::MatrixXcd& X, const ChannelParams& ch,
                         const PositionParams& pos, const Scenario& scn,
                         const OfdmConfig& cfg, const ClockPrior& prior,
                         const Eigen::MatrixXcd& combiner = {});

// Same with X = L F diag(rho) F^H assembled from beams and power weights.
double peb_of_precoder(const Eigen::MatrixXcd& F, const Eigen::VectorXd& rho,
                       const ChannelParams& ch, const PositionParams& pos,
                       const Scenario& scn, const OfdmConfig& cfg,
                       const ClockPrior& prior,
                       const Eigen::MatrixXcd& combiner = {});

// The position-domain FIM at one scenario point as an explicit linear map
// of X. The dependence enters only through Q = U^H X U with U spanning the
// departure steering vectors and their derivatives (conjugated), so the map
// is precompiled into (2P)^2 basis matrices indexed by the real Hermitian
// parameters of Q. This is what makes the design problems cheap to assemble.
class FimLinearMap {
 public:
  FimLinearMap(const ChannelParams& ch, const PositionParams& pos,
               const Scenario& scn, const OfdmConfig& cfg,
               const ClockPrior& prior, const Eigen::MatrixXcd& combiner = {});

  int fim_dim() const { return static_cast<int>(prior_.rows()); }
  int subspace_dim() const { return static_cast<int>(subspace_.cols()); }
  int num_coeffs() const { return herm_param_count(subspace_dim()); }

  const Eigen::MatrixXcd& subspace() const { return subspace_; }  // U
  const Eigen::MatrixXd& basis(int e) const { return basis_[e]; }
  const Eigen::MatrixXd& prior() const { return prior_; }
  // Rows defining the error functional: PEB^2 = tr(P J~^-1 P^T).
  const Eigen::MatrixXd& peb_rows() const { return peb_rows_; }

  Eigen::VectorXd coeffs_of(const Eigen::MatrixXcd& X) const;
  Eigen::MatrixXd fim_of_coeffs(const Eigen::VectorXd& q) const;
  Eigen::MatrixXd fim(const Eigen::MatrixXcd& X) const;
  double peb_of(const Eigen::MatrixXcd& X) const;

  // Map from the n^2 real parameters of an n x n Hermitian X to the Q
  // coefficients: coeffs_of(X) = map * herm_to_params(X).
  Eigen::MatrixXd coeff_map_dense() const;

  // Variant treating the LOS departure angle and delay as perfectly known:
  // reparameterize eta~ -> [theta_0, tau_0, rest], delete the two known
  // coordinates, and express the position error through the remaining
  // clock-bias dependence. Shares this map's Q coefficients.
  FimLinearMap known_los_variant() const;

 private:
  FimLinearMap() = default;

  Eigen::MatrixXcd subspace_;            // N_tx x 2P
  std::vector<Eigen::MatrixXd> basis_;   // (2P)^2 matrices, fim_dim each
  Eigen::MatrixXd prior_;
  Eigen::MatrixXd peb_rows_;
  // Kept for known_los_variant.
  double theta0_ = 0.0, range0_m_ = 0.0;
};

}  // namespace pebopt
