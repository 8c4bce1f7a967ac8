// SPDX-License-Identifier: Apache-2.0
//
// Frequency-domain MIMO channel for the geometric model and its derivatives
// with respect to the channel parameter vector eta.
#pragma once

#include <vector>

#include "pebopt/geometry.hpp"

namespace pebopt {

// H_k = sum_g alpha_g exp(-j 2 pi k df tau_g) a_rx(phi_g) a_tx(theta_g)^T,
// an N_rx x N_tx matrix on subcarrier k (0-based).
Eigen::MatrixXcd channel_matrix(int k, const ChannelParams& params,
                                const Scenario& scn, const OfdmConfig& cfg);

// Derivatives dH_k / d eta_i for the full parameter ordering
// [theta_0.., phi_0.., Re alpha_0.., Im alpha_0.., tau_0..]; every entry is
// a rank-one N_rx x N_tx matrix.
std::vector<Eigen::MatrixXcd> channel_derivatives(int k,
                                                  const ChannelParams& params,
                                                  const Scenario& scn,
                                                  const OfdmConfig& cfg);

}  // namespace pebopt
