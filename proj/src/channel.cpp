// SPDX-License-Identifier: Apache-2.0

#include "pebopt/channel.hpp"

#include <stdexcept>

namespace pebopt {

namespace {

void check_args(int k, const ChannelParams& params, const OfdmConfig& cfg) {
  if (k < 0 || k >= cfg.num_subcarriers)
    throw std::invalid_argument("subcarrier index out of range");
  const int paths = params.num_paths();
  if (params.phi_rad.size() != paths || params.alpha.size() != paths ||
      params.tau_s.size() != paths)
    throw std::invalid_argument("channel parameter blocks disagree on paths");
  if (paths < 1) throw std::invalid_argument("at least one path required");
}

}  // namespace

Eigen::MatrixXcd channel_matrix(int k, const ChannelParams& params,
                                const Scenario& scn, const OfdmConfig& cfg) {
  check_args(k, params, cfg);
  const double lam = cfg.wavelength_m();
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(scn.rx_array.num_elements,
                                              scn.tx_array.num_elements);
  for (int g = 0; g < params.num_paths(); ++g) {
    cxd c = params.alpha(g) *
            std::polar(1.0, -cfg.omega(k) * params.tau_s(g));
    h.noalias() += c * uca_steering(params.phi_rad(g), scn.rx_array, lam) *
                   ula_steering(params.theta_rad(g), scn.tx_array).transpose();
  }
  return h;
}

std::vector<Eigen::MatrixXcd> channel_derivatives(int k,
                                                  const ChannelParams& params,
                                                  const Scenario& scn,
                                                  const OfdmConfig& cfg) {
  check_args(k, params, cfg);
  const double lam = cfg.wavelength_m();
  const int paths = params.num_paths();
  const double wk = cfg.omega(k);

  std::vector<Eigen::MatrixXcd> d(5 * paths);
  for (int g = 0; g < paths; ++g) {
    Eigen::VectorXcd atx = ula_steering(params.theta_rad(g), scn.tx_array);
    Eigen::VectorXcd dtx = ula_derivative(params.theta_rad(g), scn.tx_array);
    Eigen::VectorXcd arx = uca_steering(params.phi_rad(g), scn.rx_array, lam);
    Eigen::VectorXcd drx = uca_derivative(params.phi_rad(g), scn.rx_array, lam);
    const cxd phase = std::polar(1.0, -wk * params.tau_s(g));
    const cxd ag = params.alpha(g) * phase;

    d[g] = ag * arx * dtx.transpose();                         // d/d theta_g
    d[paths + g] = ag * drx * atx.transpose();                 // d/d phi_g
    d[2 * paths + g] = phase * arx * atx.transpose();          // d/d Re alpha
    d[3 * paths + g] = cxd(0.0, 1.0) * d[2 * paths + g];       // d/d Im alpha
    d[4 * paths + g] = cxd(0.0, -wk) * ag * arx * atx.transpose();  // d/d tau
  }
  return d;
}

}  // namespace pebopt
