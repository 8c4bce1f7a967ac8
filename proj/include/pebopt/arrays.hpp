// SPDX-License-Identifier: Apache-2.0
//
// Antenna array manifolds and beam utilities: centered uniform linear array
// (transmit side), uniform circular array (receive side), constant-modulus
// projection for analog beams, transmit patterns and 3 dB beamwidths.
#pragma once

#include <vector>

#include "pebopt/common.hpp"

namespace pebopt {

// Uniform linear array with element positions n * spacing, n centered around
// zero (half-integer positions for even counts). Spacing is in wavelengths;
// angles are measured from broadside, positive toward larger element index.
struct UlaConfig {
  int num_elements = 32;
  double spacing_wavelengths = 0.5;
};

// Uniform circular array in the plane. A non-positive radius selects the
// default radius lambda / (4 sin(pi/N)), which spaces adjacent elements half
// a wavelength apart along the chord.
struct UcaConfig {
  int num_elements = 16;
  double radius_m = -1.0;
};

// Resolved radius in meters (applies the default rule when radius_m <= 0).
double uca_radius(const UcaConfig& cfg, double wavelength_m);

// Steering vector [exp(j 2 pi spacing n sin(theta))]_n, n centered.
Eigen::VectorXcd ula_steering(double theta_rad, const UlaConfig& cfg);

// Entrywise derivative of ula_steering with respect to theta:
// j 2 pi spacing n cos(theta) times the steering entry.
Eigen::VectorXcd ula_derivative(double theta_rad, const UlaConfig& cfg);

// Steering vector [exp(j (2 pi / lambda) R cos(phi - 2 pi m / N))]_m.
Eigen::VectorXcd uca_steering(double phi_rad, const UcaConfig& cfg,
                              double wavelength_m);

// Entrywise derivative of uca_steering with respect to phi.
Eigen::VectorXcd uca_derivative(double phi_rad, const UcaConfig& cfg,
                                double wavelength_m);

// Best constant-modulus approximation of a target beam: minimizes
// ||target - beta w||^2 over a complex scale beta and a vector w whose
// entries all have modulus 1/sqrt(N). Alternates the closed-form beta with
// a projected gradient step on w; the objective never increases. Initial w
// carries the entrywise phases of the target (zero entries get phase 0).
// objective_trace, when given, records the objective after each sweep.
Eigen::VectorXcd analog_project(const Eigen::VectorXcd& target,
                                int max_iters = 200, double tol = 1e-12,
                                std::vector<double>* objective_trace = nullptr);

// Transmit power pattern of a precoder: p(theta) = ||a(theta)^T F||^2 for
// each grid angle. Rows of F index array elements, columns index beams.
Eigen::VectorXd beampattern(const Eigen::MatrixXcd& precoder,
                            const Eigen::VectorXd& theta_grid_rad,
                            const UlaConfig& cfg);

// Same pattern evaluated from a covariance: a(theta)^T X conj(a(theta)).
// Equals the precoder form with X = F F^H.
Eigen::VectorXd beampattern_from_cov(const Eigen::MatrixXcd& cov,
                                     const Eigen::VectorXd& theta_grid_rad,
                                     const UlaConfig& cfg);

// Half-power (3 dB) width of the mainlobe steered to theta, found by
// bisection on |a(theta)^H a(t)|^2 on both sides of the peak. Throws
// std::domain_error near endfire (cos(theta) < 0.05 or mainlobe edge
// beyond +-pi/2).
double half_power_beamwidth(double theta_rad, const UlaConfig& cfg);

}  // namespace pebopt
