// SPDX-License-Identifier: Apache-2.0

#include "pebopt/arrays.hpp"

#include <limits>
#include <stdexcept>

namespace pebopt {

namespace {

void check_ula(const UlaConfig& cfg) {
  if (cfg.num_elements < 1)
    throw std::invalid_argument("ULA needs at least one element");
  if (!(cfg.spacing_wavelengths > 0.0))
    throw std::invalid_argument("ULA spacing must be positive");
}

void check_uca(const UcaConfig& cfg, double wavelength_m) {
  if (cfg.num_elements < 2)
    throw std::invalid_argument("UCA needs at least two elements");
  if (!(wavelength_m > 0.0))
    throw std::invalid_argument("wavelength must be positive");
}

}  // namespace

double uca_radius(const UcaConfig& cfg, double wavelength_m) {
  check_uca(cfg, wavelength_m);
  if (cfg.radius_m > 0.0) return cfg.radius_m;
  return wavelength_m / (4.0 * std::sin(kPi / cfg.num_elements));
}

Eigen::VectorXcd ula_steering(double theta_rad, const UlaConfig& cfg) {
  check_ula(cfg);
  const int n = cfg.num_elements;
  const double offset = 0.5 * (n - 1);
  const double rate = 2.0 * kPi * cfg.spacing_wavelengths * std::sin(theta_rad);
  Eigen::VectorXcd a(n);
  for (int i = 0; i < n; ++i) a(i) = std::polar(1.0, rate * (i - offset));
  return a;
}

Eigen::VectorXcd ula_derivative(double theta_rad, const UlaConfig& cfg) {
  Eigen::VectorXcd a = ula_steering(theta_rad, cfg);
  const int n = cfg.num_elements;
  const double offset = 0.5 * (n - 1);
  const double scale = 2.0 * kPi * cfg.spacing_wavelengths * std::cos(theta_rad);
  for (int i = 0; i < n; ++i) a(i) *= cxd(0.0, scale * (i - offset));
  return a;
}

Eigen::VectorXcd uca_steering(double phi_rad, const UcaConfig& cfg,
                              double wavelength_m) {
  check_uca(cfg, wavelength_m);
  const int n = cfg.num_elements;
  const double beta = 2.0 * kPi / wavelength_m * uca_radius(cfg, wavelength_m);
  Eigen::VectorXcd a(n);
  for (int m = 0; m < n; ++m)
    a(m) = std::polar(1.0, beta * std::cos(phi_rad - 2.0 * kPi * m / n));
  return a;
}

Eigen::VectorXcd uca_derivative(double phi_rad, const UcaConfig& cfg,
                                double wavelength_m) {
  Eigen::VectorXcd a = uca_steering(phi_rad, cfg, wavelength_m);
  const int n = cfg.num_elements;
  const double beta = 2.0 * kPi / wavelength_m * uca_radius(cfg, wavelength_m);
  for (int m = 0; m < n; ++m)
    a(m) *= cxd(0.0, -beta * std::sin(phi_rad - 2.0 * kPi * m / n));
  return a;
}

Eigen::VectorXcd analog_project(const Eigen::VectorXcd& target, int max_iters,
                                double tol,
                                std::vector<double>* objective_trace) {
  const int n = static_cast<int>(target.size());
  if (n < 1) throw std::invalid_argument("analog_project: empty target");
  if (target.norm() == 0.0)
    throw std::invalid_argument("analog_project: target is identically zero");

  const double mod = 1.0 / std::sqrt(static_cast<double>(n));
  auto phase_or_zero = [](cxd v) {
    return std::abs(v) == 0.0 ? cxd(1.0, 0.0) : v / std::abs(v);
  };

  Eigen::VectorXcd w(n);
  for (int i = 0; i < n; ++i) w(i) = mod * phase_or_zero(target(i));

  if (objective_trace) objective_trace->clear();
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iters; ++it) {
    cxd beta = w.dot(target);  // w^H target, exact minimizer since ||w|| = 1
    if (std::abs(beta) < 1e-300) beta = cxd(1e-300, 0.0);
    double obj = (target - beta * w).squaredNorm();
    // Gradient step on ||target - beta w||^2 with the exact step 1/|beta|^2
    // lands on target/beta; renormalizing entrywise is then the projection
    // onto the constant-modulus set, so the objective cannot increase.
    Eigen::VectorXcd stepped = w + (std::conj(beta) / std::norm(beta)) *
                                       (target - beta * w);
    for (int i = 0; i < n; ++i) {
      if (std::abs(stepped(i)) == 0.0) continue;  // keep previous phase
      w(i) = mod * phase_or_zero(stepped(i));
    }
    if (objective_trace) objective_trace->push_back(obj);
    if (prev - obj <= tol * std::max(1.0, obj)) break;
    prev = obj;
  }
  return w;
}

Eigen::VectorXd beampattern(const Eigen::MatrixXcd& precoder,
                            const Eigen::VectorXd& theta_grid_rad,
                            const UlaConfig& cfg) {
  check_ula(cfg);
  if (precoder.rows() != cfg.num_elements)
    throw std::invalid_argument("beampattern: precoder row count != elements");
  Eigen::VectorXd p(theta_grid_rad.size());
  for (Eigen::Index i = 0; i < theta_grid_rad.size(); ++i) {
    Eigen::VectorXcd a = ula_steering(theta_grid_rad(i), cfg);
    p(i) = (precoder.transpose() * a).squaredNorm();
  }
  return p;
}

Eigen::VectorXd beampattern_from_cov(const Eigen::MatrixXcd& cov,
                                     const Eigen::VectorXd& theta_grid_rad,
                                     const UlaConfig& cfg) {
  check_ula(cfg);
  if (cov.rows() != cfg.num_elements || cov.cols() != cfg.num_elements)
    throw std::invalid_argument("beampattern_from_cov: covariance size");
  Eigen::VectorXd p(theta_grid_rad.size());
  for (Eigen::Index i = 0; i < theta_grid_rad.size(); ++i) {
    Eigen::VectorXcd a = ula_steering(theta_grid_rad(i), cfg);
    cxd v = a.transpose() * cov * a.conjugate();
    p(i) = v.real();
  }
  return p;
}

double half_power_beamwidth(double theta_rad, const UlaConfig& cfg) {
  check_ula(cfg);
  if (cfg.num_elements < 2)
    throw std::domain_error("beamwidth undefined for a single element");
  if (std::cos(theta_rad) < 0.05)
    throw std::domain_error("beamwidth undefined this close to endfire");

  const Eigen::VectorXcd a0 = ula_steering(theta_rad, cfg);
  const double half = 0.5 * static_cast<double>(cfg.num_elements) *
                      static_cast<double>(cfg.num_elements);
  auto gain = [&](double t) {
    return std::norm(cxd(a0.dot(ula_steering(t, cfg))));
  };

  // Walk out from the peak until the pattern drops below half power, then
  // bisect the crossing. The step is a fraction of the broadside width
  // stretched by 1/cos(theta).
  const double step = 0.886 / (cfg.num_elements * cfg.spacing_wavelengths) /
                      (8.0 * std::cos(theta_rad));
  auto crossing = [&](double dir) {
    double t = theta_rad;
    while (gain(t) > half) {
      t += dir * step;
      if (std::abs(t) > 0.5 * kPi)
        throw std::domain_error("mainlobe edge beyond +-pi/2");
    }
    double inside = t - dir * step, outside = t;
    for (int i = 0; i < 100; ++i) {
      double mid = 0.5 * (inside + outside);
      (gain(mid) > half ? inside : outside) = mid;
    }
    return 0.5 * (inside + outside);
  };
  return crossing(+1.0) - crossing(-1.0);
}

}  // namespace pebopt
