// SPDX-License-Identifier: Apache-2.0

#include "pebopt/geometry.hpp"

#include <random>
#include <stdexcept>

namespace pebopt {

namespace {

void check_scenario(const Scenario& scn) {
  if (scn.incidence_pos_m.size() != scn.nlos_gamma.size())
    throw std::invalid_argument(
        "scenario: one reflection magnitude per incidence point required");
  for (double g : scn.nlos_gamma)
    if (!(g >= 0.0) || g > 1.0)
      throw std::invalid_argument("scenario: gamma must lie in [0, 1]");
  if ((scn.ue_pos_m - scn.bs_pos_m).norm() == 0.0)
    throw std::invalid_argument("scenario: UE coincides with the BS");
  for (const auto& r : scn.incidence_pos_m)
    if ((r - scn.bs_pos_m).norm() == 0.0 || (r - scn.ue_pos_m).norm() == 0.0)
      throw std::invalid_argument(
          "scenario: incidence point coincides with an endpoint");
}

double bearing(const Eigen::Vector2d& from, const Eigen::Vector2d& to) {
  return std::atan2(to.y() - from.y(), to.x() - from.x());
}

}  // namespace

Eigen::VectorXd PositionParams::to_vector() const {
  Eigen::VectorXd v(dim());
  v.segment<2>(idx_pos()) = ue_pos_m;
  v(idx_orientation()) = ue_orientation_rad;
  for (int g = 1; g < num_paths(); ++g)
    v.segment<2>(idx_incidence(g)) = incidence_pos_m[g - 1];
  for (int g = 0; g < num_paths(); ++g) {
    v(idx_alpha_re(g)) = alpha(g).real();
    v(idx_alpha_im(g)) = alpha(g).imag();
  }
  v(idx_clock()) = clock_bias_s;
  return v;
}

PositionParams PositionParams::from_vector(const Eigen::VectorXd& v,
                                           int num_paths) {
  PositionParams p;
  p.alpha.resize(num_paths);
  if (v.size() != p.dim())
    throw std::invalid_argument("position vector length mismatch");
  p.ue_pos_m = v.segment<2>(p.idx_pos());
  p.ue_orientation_rad = v(p.idx_orientation());
  p.incidence_pos_m.resize(num_paths - 1);
  for (int g = 1; g < num_paths; ++g)
    p.incidence_pos_m[g - 1] = v.segment<2>(p.idx_incidence(g));
  for (int g = 0; g < num_paths; ++g)
    p.alpha(g) = cxd(v(p.idx_alpha_re(g)), v(p.idx_alpha_im(g)));
  p.clock_bias_s = v(p.idx_clock());
  return p;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> path_angles(const Scenario& scn) {
  check_scenario(scn);
  const int paths = scn.num_paths();
  Eigen::VectorXd theta(paths), phi(paths);
  theta(0) = bearing(scn.bs_pos_m, scn.ue_pos_m);
  phi(0) = theta(0) - scn.ue_orientation_rad;
  for (int g = 1; g < paths; ++g) {
    const auto& r = scn.incidence_pos_m[g - 1];
    theta(g) = bearing(scn.bs_pos_m, r);
    phi(g) = bearing(r, scn.ue_pos_m) - scn.ue_orientation_rad;
  }
  return {theta, phi};
}

Eigen::VectorXd path_delays(const Scenario& scn) {
  check_scenario(scn);
  const int paths = scn.num_paths();
  Eigen::VectorXd tau(paths);
  tau(0) = (scn.ue_pos_m - scn.bs_pos_m).norm() / kSpeedOfLight +
           scn.clock_bias_s;
  for (int g = 1; g < paths; ++g) {
    const auto& r = scn.incidence_pos_m[g - 1];
    double len = (r - scn.bs_pos_m).norm() + (scn.ue_pos_m - r).norm();
    tau(g) = len / kSpeedOfLight + scn.clock_bias_s;
  }
  return tau;
}

Eigen::VectorXcd path_gains(const Scenario& scn, double wavelength_m) {
  check_scenario(scn);
  if (!(wavelength_m > 0.0))
    throw std::invalid_argument("wavelength must be positive");
  const int paths = scn.num_paths();
  if (static_cast<int>(scn.gain_phase_rad.size()) != paths)
    throw std::invalid_argument(
        "scenario: gain phases not realized (one per path expected)");
  Eigen::VectorXcd alpha(paths);
  double len = (scn.ue_pos_m - scn.bs_pos_m).norm();
  alpha(0) = std::polar(wavelength_m / (4.0 * kPi * len),
                        scn.gain_phase_rad[0]);
  for (int g = 1; g < paths; ++g) {
    const auto& r = scn.incidence_pos_m[g - 1];
    len = (r - scn.bs_pos_m).norm() + (scn.ue_pos_m - r).norm();
    alpha(g) = std::polar(
        scn.nlos_gamma[g - 1] * wavelength_m / (4.0 * kPi * len),
        scn.gain_phase_rad[g]);
  }
  return alpha;
}

void realize_gain_phases(Scenario& scn, uint64_t seed) {
  const size_t paths = static_cast<size_t>(scn.num_paths());
  if (scn.gain_phase_rad.size() >= paths) return;
  std::mt19937_64 rng(seed);
  // Draw a full set so the LOS phase does not depend on how many phases
  // were preset, then keep any that were.
  std::vector<double> drawn(paths);
  for (size_t g = 0; g < paths; ++g) {
    double u = static_cast<double>(rng()) /
               static_cast<double>(std::mt19937_64::max());
    drawn[g] = (2.0 * u - 1.0) * kPi;
  }
  for (size_t g = scn.gain_phase_rad.size(); g < paths; ++g)
    scn.gain_phase_rad.push_back(drawn[g]);
}

std::pair<ChannelParams, PositionParams> params_from_scenario(
    const Scenario& scn, const OfdmConfig& cfg) {
  ChannelParams ch;
  std::tie(ch.theta_rad, ch.phi_rad) = path_angles(scn);
  ch.tau_s = path_delays(scn);
  ch.alpha = path_gains(scn, cfg.wavelength_m());

  PositionParams pos;
  pos.ue_pos_m = scn.ue_pos_m;
  pos.ue_orientation_rad = scn.ue_orientation_rad;
  pos.incidence_pos_m = scn.incidence_pos_m;
  pos.alpha = ch.alpha;
  pos.clock_bias_s = scn.clock_bias_s;
  return {ch, pos};
}

ChannelParams channel_params_of_position(const PositionParams& pos,
                                         const Scenario& scn) {
  Scenario moved = scn;
  moved.ue_pos_m = pos.ue_pos_m;
  moved.ue_orientation_rad = pos.ue_orientation_rad;
  moved.incidence_pos_m = pos.incidence_pos_m;
  moved.clock_bias_s = pos.clock_bias_s;
  if (moved.incidence_pos_m.size() != moved.nlos_gamma.size())
    moved.nlos_gamma.assign(moved.incidence_pos_m.size(), 1.0);

  ChannelParams ch;
  std::tie(ch.theta_rad, ch.phi_rad) = path_angles(moved);
  ch.tau_s = path_delays(moved);
  ch.alpha = pos.alpha;  // gains are free coordinates of eta~
  return ch;
}

Scenario active_paths_only(const Scenario& scn) {
  check_scenario(scn);
  Scenario out = scn;
  out.incidence_pos_m.clear();
  out.nlos_gamma.clear();
  out.gain_phase_rad.clear();
  if (!scn.gain_phase_rad.empty()) out.gain_phase_rad.push_back(scn.gain_phase_rad[0]);
  for (size_t i = 0; i < scn.incidence_pos_m.size(); ++i) {
    if (scn.nlos_gamma[i] == 0.0) continue;
    out.incidence_pos_m.push_back(scn.incidence_pos_m[i]);
    out.nlos_gamma.push_back(scn.nlos_gamma[i]);
    if (scn.gain_phase_rad.size() > i + 1)
      out.gain_phase_rad.push_back(scn.gain_phase_rad[i + 1]);
  }
  return out;
}

}  // namespace pebopt
