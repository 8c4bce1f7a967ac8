// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "pebopt/arrays.hpp"
#include "pebopt/codebook.hpp"
#include "pebopt/fisher.hpp"

using namespace pebopt;

namespace {

// Two-path deployment: BS at the origin, UE at (25,10), reflector at (15,25).
Scenario deployment(double incidence_halfwidth) {
  Scenario scn;
  scn.incidence_pos_m = {{15.0, 25.0}};
  scn.nlos_gamma = {0.7};
  scn.gain_phase_rad = {0.4, -0.9};
  scn.incidence_box_halfwidth_m = incidence_halfwidth;
  scn.incidence_grid_per_axis = incidence_halfwidth > 1.0 ? 3 : 2;
  return scn;
}

OfdmConfig desk_cfg(int num_beams, int repeats) {
  OfdmConfig cfg;
  cfg.num_subcarriers = 64;
  cfg.num_beams = num_beams;
  cfg.symbols_per_beam = repeats;
  cfg.total_power_mw = 100.0 * num_beams * repeats;
  return cfg;
}

double worst_over_grid(const Eigen::MatrixXcd& x, const UncertaintyGrid& grid,
                       const OfdmConfig& cfg, const ClockPrior& prior) {
  double worst = 0.0;
  for (int n = 0; n < grid.size(); ++n)
    worst = std::max(worst, peb_of_covariance(x, grid.channels[n],
                                              grid.points[n], grid.base, cfg,
                                              prior));
  return worst;
}

}  // namespace

TEST_CASE("departure intervals cover the grid with beamwidth spacing") {
  OfdmConfig cfg = desk_cfg(1, 1);
  const double hp = broadside_hpbw_rad(UlaConfig{32, 0.5});
  CHECK(hp == doctest::Approx(0.0554).epsilon(0.02));

  // A single grid point gives one beam exactly at each departure angle.
  Scenario scn = deployment(2.5);
  UncertaintyGrid single = UncertaintyGrid::single_point(scn, cfg);
  auto iv1 = aod_intervals_from_grid(single);
  REQUIRE(iv1.size() == 2);
  for (const auto& iv : iv1) {
    CHECK(iv.beam_angles_rad.size() == 1);
    CHECK(iv.beam_angles_rad(0) ==
          doctest::Approx(single.channels[0].theta_rad(iv.path))
              .epsilon(1e-12));
    CHECK(iv.upper_rad - iv.lower_rad == doctest::Approx(hp).epsilon(1e-9));
  }

  // Wide reflector uncertainty: two beams on the LOS path, six on the NLOS
  // path; tight uncertainty: two and two.
  UncertaintyGrid wide = UncertaintyGrid::from_scenario(scn, cfg);
  auto ivw = aod_intervals_from_grid(wide);
  CHECK(ivw[0].beam_angles_rad.size() == 2);
  CHECK(ivw[1].beam_angles_rad.size() == 6);

  UncertaintyGrid tight =
      UncertaintyGrid::from_scenario(deployment(0.15), cfg);
  auto ivt = aod_intervals_from_grid(tight);
  CHECK(ivt[0].beam_angles_rad.size() == 2);
  CHECK(ivt[1].beam_angles_rad.size() == 2);

  // Spacing: beamwidth steps, with only the final gap allowed to shrink;
  // each grid angle lies within half a beamwidth of some beam.
  for (const auto& iv : ivw) {
    const auto& a = iv.beam_angles_rad;
    for (int i = 0; i + 1 < a.size(); ++i) {
      const double gap = a(i + 1) - a(i);
      CHECK(gap <= hp * (1.0 + 1e-9));
      if (i + 2 < a.size()) CHECK(gap == doctest::Approx(hp).epsilon(1e-9));
    }
    CHECK(iv.lower_rad == doctest::Approx(a(0) - 0.5 * hp).epsilon(1e-9));
    CHECK(iv.upper_rad ==
          doctest::Approx(a(a.size() - 1) + 0.5 * hp).epsilon(1e-9));
    for (int n = 0; n < wide.size(); ++n) {
      const double th = wide.channels[n].theta_rad(iv.path);
      double dist = std::numeric_limits<double>::infinity();
      for (int i = 0; i < a.size(); ++i)
        dist = std::min(dist, std::abs(th - a(i)));
      CHECK(dist <= 0.5 * hp * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("codebooks carry normalized sum and difference beams") {
  Scenario scn = deployment(2.5);
  OfdmConfig cfg = desk_cfg(16, 1);
  UncertaintyGrid grid = UncertaintyGrid::from_scenario(scn, cfg);
  auto ivs = aod_intervals_from_grid(grid);

  Codebook dig = build_codebook(ivs, CodebookKind::Digital, scn.tx_array, cfg);
  Codebook ana = build_codebook(ivs, CodebookKind::Analog, scn.tx_array, cfg);
  CHECK(dig.size() == 16);
  CHECK(ana.size() == 16);

  OfdmConfig cfg8 = desk_cfg(8, 1);
  Codebook sum = build_codebook(ivs, CodebookKind::SumOnly, scn.tx_array, cfg8);
  CHECK(sum.size() == 8);

  const double norm2 =
      cfg.total_power_mw / (cfg.num_subcarriers * 1.0 * 16.0);
  for (const auto& b : dig.beams)
    CHECK(b.weights.squaredNorm() == doctest::Approx(norm2).epsilon(1e-10));

  // Analog beams are constant-modulus.
  for (const auto& b : ana.beams) {
    const Eigen::VectorXd mods = b.weights.cwiseAbs();
    CHECK(mods.maxCoeff() - mods.minCoeff() < 1e-9);
  }

  // Sum beams peak at their pointing angle, difference beams null there.
  for (const auto& b : dig.beams) {
    const Eigen::VectorXcd a = ula_steering(b.pointing_rad, scn.tx_array);
    const double at = std::abs((a.transpose() * b.weights).value());
    if (b.kind == BeamKind::Diff) {
      CHECK(at < 1e-9 * a.norm() * b.weights.norm());
    } else {
      const double hp = broadside_hpbw_rad(scn.tx_array);
      for (double off : {-0.4 * hp, 0.4 * hp}) {
        const Eigen::VectorXcd ao =
            ula_steering(b.pointing_rad + off, scn.tx_array);
        CHECK(at > std::abs((ao.transpose() * b.weights).value()));
      }
    }
  }

  // The digital codebook's sum half is the sum-only codebook re-normalized.
  for (int m = 0; m < 8; ++m) {
    const Eigen::VectorXcd& f1 = dig.beams[m].weights;
    const Eigen::VectorXcd& f2 = sum.beams[m].weights;
    CHECK(std::abs(std::abs(f1.dot(f2)) - f1.norm() * f2.norm()) <
          1e-12 * f1.norm() * f2.norm());
  }

  CHECK_THROWS_AS(
      build_codebook({}, CodebookKind::Digital, scn.tx_array, cfg),
      std::invalid_argument);
}

TEST_CASE("beam power allocation never loses to uniform weights") {
  Scenario scn = deployment(2.5);
  OfdmConfig cfg = desk_cfg(16, 1);
  ClockPrior prior{10.0};
  UncertaintyGrid grid = UncertaintyGrid::from_scenario(scn, cfg);
  auto ivs = aod_intervals_from_grid(grid);
  Codebook cb = build_codebook(ivs, CodebookKind::Digital, scn.tx_array, cfg);

  PowerResult pa = optimize_power(cb, grid, cfg, prior);
  REQUIRE(pa.status == SolveStatus::Optimal);
  CHECK(pa.rho.minCoeff() >= 0.0);
  CHECK(pa.rho.sum() == doctest::Approx(16.0).epsilon(1e-7));

  const double uniform = worst_over_grid(cb.covariance(1), grid, cfg, prior);
  CHECK(pa.worst_peb_m <= uniform * (1.0 + 1e-6));

  // Reordering the beams cannot change the achieved worst case.
  Codebook rev = cb;
  std::reverse(rev.beams.begin(), rev.beams.end());
  PowerResult par = optimize_power(rev, grid, cfg, prior);
  REQUIRE(par.status == SolveStatus::Optimal);
  CHECK(par.worst_peb_m ==
        doctest::Approx(pa.worst_peb_m).epsilon(1e-8));

  // A superset of beams can only improve the optimum: embed the sum-only
  // solution by doubling its weights onto the digital sum columns.
  OfdmConfig cfg8 = desk_cfg(8, 1);
  Codebook sum = build_codebook(ivs, CodebookKind::SumOnly, scn.tx_array, cfg8);
  PowerResult ps = optimize_power(sum, grid, cfg8, prior);
  REQUIRE(ps.status == SolveStatus::Optimal);
  CHECK(pa.worst_peb_m <= ps.worst_peb_m * (1.0 + 1e-6));

  // Mismatched normalization is rejected.
  CHECK_THROWS_AS(optimize_power(sum, grid, cfg, prior),
                  std::invalid_argument);
}

TEST_CASE("single-beam allocation agrees with direct evaluation") {
  // A rank-one covariance cannot resolve any departure angle: the angle
  // enters the signal only through the scalar a(theta)^T f, which the
  // unknown complex gain absorbs. The allocation problem is therefore
  // infeasible, and both evaluation paths must agree on an infinite PEB
  // with the unique feasible weight reported.
  Scenario scn;
  scn.gain_phase_rad = {0.4};
  OfdmConfig cfg = desk_cfg(1, 2);
  ClockPrior prior{1.0};
  UncertaintyGrid single = UncertaintyGrid::single_point(scn, cfg);
  const double hp = broadside_hpbw_rad(scn.tx_array);
  AodInterval iv;
  iv.path = 0;
  iv.beam_angles_rad.resize(1);
  iv.beam_angles_rad(0) = single.channels[0].theta_rad(0) + 0.35 * hp;
  iv.lower_rad = iv.beam_angles_rad(0) - 0.5 * hp;
  iv.upper_rad = iv.beam_angles_rad(0) + 0.5 * hp;
  Codebook cb = build_codebook({iv}, CodebookKind::SumOnly, scn.tx_array, cfg);
  REQUIRE(cb.size() == 1);

  const double direct = worst_over_grid(cb.covariance(2), single, cfg, prior);
  CHECK(std::isinf(direct));
  PowerResult pa = optimize_power(cb, single, cfg, prior);
  CHECK(pa.status != SolveStatus::Optimal);
  CHECK(pa.rho(0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(pa.worst_peb_m == direct);
}

TEST_CASE("time-share rounding and its degenerate repair") {
  Eigen::VectorXd rho(2);
  rho << 1.25, 0.75;
  bool degen = true;
  Eigen::VectorXi f = round_time_share(rho, 4, &degen);
  CHECK_FALSE(degen);
  CHECK(f(0) == 5);
  CHECK(f(1) == 3);

  Eigen::VectorXd small(2);
  small << 0.1, 0.2;
  f = round_time_share(small, 1, &degen);
  CHECK(degen);
  CHECK(f(0) == 0);
  CHECK(f(1) == 1);

  CHECK_THROWS_AS(round_time_share(rho, 0, nullptr), std::invalid_argument);
}

TEST_CASE("integral allocations quantize with zero error") {
  // When L*rho is integral the quantized covariance equals the continuous
  // one, so the two PEBs coincide exactly.
  Scenario scn = deployment(2.5);
  OfdmConfig cfg = desk_cfg(2, 4);
  ClockPrior prior{1.0};
  UncertaintyGrid single = UncertaintyGrid::single_point(scn, cfg);
  auto ivs = aod_intervals_from_grid(single);
  Codebook cb = build_codebook(ivs, CodebookKind::SumOnly, scn.tx_array, cfg);
  REQUIRE(cb.size() == 2);

  Eigen::VectorXd rho(2);
  rho << 1.25, 0.75;
  Eigen::VectorXi f = round_time_share(rho, 4, nullptr);
  const Eigen::MatrixXcd fm = cb.matrix();
  Eigen::MatrixXcd xq = Eigen::MatrixXcd::Zero(32, 32);
  for (int m = 0; m < 2; ++m)
    xq += double(f(m)) * fm.col(m) * fm.col(m).adjoint();
  Codebook weighted = cb;
  weighted.rho = rho;
  const Eigen::MatrixXcd xc = weighted.covariance(4);
  CHECK((xq - xc).norm() < 1e-12 * xc.norm());
  CHECK(worst_over_grid(xq, single, cfg, prior) ==
        doctest::Approx(worst_over_grid(xc, single, cfg, prior))
            .epsilon(1e-12));
}

TEST_CASE("time-share schedules follow the optimized allocation") {
  Scenario scn = deployment(0.15);
  OfdmConfig cfg = desk_cfg(8, 1);
  ClockPrior prior{10.0};
  UncertaintyGrid grid = UncertaintyGrid::from_scenario(scn, cfg);
  auto ivs = aod_intervals_from_grid(grid);
  Codebook cb = build_codebook(ivs, CodebookKind::Digital, scn.tx_array, cfg);
  REQUIRE(cb.size() == 8);

  const int lrep = 6;
  TimeSharing ts = time_share(cb, grid, cfg, prior, lrep, 100.0);
  REQUIRE(ts.status == SolveStatus::Optimal);
  CHECK(ts.factors.size() == 8);
  for (int m = 0; m < 8; ++m)
    CHECK(ts.factors(m) == std::lround(lrep * ts.rho(m)));
  CHECK(ts.factors.sum() <= lrep * 8 + 4);
  CHECK(ts.factors.minCoeff() >= 0);
  CHECK_FALSE(ts.degenerate);
  CHECK(std::isfinite(ts.continuous_peb_m));
  CHECK(std::isfinite(ts.quantized_peb_m));
  CHECK(ts.quantized_peb_m > 0.0);

  CHECK_THROWS_AS(time_share(cb, grid, cfg, prior, 0, 100.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(time_share(cb, grid, cfg, prior, 4, 0.0),
                  std::invalid_argument);
}

TEST_CASE("codebook export lists one row per beam") {
  Scenario scn = deployment(2.5);
  OfdmConfig cfg = desk_cfg(2, 1);
  UncertaintyGrid single = UncertaintyGrid::single_point(scn, cfg);
  Codebook cb = build_codebook(aod_intervals_from_grid(single),
                               CodebookKind::SumOnly, scn.tx_array, cfg);
  REQUIRE(cb.size() == 2);

  std::ostringstream os;
  write_codebook_csv(cb, os);
  std::istringstream is(os.str());
  std::string line;
  REQUIRE(std::getline(is, line));
  CHECK(line.rfind("kind,path,pointing_rad,rho,w0_re,w0_im", 0) == 0);
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    CHECK(line.rfind("sum,", 0) == 0);
    CHECK(std::count(line.begin(), line.end(), ',') == 3 + 64);
  }
  CHECK(rows == 2);

  // Beams and weights survive the round trip exactly.
  cb.rho(0) = 1.25;
  cb.rho(1) = 0.75;
  std::ostringstream os2;
  write_codebook_csv(cb, os2);
  std::istringstream is2(os2.str());
  const Codebook back = read_codebook_csv(is2);
  REQUIRE(back.size() == cb.size());
  CHECK(back.rho == cb.rho);
  for (int m = 0; m < cb.size(); ++m) {
    CHECK(back.beams[m].kind == cb.beams[m].kind);
    CHECK(back.beams[m].path == cb.beams[m].path);
    CHECK(back.beams[m].pointing_rad == cb.beams[m].pointing_rad);
    CHECK(back.beams[m].weights == cb.beams[m].weights);
  }

  std::istringstream empty("");
  CHECK_THROWS_AS(read_codebook_csv(empty), std::invalid_argument);
  std::istringstream bad("kind,path,pointing_rad,rho,w0_re\nx");
  CHECK_THROWS_AS(read_codebook_csv(bad), std::invalid_argument);
}
