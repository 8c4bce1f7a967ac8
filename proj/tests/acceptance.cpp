// SPDX-License-Identifier: Apache-2.0
//
// End-to-end acceptance harness. Each numbered criterion prints exactly one
// [PASS]/[FAIL] line; the exit status is the number of failures. Everything
// runs at desk scale (64 subcarriers) on the two built-in deployments, so
// the whole suite stays within a couple of minutes on one core.
#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pebopt/arrays.hpp"
#include "pebopt/channel.hpp"
#include "pebopt/codebook.hpp"
#include "pebopt/experiments.hpp"
#include "pebopt/fisher.hpp"
#include "pebopt/scenario_io.hpp"
#include "pebopt/sdp_design.hpp"

using namespace pebopt;

namespace {

int g_failures = 0;

void report(int id, bool ok, const char* fmt, ...) {
  char detail[768];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(detail, sizeof(detail), fmt, args);
  va_end(args);
  std::printf("[%s] %02d %s\n", ok ? "PASS" : "FAIL", id, detail);
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

template <class F>
void run_criterion(int id, const char* label, F&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    report(id, false, "%s: exception: %s", label, e.what());
  }
}

Scenario random_scenario(std::mt19937_64& rng, int paths, int ntx, int nrx) {
  std::uniform_real_distribution<double> ux(6.0, 40.0), uy(-30.0, 30.0),
      ug(0.2, 1.0), uph(-kPi, kPi);
  Scenario scn;
  scn.ue_pos_m << ux(rng), uy(rng);
  for (int g = 1; g < paths; ++g) {
    scn.incidence_pos_m.push_back(Eigen::Vector2d(ux(rng), uy(rng)));
    scn.nlos_gamma.push_back(ug(rng));
  }
  for (int g = 0; g < paths; ++g) scn.gain_phase_rad.push_back(uph(rng));
  scn.ue_orientation_rad = uph(rng);
  scn.tx_array = UlaConfig{ntx, 0.5};
  scn.rx_array = UcaConfig{nrx, -1.0};
  scn.num_rf_chains = nrx;
  return scn;
}

Eigen::MatrixXcd random_beams(std::mt19937_64& rng, int n, int m,
                              double scale) {
  std::normal_distribution<double> g(0.0, scale);
  Eigen::MatrixXcd f(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) f(i, j) = cxd(g(rng), g(rng));
  return f;
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

ExperimentOptions desk_options(const char* preset) {
  ExperimentOptions opts;
  opts.bundle = preset_scenario(preset);
  apply_desk_scale(opts.bundle);
  return opts;
}

// --- criterion 1: information matrix vs term-by-term reference ------------

void criterion_information_matrix() {
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const int paths = 1 + trial % 2;
    Scenario scn = random_scenario(rng, paths, 4, 2);
    OfdmConfig cfg;
    cfg.num_subcarriers = 4;
    cfg.symbols_per_beam = 1 + static_cast<int>(rng() % 3);
    const int m = 1 + static_cast<int>(rng() % 3);
    Eigen::MatrixXcd f = random_beams(rng, 4, m, 0.3);
    Eigen::MatrixXcd combiner;
    if (trial % 2) combiner = random_beams(rng, 2, 2, 1.0);

    auto [ch, pos] = params_from_scenario(scn, cfg);
    (void)pos;
    Eigen::MatrixXcd x =
        static_cast<double>(cfg.symbols_per_beam) * f * f.adjoint();
    Eigen::MatrixXd fast = fim_channel(x, ch, scn, cfg, combiner);
    Eigen::MatrixXd slow = testing::fim_bruteforce(f, ch, scn, cfg, combiner);
    const double floor_abs = 1e-12 * slow.cwiseAbs().maxCoeff();
    for (int i = 0; i < slow.rows(); ++i)
      for (int j = 0; j < slow.cols(); ++j) {
        const double rel = std::abs(fast(i, j) - slow(i, j)) /
                           std::max(std::abs(slow(i, j)), floor_abs);
        worst = std::max(worst, rel);
      }
  }
  report(1, worst < 1e-9,
         "information matrix matches the term-by-term reference "
         "(max entry rel err %.2e, tol 1e-9)",
         worst);
}

// --- criterion 2: derivatives vs central differences -----------------------

void criterion_derivatives() {
  std::mt19937_64 rng(22);
  auto wrap = [](double a) { return std::atan2(std::sin(a), std::cos(a)); };
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int paths = 1 + trial % 2;
    Scenario scn = random_scenario(rng, paths, 8, 4);
    OfdmConfig cfg;
    cfg.num_subcarriers = 8;
    auto [ch, pos] = params_from_scenario(scn, cfg);

    // Channel response derivatives at one off-center subcarrier.
    const int k = 2;
    std::vector<Eigen::MatrixXcd> d = channel_derivatives(k, ch, scn, cfg);
    auto fd = [&](auto&& mutate, double h) {
      ChannelParams up = ch, dn = ch;
      mutate(up, +h);
      mutate(dn, -h);
      return Eigen::MatrixXcd(
          (channel_matrix(k, up, scn, cfg) - channel_matrix(k, dn, scn, cfg)) /
          (2.0 * h));
    };
    auto rel = [&](const Eigen::MatrixXcd& got, const Eigen::MatrixXcd& ref) {
      return (got - ref).norm() / std::max(ref.norm(), 1e-12);
    };
    for (int g = 0; g < paths; ++g) {
      worst = std::max(
          worst,
          rel(d[g], fd([&](ChannelParams& c, double h) { c.theta_rad(g) += h; },
                       1e-6)));
      worst = std::max(
          worst,
          rel(d[paths + g],
              fd([&](ChannelParams& c, double h) { c.phi_rad(g) += h; },
                 1e-6)));
      worst = std::max(
          worst,
          rel(d[2 * paths + g],
              fd([&](ChannelParams& c, double h) { c.alpha(g) += h; }, 1e-9)));
      worst = std::max(
          worst,
          rel(d[3 * paths + g],
              fd([&](ChannelParams& c, double h) { c.alpha(g) += cxd(0, h); },
                 1e-9)));
      worst = std::max(
          worst,
          rel(d[4 * paths + g],
              fd([&](ChannelParams& c, double h) { c.tau_s(g) += h; },
                 1e-11)));
    }

    // Geometry Jacobian columns against differenced channel parameters.
    Eigen::MatrixXd t = jacobian_T(pos, scn);
    Eigen::VectorXd v = pos.to_vector();
    for (int col = 0; col < pos.dim(); ++col) {
      const double h = (col == pos.idx_clock()) ? 1e-12 : 1e-6;
      Eigen::VectorXd up = v, dn = v;
      up(col) += h;
      dn(col) -= h;
      ChannelParams cu = channel_params_of_position(
          PositionParams::from_vector(up, paths), scn);
      ChannelParams cd = channel_params_of_position(
          PositionParams::from_vector(dn, paths), scn);
      Eigen::VectorXd fdcol(5 * paths);
      for (int g = 0; g < paths; ++g) {
        fdcol(g) = wrap(cu.theta_rad(g) - cd.theta_rad(g)) / (2 * h);
        fdcol(paths + g) = wrap(cu.phi_rad(g) - cd.phi_rad(g)) / (2 * h);
        fdcol(2 * paths + g) = (cu.alpha(g) - cd.alpha(g)).real() / (2 * h);
        fdcol(3 * paths + g) = (cu.alpha(g) - cd.alpha(g)).imag() / (2 * h);
        fdcol(4 * paths + g) = (cu.tau_s(g) - cd.tau_s(g)) / (2 * h);
      }
      const double ref = std::max(t.col(col).norm(), 1e-12);
      worst = std::max(worst, (fdcol - t.col(col)).norm() / ref);
    }
  }
  report(2, worst < 1e-5,
         "channel and geometry derivatives match central differences "
         "(max rel err %.2e, tol 1e-5)",
         worst);
}

// --- criterion 3: subspace reduction reproduces the full optimum ----------

void criterion_reduction() {
  std::mt19937_64 rng(33);
  double worst_gap = 0.0, worst_resid = 0.0;
  bool solved = true;
  for (int trial = 0; trial < 10; ++trial) {
    Scenario scn = random_scenario(rng, 2, 16, 4);
    scn.sigma_clk_m = 1.0;
    OfdmConfig cfg;
    cfg.num_subcarriers = 16;
    cfg.total_power_mw = 100.0;
    const ClockPrior prior{scn.sigma_clk_m};

    DesignResult full = solve_perfect(scn, cfg, prior);
    DesignResult red = solve_reduced(scn, cfg, prior);
    solved = solved && full.status == SolveStatus::Optimal &&
             red.status == SolveStatus::Optimal;
    worst_gap = std::max(worst_gap,
                         std::abs(full.worst_peb_m - red.worst_peb_m) /
                             red.worst_peb_m);

    auto [ch, pos] = params_from_scenario(scn, cfg);
    FimLinearMap map(ch, pos, scn, cfg, prior);
    const Eigen::MatrixXcd& u = map.subspace();
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(u);
    Eigen::MatrixXcd q = qr.householderQ() *
                         Eigen::MatrixXcd::Identity(u.rows(), u.cols());
    Eigen::MatrixXcd perp =
        Eigen::MatrixXcd::Identity(u.rows(), u.rows()) - q * q.adjoint();
    worst_resid = std::max(
        worst_resid, (perp * full.X * perp).norm() / full.X.norm());
  }
  report(3, solved && worst_gap < 0.01 && worst_resid < 1e-3,
         "steering-subspace design reproduces the full optimum "
         "(max gap %.2e vs 1e-2, max off-subspace residual %.2e vs 1e-3%s)",
         worst_gap, worst_resid, solved ? "" : ", solver failure");
}

// --- criterion 4: two-element design vs exhaustive search ------------------

// Coarse-to-fine search over the three free parameters of a trace-budgeted
// 2x2 Hermitian PSD matrix.
double tiny_grid_min_peb(const FimLinearMap& map, double budget) {
  auto eval = [&](double t, double rho, double phi) {
    const double d0 = budget * t;
    const double d1 = budget - d0;
    const double mag = rho * std::sqrt(std::max(0.0, d0 * d1));
    Eigen::MatrixXcd x(2, 2);
    x(0, 0) = d0;
    x(1, 1) = d1;
    x(0, 1) = std::polar(mag, phi);
    x(1, 0) = std::conj(x(0, 1));
    return map.peb_of(x);
  };
  double lo_t = 0.0, hi_t = 1.0, lo_r = 0.0, hi_r = 1.0;
  double lo_p = 0.0, hi_p = 2.0 * kPi;
  double best = std::numeric_limits<double>::infinity();
  double bt = 0.5, br = 0.5, bp = 0.0;
  for (int pass = 0; pass < 4; ++pass) {
    const int nt = 21, nr = 21, np = 32;
    for (int i = 0; i < nt; ++i)
      for (int j = 0; j < nr; ++j)
        for (int k = 0; k < np; ++k) {
          const double t = lo_t + (hi_t - lo_t) * i / (nt - 1);
          const double r = lo_r + (hi_r - lo_r) * j / (nr - 1);
          const double p = lo_p + (hi_p - lo_p) * k / (np - 1);
          const double v = eval(t, r, p);
          if (v < best) {
            best = v;
            bt = t;
            br = r;
            bp = p;
          }
        }
    const double wt = (hi_t - lo_t) / 5.0, wr = (hi_r - lo_r) / 5.0;
    const double wp = (hi_p - lo_p) / 5.0;
    lo_t = std::max(0.0, bt - wt);
    hi_t = std::min(1.0, bt + wt);
    lo_r = std::max(0.0, br - wr);
    hi_r = std::min(1.0, br + wr);
    lo_p = bp - wp;
    hi_p = bp + wp;
  }
  return best;
}

void criterion_tiny_oracle() {
  Scenario scn;
  scn.ue_pos_m << 25.0, 10.0;
  scn.gain_phase_rad = {0.3};
  scn.sigma_clk_m = 1.0;
  scn.tx_array = UlaConfig{2, 0.5};
  scn.rx_array = UcaConfig{2, -1.0};
  scn.num_rf_chains = 2;
  OfdmConfig cfg;
  cfg.num_subcarriers = 4;
  cfg.total_power_mw = 100.0;
  const ClockPrior prior{scn.sigma_clk_m};

  DesignResult res = solve_perfect(scn, cfg, prior);
  auto [ch, pos] = params_from_scenario(scn, cfg);
  FimLinearMap map(ch, pos, scn, cfg, prior);
  const double oracle =
      tiny_grid_min_peb(map, cfg.total_power_mw / cfg.num_subcarriers);
  const double gap = std::abs(res.worst_peb_m - oracle) / oracle;
  report(4,
         res.status == SolveStatus::Optimal && gap < 0.01 &&
             res.worst_peb_m <= oracle * (1.0 + 1e-6),
         "two-element design matches the exhaustive search "
         "(%.6f m vs %.6f m, gap %.2e vs 1e-2)",
         res.worst_peb_m, oracle, gap);
}

// --- criteria 5, 7, 8: strategy comparison sweeps --------------------------

struct CompareRun {
  std::vector<double> sigmas;
  std::map<std::string, std::vector<double>> peb;
  std::map<std::string, std::vector<double>> illum;
  bool statuses_ok = true;
  bool shape_ok = true;
};

CompareRun compare_run(const char* preset) {
  CompareRun out;
  const std::vector<SweepRecord> rows = run_compare(desk_options(preset));
  for (const auto& r : rows) {
    if (out.sigmas.empty() || out.sigmas.back() != r.sweep_var)
      out.sigmas.push_back(r.sweep_var);
    out.peb[r.method].push_back(r.worst_peb_m);
    out.illum[r.method].push_back(r.los_illum);
    out.statuses_ok = out.statuses_ok &&
                      (r.solver_status.rfind("optimal", 0) == 0 ||
                       r.solver_status == "direct");
  }
  const size_t n = out.sigmas.size();
  for (const char* m : {"robust", "digital-opt", "analog-opt", "sum-opt",
                        "sum-uniform"})
    out.shape_ok = out.shape_ok && out.peb[m].size() == n;
  return out;
}

void criterion_ordering(const std::map<std::string, CompareRun>& runs) {
  bool ok = runs.size() == 2;
  double worst_violation = 0.0;
  for (const auto& [name, run] : runs) {
    (void)name;
    ok = ok && run.statuses_ok && run.shape_ok && !run.sigmas.empty();
    if (!run.shape_ok) continue;
    const auto& rob = run.peb.at("robust");
    const auto& dig = run.peb.at("digital-opt");
    const auto& sopt = run.peb.at("sum-opt");
    const auto& suni = run.peb.at("sum-uniform");
    for (size_t i = 0; i < run.sigmas.size(); ++i) {
      const double chain[3] = {rob[i] / dig[i], dig[i] / sopt[i],
                               sopt[i] / suni[i]};
      for (double c : chain) {
        worst_violation = std::max(worst_violation, c - 1.0);
        ok = ok && c <= 1.0 + 1e-6;
      }
    }
  }
  report(5, ok,
         "worst-case bound ordering robust <= digital <= sum-opt <= "
         "sum-uniform holds at every clock sigma in both deployments "
         "(max chain excess %.2e vs slack 1e-6)",
         worst_violation);
}

void criterion_analog_gap(const std::map<std::string, CompareRun>& runs) {
  bool ok = runs.size() == 2;
  double worst = 0.0;
  for (const auto& [name, run] : runs) {
    (void)name;
    if (!run.shape_ok) {
      ok = false;
      continue;
    }
    const auto& dig = run.peb.at("digital-opt");
    const auto& ana = run.peb.at("analog-opt");
    for (size_t i = 0; i < run.sigmas.size(); ++i)
      worst = std::max(worst, std::abs(ana[i] - dig[i]) / dig[i]);
  }
  report(7, ok && worst <= 0.15,
         "constant-modulus projection stays within 15%% of the digital "
         "optimum at every sweep point (max gap %.2f%%)",
         100.0 * worst);
}

void criterion_power_allocation(const std::map<std::string, CompareRun>& runs) {
  bool ok = runs.size() == 2;
  double worst = 0.0;
  for (const auto& [name, run] : runs) {
    (void)name;
    if (!run.shape_ok) {
      ok = false;
      continue;
    }
    const auto& sopt = run.peb.at("sum-opt");
    const auto& suni = run.peb.at("sum-uniform");
    for (size_t i = 0; i < run.sigmas.size(); ++i) {
      worst = std::max(worst, sopt[i] / suni[i] - 1.0);
      ok = ok && sopt[i] <= suni[i] * (1.0 + 1e-6);
    }
  }
  report(8, ok,
         "optimized beam powers never lose to the uniform allocation "
         "(max excess %.2e vs slack 1e-6)",
         worst);
}

// --- criterion 6: clock-uncertainty regime structure -----------------------

struct Curve {
  std::vector<double> sig, val;
};

void criterion_regimes(const std::vector<SweepRecord>& rows) {
  std::map<std::string, Curve> curves;
  bool finite = true;
  for (const auto& r : rows) {
    curves[r.method].sig.push_back(r.sweep_var);
    curves[r.method].val.push_back(r.worst_peb_m);
    finite = finite && std::isfinite(r.worst_peb_m);
  }

  // (a) the low-uncertainty plateau is insensitive to reflection strength.
  const double p01 = curves["gamma=0.1"].val.front();
  const double p05 = curves["gamma=0.5"].val.front();
  const double p1 = curves["gamma=1"].val.front();
  const double pmax = std::max({p01, p05, p1});
  const double pmin = std::min({p01, p05, p1});
  const bool plateau_ok = pmax / pmin - 1.0 <= 0.05;

  // (b) transition region of the gamma=0.1 curve has log-log slope near 1.
  const Curve& c01 = curves["gamma=0.1"];
  const double lo = 2.0 * c01.val.front();
  const double hi = c01.val.back() / 2.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int npts = 0;
  for (size_t i = 0; i < c01.val.size(); ++i) {
    if (c01.val[i] < lo || c01.val[i] > hi) continue;
    const double x = std::log(c01.sig[i]), y = std::log(c01.val[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++npts;
  }
  const double slope =
      npts >= 2 ? (npts * sxy - sx * sy) / (npts * sxx - sx * sx) : 0.0;
  const bool slope_ok = npts >= 2 && slope >= 0.8 && slope <= 1.2;

  // (c) every reflective curve saturates at large uncertainty.
  bool saturate_ok = true;
  for (const char* m : {"gamma=0.1", "gamma=0.5", "gamma=1"}) {
    const auto& v = curves[m].val;
    saturate_ok = saturate_ok &&
                  std::abs(v.back() - v[v.size() - 2]) <= 0.05 * v[v.size() - 2];
  }

  // (d) without a reflection the bound keeps growing with the prior.
  const auto& v0 = curves["gamma=0"].val;
  const bool unbounded_ok = v0.back() > 10.0 * v0.front();

  report(6, finite && plateau_ok && slope_ok && saturate_ok && unbounded_ok,
         "clock-regime curves show plateau/transition/saturation structure "
         "(plateau spread %.2e vs 5e-2, transition slope %.3f in [0.8,1.2] "
         "over %d points, reflection-free growth %.0fx vs 10x)",
         pmax / pmin - 1.0, slope, npts, v0.back() / v0.front());
}

// --- criterion 9: time sharing vs power allocation --------------------------

void criterion_timeshare() {
  ExperimentOptions opts = desk_options("table1-scen1");
  const std::vector<SweepRecord> rows = run_timeshare(opts);
  double pa64 = 0.0, ts64 = 0.0;
  bool statuses_ok = true;
  for (const auto& r : rows) {
    statuses_ok = statuses_ok && r.solver_status.rfind("optimal", 0) == 0;
    if (r.sweep_var == 64.0 && r.method == "power-allocation")
      pa64 = r.worst_peb_m;
    if (r.sweep_var == 64.0 && r.method == "time-sharing") ts64 = r.worst_peb_m;
  }
  const double gap64 = std::abs(ts64 - pa64) / pa64;

  // An allocation already on the 1/L grid round-trips with zero loss.
  Scenario scn = opts.bundle.scenario;
  realize_gain_phases(scn, opts.seed);
  scn.sigma_clk_m = opts.timeshare_sigma_m;
  const ClockPrior prior{scn.sigma_clk_m};
  const UncertaintyGrid grid =
      UncertaintyGrid::from_scenario(scn, opts.bundle.ofdm);
  const auto ivs = aod_intervals_from_grid(grid);
  int nsum = 0;
  for (const auto& iv : ivs)
    nsum += static_cast<int>(iv.beam_angles_rad.size());
  OfdmConfig cfg = opts.bundle.ofdm;
  cfg.num_beams = 2 * nsum;
  cfg.total_power_mw =
      opts.max_power_mw * cfg.num_beams * cfg.symbols_per_beam;
  const Codebook cb =
      build_codebook(ivs, CodebookKind::Digital, scn.tx_array, cfg);
  const int lrep = 8;
  TimeSharing sh = time_share(cb, grid, cfg, prior, lrep, opts.max_power_mw);
  Eigen::VectorXd rho_q = sh.factors.cast<double>() / lrep;
  bool degenerate = false;
  Eigen::VectorXi again = round_time_share(rho_q, lrep, &degenerate);
  const bool idempotent = !degenerate && again == sh.factors;
  Codebook cont = cb, quant = cb;
  cont.rho = rho_q;
  quant.rho = sh.factors.cast<double>();
  const double peb_cont = worst_over_grid(cont.covariance(lrep), grid, cfg,
                                          prior);
  const double peb_quant = worst_over_grid(quant.covariance(1), grid, cfg,
                                           prior);
  const double zero_gap = std::abs(peb_quant - peb_cont) / peb_cont;

  report(9,
         statuses_ok && pa64 > 0.0 && gap64 < 0.02 &&
             sh.status == SolveStatus::Optimal && idempotent &&
             zero_gap <= 1e-12,
         "time sharing matches power allocation at a 64-symbol budget "
         "(gap %.3f%% vs 2%%) and grid-aligned allocations round-trip exactly "
         "(gap %.1e)",
         100.0 * gap64, zero_gap);
}

// --- criterion 10: covering beam counts -------------------------------------

void criterion_beam_counts() {
  int counts[2][2] = {{0, 0}, {0, 0}};
  const char* presets[2] = {"table1-scen1", "table1-scen2"};
  for (int s = 0; s < 2; ++s) {
    ExperimentOptions opts = desk_options(presets[s]);
    Scenario scn = opts.bundle.scenario;
    realize_gain_phases(scn, opts.seed);
    const UncertaintyGrid grid =
        UncertaintyGrid::from_scenario(scn, opts.bundle.ofdm);
    for (const auto& iv : aod_intervals_from_grid(grid))
      if (iv.path == 0 || iv.path == 1)
        counts[s][iv.path] = static_cast<int>(iv.beam_angles_rad.size());
  }
  const int want[2][2] = {{2, 6}, {2, 2}};
  bool ok = true;
  int discrepancies = 0;
  for (int s = 0; s < 2; ++s)
    for (int p = 0; p < 2; ++p) {
      const int diff = std::abs(counts[s][p] - want[s][p]);
      ok = ok && diff <= 1;
      if (diff != 0) ++discrepancies;
    }
  report(10, ok,
         "covering beam counts match the reference deployments "
         "(wide reflector %d+%d vs 2+6, tight reflector %d+%d vs 2+2, "
         "%d off-by-one discrepancies tolerated)",
         counts[0][0], counts[0][1], counts[1][0], counts[1][1],
         discrepancies);
}

// --- criterion 11: invariant suites ----------------------------------------

void criterion_invariants(const std::vector<SweepRecord>& regime_rows,
                          const ExperimentOptions& regime_opts,
                          const std::map<std::string, CompareRun>& runs) {
  std::vector<std::string> bad;
  char buf[160];

  // Steering vectors keep the element count as their squared norm.
  {
    const UlaConfig tx{32, 0.5};
    const UcaConfig rx{16, -1.0};
    bool ok = true;
    for (double th = -1.4; th <= 1.4; th += 0.35)
      ok = ok && std::abs(ula_steering(th, tx).squaredNorm() - 32.0) < 1e-9;
    for (double ph = -3.0; ph <= 3.0; ph += 0.75)
      ok = ok &&
           std::abs(uca_steering(ph, rx, 0.0107).squaredNorm() - 16.0) < 1e-9;
    if (!ok) bad.push_back("steering norms");
  }

  // The derivative beam is orthogonal to its steering beam.
  {
    const UlaConfig tx{32, 0.5};
    bool ok = true;
    for (double th = -1.4; th <= 1.4; th += 0.35) {
      const Eigen::VectorXcd a = ula_steering(th, tx);
      const Eigen::VectorXcd d = ula_derivative(th, tx);
      ok = ok && std::abs(a.dot(d)) <= 1e-9 * a.norm() * d.norm();
    }
    if (!ok) bad.push_back("sum/difference orthogonality");
  }

  // Information is linear in the transmit covariance.
  {
    std::mt19937_64 rng(44);
    Scenario scn = random_scenario(rng, 2, 8, 4);
    OfdmConfig cfg;
    cfg.num_subcarriers = 8;
    auto [ch, pos] = params_from_scenario(scn, cfg);
    (void)pos;
    Eigen::MatrixXcd f1 = random_beams(rng, 8, 2, 0.5);
    Eigen::MatrixXcd f2 = random_beams(rng, 8, 3, 0.5);
    Eigen::MatrixXcd x1 = f1 * f1.adjoint(), x2 = f2 * f2.adjoint();
    Eigen::MatrixXd j1 = fim_channel(x1, ch, scn, cfg);
    Eigen::MatrixXd j2 = fim_channel(x2, ch, scn, cfg);
    Eigen::MatrixXd jc = fim_channel(2.0 * x1 + 0.5 * x2, ch, scn, cfg);
    if ((jc - 2.0 * j1 - 0.5 * j2).norm() > 1e-10 * jc.norm())
      bad.push_back("information linearity");
  }

  // More transmit power or a tighter prior never loosens the bound.
  {
    std::mt19937_64 rng(55);
    Scenario scn = random_scenario(rng, 2, 8, 4);
    scn.sigma_clk_m = 1.0;
    OfdmConfig cfg;
    cfg.num_subcarriers = 8;
    auto [ch, pos] = params_from_scenario(scn, cfg);
    Eigen::MatrixXcd f1 = random_beams(rng, 8, 2, 0.5);
    Eigen::MatrixXcd f2 = random_beams(rng, 8, 1, 0.5);
    Eigen::MatrixXcd x1 = f1 * f1.adjoint();
    Eigen::MatrixXcd x2 = x1 + f2 * f2.adjoint();
    const ClockPrior loose{10.0}, tight{0.1};
    const double b_base = peb_of_covariance(x1, ch, pos, scn, cfg, loose);
    const double b_more = peb_of_covariance(x2, ch, pos, scn, cfg, loose);
    const double b_tight = peb_of_covariance(x1, ch, pos, scn, cfg, tight);
    if (!(b_more <= b_base * (1 + 1e-9) && b_tight <= b_base * (1 + 1e-9)))
      bad.push_back("information/prior monotonicity");
  }

  // The circular receive array makes the bound orientation-insensitive.
  double orient_spread = 0.0;
  {
    ScenarioBundle bundle = preset_scenario("table1-scen1");
    apply_desk_scale(bundle);
    Scenario scn = bundle.scenario;
    realize_gain_phases(scn, 0);
    const ClockPrior prior{scn.sigma_clk_m};
    const int n = scn.tx_array.num_elements;
    const Eigen::MatrixXcd x =
        bundle.ofdm.total_power_mw / bundle.ofdm.num_subcarriers / n *
        Eigen::MatrixXcd::Identity(n, n);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int i = 0; i < 8; ++i) {
      Scenario rot = scn;
      rot.ue_orientation_rad = i * kPi / 4.0;
      auto [ch, pos] = params_from_scenario(rot, bundle.ofdm);
      const double v = peb_of_covariance(x, ch, pos, rot, bundle.ofdm, prior);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    orient_spread = hi / lo - 1.0;
    if (!(orient_spread < 0.005)) bad.push_back("orientation independence");
  }

  // Identical configuration and seed reproduce the CSV byte for byte.
  {
    std::ostringstream a, b;
    write_sweep_csv(regime_rows, a);
    write_sweep_csv(run_regimes(regime_opts), b);
    if (a.str() != b.str() || a.str().empty())
      bad.push_back("csv determinism");
  }

  // Exported designs re-evaluate to the recorded bound after a CSV round
  // trip: once for a power-allocated codebook, once for a recovered robust
  // precoder.
  double rt_gap = 0.0;
  {
    ScenarioBundle bundle = preset_scenario("table1-scen1");
    apply_desk_scale(bundle);
    Scenario scn = bundle.scenario;
    realize_gain_phases(scn, 0);
    const ClockPrior prior{scn.sigma_clk_m};
    const UncertaintyGrid grid =
        UncertaintyGrid::from_scenario(scn, bundle.ofdm);
    const auto ivs = aod_intervals_from_grid(grid);
    int nsum = 0;
    for (const auto& iv : ivs)
      nsum += static_cast<int>(iv.beam_angles_rad.size());
    OfdmConfig cfg = bundle.ofdm;
    cfg.num_beams = 2 * nsum;
    cfg.total_power_mw = 100.0 * cfg.num_beams * cfg.symbols_per_beam;

    Codebook cb =
        build_codebook(ivs, CodebookKind::Digital, scn.tx_array, cfg);
    PowerResult pr = optimize_power(cb, grid, cfg, prior);
    cb.rho = pr.rho;
    std::stringstream io;
    write_codebook_csv(cb, io);
    const Codebook back = read_codebook_csv(io);
    const double re_eval = worst_over_grid(
        back.covariance(cfg.symbols_per_beam), grid, cfg, prior);
    rt_gap = std::abs(re_eval - pr.worst_peb_m) / pr.worst_peb_m;
    bool ok = pr.status == SolveStatus::Optimal && rt_gap <= 1e-6;

    DesignResult res = solve_robust(grid, cfg, prior);
    auto oracle = [&](const Eigen::MatrixXcd& xc) {
      return worst_over_grid(xc, grid, cfg, prior);
    };
    RecoveryOptions ropts;
    ropts.seed = 0;
    RecoveryResult rec = recover_precoder(res.X, cfg.num_beams,
                                          cfg.symbols_per_beam, oracle, ropts);
    Codebook rcb;
    for (int m = 0; m < rec.F.cols(); ++m)
      rcb.beams.push_back(Beam{BeamKind::Sum, -1, 0.0, rec.F.col(m)});
    rcb.rho = Eigen::VectorXd::Ones(rec.F.cols());
    std::stringstream rio;
    write_codebook_csv(rcb, rio);
    const Codebook rback = read_codebook_csv(rio);
    const double r_re_eval = worst_over_grid(
        rback.covariance(cfg.symbols_per_beam), grid, cfg, prior);
    const double r_gap = std::abs(r_re_eval - rec.peb_m) / rec.peb_m;
    rt_gap = std::max(rt_gap, r_gap);
    ok = ok && res.status == SolveStatus::Optimal && r_gap <= 1e-6;
    if (!ok) {
      std::snprintf(buf, sizeof(buf), "export/eval round trip (gap %.1e)",
                    rt_gap);
      bad.push_back(buf);
    }
  }

  // At tight clock priors the optimized sum codebook illuminates the LOS
  // interval with most of its power.
  {
    const auto it = runs.find("table1-scen1");
    bool ok = it != runs.end() && it->second.shape_ok;
    if (ok) {
      const auto& ill = it->second.illum.at("sum-opt");
      ok = !ill.empty() && ill.front() > 0.5;
    }
    if (!ok) bad.push_back("low-uncertainty illumination");
  }

  if (bad.empty()) {
    report(11, true,
           "invariant suites hold (orientation spread %.2e, export "
           "round-trip gap %.1e)",
           orient_spread, rt_gap);
  } else {
    std::string detail;
    for (const auto& b : bad) {
      if (!detail.empty()) detail += ", ";
      detail += b;
    }
    report(11, false, "invariant suites failed: %s", detail.c_str());
  }
}

}  // namespace

int main() {
  run_criterion(1, "information matrix", criterion_information_matrix);
  run_criterion(2, "derivatives", criterion_derivatives);
  run_criterion(3, "subspace reduction", criterion_reduction);
  run_criterion(4, "tiny oracle", criterion_tiny_oracle);

  std::map<std::string, CompareRun> runs;
  run_criterion(5, "strategy ordering", [&] {
    runs["table1-scen1"] = compare_run("table1-scen1");
    runs["table1-scen2"] = compare_run("table1-scen2");
    criterion_ordering(runs);
  });

  ExperimentOptions regime_opts = desk_options("table1-scen1");
  std::vector<SweepRecord> regime_rows;
  run_criterion(6, "regime structure", [&] {
    regime_rows = run_regimes(regime_opts);
    criterion_regimes(regime_rows);
  });

  run_criterion(7, "analog gap", [&] { criterion_analog_gap(runs); });
  run_criterion(8, "power allocation", [&] {
    criterion_power_allocation(runs);
  });
  run_criterion(9, "time sharing", criterion_timeshare);
  run_criterion(10, "beam counts", criterion_beam_counts);
  run_criterion(11, "invariants", [&] {
    if (regime_rows.empty()) regime_rows = run_regimes(regime_opts);
    criterion_invariants(regime_rows, regime_opts, runs);
  });

  std::printf("%d of 11 criteria passed\n", 11 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
