// SPDX-License-Identifier: Apache-2.0

#include "pebopt/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "pebopt/arrays.hpp"
#include "pebopt/fisher.hpp"

namespace pebopt {

namespace {

std::vector<double> logspace(double lo, double hi, int n) {
  if (n < 2 || !(lo > 0.0) || !(hi > lo))
    throw std::invalid_argument("log sweep needs n >= 2 and 0 < lo < hi");
  std::vector<double> out(n);
  const double llo = std::log10(lo), lhi = std::log10(hi);
  for (int i = 0; i < n; ++i)
    out[i] = std::pow(10.0, llo + (lhi - llo) * i / (n - 1));
  return out;
}

// Runs fn(0..n-1) on a small thread pool; slot-indexed outputs keep the
// result order independent of completion order.
void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (workers <= 0)
    workers = static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) fn(i);
    });
  for (auto& t : pool) t.join();
}

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// Scenario with gain phases realized from the run seed (preset phases win).
Scenario prepared_scenario(const ExperimentOptions& opts) {
  Scenario scn = opts.bundle.scenario;
  realize_gain_phases(scn, opts.seed);
  return scn;
}

// Reflection-strength variant: zero drops the NLOS paths entirely.
Scenario with_gamma(const Scenario& base, double gamma) {
  Scenario scn = base;
  if (gamma == 0.0) {
    scn.incidence_pos_m.clear();
    scn.nlos_gamma.clear();
    if (!scn.gain_phase_rad.empty()) scn.gain_phase_rad.resize(1);
  } else {
    for (auto& g : scn.nlos_gamma) g = gamma;
  }
  return scn;
}

double worst_direct(const Eigen::MatrixXcd& x, const UncertaintyGrid& grid,
                    const OfdmConfig& cfg, const ClockPrior& prior,
                    bool known_los = false) {
  double worst = 0.0;
  for (int n = 0; n < grid.size(); ++n) {
    double v;
    if (known_los) {
      FimLinearMap map(grid.channels[n], grid.points[n], grid.base, cfg,
                       prior);
      v = map.known_los_variant().peb_of(x);
    } else {
      v = peb_of_covariance(x, grid.channels[n], grid.points[n], grid.base,
                            cfg, prior);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

int digital_beam_count(const std::vector<AodInterval>& ivs) {
  int nsum = 0;
  for (const auto& iv : ivs)
    nsum += static_cast<int>(iv.beam_angles_rad.size());
  return 2 * nsum;
}

// Budget convention: every active beam radiates max_power_mw per symbol.
OfdmConfig budget_for(const OfdmConfig& base, int num_beams,
                      double max_power_mw) {
  OfdmConfig cfg = base;
  cfg.num_beams = num_beams;
  cfg.total_power_mw =
      max_power_mw * num_beams * static_cast<double>(cfg.symbols_per_beam);
  return cfg;
}

void fmt_double(std::ostream& os, double v) {
  char buf[40];
  if (std::isnan(v)) {
    os << "nan";
  } else if (std::isinf(v)) {
    os << (v > 0 ? "inf" : "-inf");
  } else {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
  }
}

std::string gamma_label(double gamma, bool known_los) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "gamma=%g%s", gamma,
                known_los ? "-perfect-los" : "");
  return buf;
}

}  // namespace

double relative_los_illumination(const Eigen::MatrixXcd& x_cov,
                                 const std::vector<AodInterval>& intervals,
                                 const UlaConfig& tx) {
  if (intervals.empty())
    throw std::invalid_argument("illumination needs at least one interval");

  auto integrate = [&](double lo, double hi) {
    if (!(hi > lo)) return 0.0;
    const int n = 1000;
    Eigen::VectorXd th(n);
    for (int i = 0; i < n; ++i) th(i) = lo + (hi - lo) * i / (n - 1);
    const Eigen::VectorXd p = beampattern_from_cov(x_cov, th, tx);
    const double h = (hi - lo) / (n - 1);
    double sum = 0.5 * (p(0) + p(n - 1));
    for (int i = 1; i + 1 < n; ++i) sum += p(i);
    return h * sum;
  };

  double num = 0.0;
  bool has_los = false;
  for (const auto& iv : intervals)
    if (iv.path == 0) {
      num = integrate(iv.lower_rad, iv.upper_rad);
      has_los = true;
    }
  if (!has_los)
    throw std::invalid_argument("illumination needs the LOS interval");

  // Union of all intervals, integrated once per merged segment.
  std::vector<std::pair<double, double>> segs;
  for (const auto& iv : intervals) segs.push_back({iv.lower_rad, iv.upper_rad});
  std::sort(segs.begin(), segs.end());
  double den = 0.0;
  double lo = segs[0].first, hi = segs[0].second;
  for (size_t i = 1; i < segs.size(); ++i) {
    if (segs[i].first <= hi) {
      hi = std::max(hi, segs[i].second);
    } else {
      den += integrate(lo, hi);
      lo = segs[i].first;
      hi = segs[i].second;
    }
  }
  den += integrate(lo, hi);

  if (!(den > 0.0) || !std::isfinite(den))
    return std::numeric_limits<double>::quiet_NaN();
  return std::min(1.0, std::max(0.0, num / den));
}

std::vector<SweepRecord> run_regimes(const ExperimentOptions& opts) {
  const Scenario base = prepared_scenario(opts);
  const std::vector<double> sigmas =
      logspace(opts.sigma_lo_m, opts.sigma_hi_m, opts.regime_points);

  struct Task {
    double gamma;
    double sigma;
    bool known_los;
  };
  std::vector<Task> tasks;
  for (double g : opts.gammas)
    for (double s : sigmas) tasks.push_back({g, s, false});
  for (double s : sigmas) tasks.push_back({0.1, s, true});

  std::vector<SweepRecord> rows(tasks.size());
  parallel_for(static_cast<int>(tasks.size()), opts.workers, [&](int i) {
    const Task& t = tasks[i];
    SweepRecord& r = rows[i];
    r.sweep_var = t.sigma;
    r.method = gamma_label(t.gamma, t.known_los);
    const double t0 = opts.timing ? now_s() : 0.0;
    try {
      Scenario scn = with_gamma(base, t.gamma);
      scn.sigma_clk_m = t.sigma;
      const ClockPrior prior{t.sigma};
      const UncertaintyGrid grid =
          UncertaintyGrid::from_scenario(scn, opts.bundle.ofdm);
      const auto ivs = aod_intervals_from_grid(grid);
      const OfdmConfig cfg = budget_for(
          opts.bundle.ofdm, digital_beam_count(ivs), opts.max_power_mw);
      Codebook cb =
          build_codebook(ivs, CodebookKind::Digital, scn.tx_array, cfg);
      DesignOptions dopts;
      dopts.known_los = t.known_los;
      PowerResult pa = optimize_power(cb, grid, cfg, prior, dopts);
      cb.rho = pa.rho;
      r.worst_peb_m = pa.worst_peb_m;
      r.solver_status = status_name(pa.status);
      r.los_illum = relative_los_illumination(
          cb.covariance(cfg.symbols_per_beam), ivs, scn.tx_array);
    } catch (const std::exception&) {
      r.solver_status = "exception";
    }
    if (opts.timing) r.wall_s = now_s() - t0;
  });
  return rows;
}

std::vector<SweepRecord> run_compare(const ExperimentOptions& opts) {
  const Scenario base = prepared_scenario(opts);
  const std::vector<double> sigmas =
      logspace(opts.sigma_lo_m, opts.sigma_hi_m, opts.compare_points);
  constexpr int kMethods = 5;

  std::vector<SweepRecord> rows(sigmas.size() * kMethods);
  parallel_for(static_cast<int>(sigmas.size()), opts.workers, [&](int si) {
    Scenario scn = base;
    scn.sigma_clk_m = sigmas[si];
    const ClockPrior prior{sigmas[si]};
    SweepRecord* out = &rows[si * kMethods];
    const char* names[kMethods] = {"robust", "digital-opt", "analog-opt",
                                   "sum-opt", "sum-uniform"};
    for (int m = 0; m < kMethods; ++m) {
      out[m].sweep_var = sigmas[si];
      out[m].method = names[m];
      out[m].solver_status = "exception";
    }
    try {
      const UncertaintyGrid grid =
          UncertaintyGrid::from_scenario(scn, opts.bundle.ofdm);
      const auto ivs = aod_intervals_from_grid(grid);
      const int mdig = digital_beam_count(ivs);
      const OfdmConfig cfg_dig =
          budget_for(opts.bundle.ofdm, mdig, opts.max_power_mw);
      const OfdmConfig cfg_sum =
          budget_for(opts.bundle.ofdm, mdig / 2, opts.max_power_mw);
      const int lrep = cfg_dig.symbols_per_beam;

      auto record = [&](int slot, const Eigen::MatrixXcd& x, double peb,
                        SolveStatus status, double t0) {
        out[slot].worst_peb_m = peb;
        out[slot].solver_status = status_name(status);
        out[slot].los_illum =
            relative_los_illumination(x, ivs, scn.tx_array);
        if (opts.timing) out[slot].wall_s = now_s() - t0;
      };

      double t0 = opts.timing ? now_s() : 0.0;
      DesignResult rob = solve_robust(grid, cfg_dig, prior);
      record(0, rob.X, rob.worst_peb_m, rob.status, t0);

      t0 = opts.timing ? now_s() : 0.0;
      Codebook dig =
          build_codebook(ivs, CodebookKind::Digital, scn.tx_array, cfg_dig);
      PowerResult pd = optimize_power(dig, grid, cfg_dig, prior);
      dig.rho = pd.rho;
      record(1, dig.covariance(lrep), pd.worst_peb_m, pd.status, t0);

      t0 = opts.timing ? now_s() : 0.0;
      Codebook ana =
          build_codebook(ivs, CodebookKind::Analog, scn.tx_array, cfg_dig);
      PowerResult pan = optimize_power(ana, grid, cfg_dig, prior);
      ana.rho = pan.rho;
      record(2, ana.covariance(lrep), pan.worst_peb_m, pan.status, t0);

      t0 = opts.timing ? now_s() : 0.0;
      Codebook sum =
          build_codebook(ivs, CodebookKind::SumOnly, scn.tx_array, cfg_sum);
      PowerResult psu = optimize_power(sum, grid, cfg_sum, prior);
      Codebook sum_w = sum;
      sum_w.rho = psu.rho;
      record(3, sum_w.covariance(lrep), psu.worst_peb_m, psu.status, t0);

      t0 = opts.timing ? now_s() : 0.0;
      const Eigen::MatrixXcd xu = sum.covariance(lrep);
      const double pu = worst_direct(xu, grid, cfg_sum, prior);
      out[4].worst_peb_m = pu;
      out[4].solver_status = "direct";
      out[4].los_illum = relative_los_illumination(xu, ivs, scn.tx_array);
      if (opts.timing) out[4].wall_s = now_s() - t0;
    } catch (const std::exception&) {
      // statuses stay "exception" for the unfinished slots
    }
  });
  return rows;
}

std::vector<BeampatternRecord> run_beampattern(const ExperimentOptions& opts) {
  const Scenario base = prepared_scenario(opts);
  const int np = opts.pattern_points;
  if (np < 2) throw std::invalid_argument("pattern needs at least 2 points");
  Eigen::VectorXd thetas(np);
  for (int i = 0; i < np; ++i)
    thetas(i) = -0.5 * kPi + kPi * i / (np - 1);

  struct Design {
    std::string method;
    Eigen::MatrixXcd x;
  };
  const int ns = static_cast<int>(opts.pattern_sigmas_m.size());
  std::vector<std::vector<Design>> designs(ns);

  parallel_for(ns, opts.workers, [&](int si) {
    Scenario scn = base;
    scn.sigma_clk_m = opts.pattern_sigmas_m[si];
    const ClockPrior prior{scn.sigma_clk_m};
    const UncertaintyGrid grid =
        UncertaintyGrid::from_scenario(scn, opts.bundle.ofdm);
    const auto ivs = aod_intervals_from_grid(grid);
    const int mdig = digital_beam_count(ivs);
    const OfdmConfig cfg_dig =
        budget_for(opts.bundle.ofdm, mdig, opts.max_power_mw);
    const OfdmConfig cfg_sum =
        budget_for(opts.bundle.ofdm, mdig / 2, opts.max_power_mw);
    const int lrep = cfg_dig.symbols_per_beam;

    DesignResult rob = solve_robust(grid, cfg_dig, prior);
    designs[si].push_back({"robust", rob.X});

    Codebook dig =
        build_codebook(ivs, CodebookKind::Digital, scn.tx_array, cfg_dig);
    dig.rho = optimize_power(dig, grid, cfg_dig, prior).rho;
    designs[si].push_back({"digital-opt", dig.covariance(lrep)});

    Codebook ana =
        build_codebook(ivs, CodebookKind::Analog, scn.tx_array, cfg_dig);
    ana.rho = optimize_power(ana, grid, cfg_dig, prior).rho;
    designs[si].push_back({"analog-opt", ana.covariance(lrep)});

    Codebook sum =
        build_codebook(ivs, CodebookKind::SumOnly, scn.tx_array, cfg_sum);
    sum.rho = optimize_power(sum, grid, cfg_sum, prior).rho;
    designs[si].push_back({"sum-opt", sum.covariance(lrep)});
  });

  std::vector<BeampatternRecord> rows;
  rows.reserve(static_cast<size_t>(ns) * 4 * np);
  for (int si = 0; si < ns; ++si)
    for (const auto& d : designs[si]) {
      const Eigen::VectorXd p =
          beampattern_from_cov(d.x, thetas, base.tx_array);
      for (int i = 0; i < np; ++i) {
        BeampatternRecord r;
        r.sigma_clk_m = opts.pattern_sigmas_m[si];
        r.method = d.method;
        r.theta_rad = thetas(i);
        const double db = 10.0 * std::log10(std::max(p(i), 1e-300));
        r.pattern_db = std::max(db, opts.pattern_floor_db);
        rows.push_back(std::move(r));
      }
    }
  return rows;
}

std::vector<SweepRecord> run_timeshare(const ExperimentOptions& opts) {
  Scenario scn = prepared_scenario(opts);
  scn.sigma_clk_m = opts.timeshare_sigma_m;
  const ClockPrior prior{scn.sigma_clk_m};
  const UncertaintyGrid grid =
      UncertaintyGrid::from_scenario(scn, opts.bundle.ofdm);
  const auto ivs = aod_intervals_from_grid(grid);
  const int mdig = digital_beam_count(ivs);
  const OfdmConfig cfg =
      budget_for(opts.bundle.ofdm, mdig, opts.max_power_mw);
  const Codebook cb =
      build_codebook(ivs, CodebookKind::Digital, scn.tx_array, cfg);

  const int nl = static_cast<int>(opts.timeshare_factors.size());
  std::vector<SweepRecord> rows(2 * nl);
  parallel_for(nl, opts.workers, [&](int li) {
    const int lrep = opts.timeshare_factors[li];
    SweepRecord& pa = rows[2 * li];
    SweepRecord& ts = rows[2 * li + 1];
    pa.sweep_var = ts.sweep_var = lrep;
    pa.method = "power-allocation";
    ts.method = "time-sharing";
    const double t0 = opts.timing ? now_s() : 0.0;
    try {
      TimeSharing sh =
          time_share(cb, grid, cfg, prior, lrep, opts.max_power_mw);
      pa.worst_peb_m = sh.continuous_peb_m;
      pa.solver_status = status_name(sh.status);
      ts.worst_peb_m = sh.quantized_peb_m;
      ts.solver_status = std::string(status_name(sh.status)) +
                         (sh.degenerate ? "+degenerate" : "");

      OfdmConfig tcfg = budget_for(cfg, cb.size(), opts.max_power_mw);
      tcfg.symbols_per_beam = lrep;
      tcfg.total_power_mw = opts.max_power_mw * cb.size() * lrep;
      Codebook tcb = cb;
      const double norm2 = opts.max_power_mw / tcfg.num_subcarriers;
      for (auto& b : tcb.beams)
        b.weights *= std::sqrt(norm2 / b.weights.squaredNorm());
      Codebook cont = tcb;
      cont.rho = sh.rho;
      pa.los_illum = relative_los_illumination(cont.covariance(lrep), ivs,
                                               scn.tx_array);
      Codebook quant = tcb;
      quant.rho = sh.factors.cast<double>() / static_cast<double>(lrep);
      ts.los_illum = relative_los_illumination(quant.covariance(lrep), ivs,
                                               scn.tx_array);
    } catch (const std::exception&) {
      pa.solver_status = ts.solver_status = "exception";
    }
    if (opts.timing) {
      const double dt = now_s() - t0;
      pa.wall_s = ts.wall_s = dt;
    }
  });
  return rows;
}

void write_sweep_csv(const std::vector<SweepRecord>& rows, std::ostream& os) {
  os << "sweep_var,method,worst_peb_m,los_illum,solver_status,wall_s\n";
  for (const auto& r : rows) {
    fmt_double(os, r.sweep_var);
    os << "," << r.method << ",";
    fmt_double(os, r.worst_peb_m);
    os << ",";
    fmt_double(os, r.los_illum);
    os << "," << r.solver_status << ",";
    fmt_double(os, r.wall_s);
    os << "\n";
  }
}

void write_beampattern_csv(const std::vector<BeampatternRecord>& rows,
                           std::ostream& os) {
  os << "sigma_clk_m,method,theta_rad,pattern_db\n";
  for (const auto& r : rows) {
    fmt_double(os, r.sigma_clk_m);
    os << "," << r.method << ",";
    fmt_double(os, r.theta_rad);
    os << ",";
    fmt_double(os, r.pattern_db);
    os << "\n";
  }
}

}  // namespace pebopt
