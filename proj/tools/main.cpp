// SPDX-License-Identifier: Apache-2.0
//
// pebopt: worst-case position-error-bound experiments for a mmWave downlink
// with clock uncertainty. Subcommands sweep the clock prior across
// reflection strengths (regimes), compare design strategies (compare),
// export transmit patterns (beampattern), trade power allocation against
// integer time sharing (timeshare), and run one design at the scenario's
// own clock prior (design).

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pebopt/experiments.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace pebopt;

namespace {

constexpr const char* kVersion = "0.1.0";

struct CommonArgs {
  std::string scenario_path;
  std::string preset = "table1-scen1";
  std::string out_dir;
  std::uint64_t seed = 0;
  int workers = 0;
  bool desk_scale = false;
  bool timing = false;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  auto* sc = cmd->add_option("--scenario", a.scenario_path,
                             "Scenario JSON file (overrides --preset)");
  cmd->add_option("--preset", a.preset,
                  "Built-in deployment when no scenario file is given")
      ->check(CLI::IsMember({"table1-scen1", "table1-scen2"}))
      ->excludes(sc);
  cmd->add_option("--out", a.out_dir, "Output directory")->required();
  cmd->add_option("--seed", a.seed,
                  "Seed for gain phases and recovery randomization");
  cmd->add_option("--workers", a.workers,
                  "Worker threads for sweep points (0 = hardware)");
  cmd->add_flag("--desk-scale", a.desk_scale,
                "Shrink the subcarrier count for quick runs");
  cmd->add_flag("--timing", a.timing,
                "Record wall times in CSV rows (breaks byte determinism)");
}

ExperimentOptions make_options(const CommonArgs& a) {
  ExperimentOptions opts;
  opts.bundle = a.scenario_path.empty() ? preset_scenario(a.preset)
                                        : ingest_scenario(a.scenario_path);
  if (a.desk_scale) apply_desk_scale(opts.bundle);
  opts.seed = a.seed;
  opts.workers = a.workers;
  opts.timing = a.timing;
  return opts;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f.good())
    throw std::runtime_error("cannot write '" + path.string() + "'");
}

void save_manifest(const fs::path& out, const char* command,
                   const CommonArgs& a, const ExperimentOptions& opts,
                   const std::string& method = {}) {
  ordered_json j;
  j["tool"] = "pebopt";
  j["version"] = kVersion;
  j["command"] = command;
  if (!method.empty()) j["method"] = method;
  if (a.scenario_path.empty()) {
    j["preset"] = a.preset;
  } else {
    j["scenario_file"] = a.scenario_path;
  }
  j["desk_scale"] = a.desk_scale;
  j["seed"] = a.seed;
  j["workers"] = a.workers;
  j["timing"] = a.timing;
  ordered_json sweep;
  sweep["gammas"] = opts.gammas;
  sweep["regime_points"] = opts.regime_points;
  sweep["compare_points"] = opts.compare_points;
  sweep["sigma_lo_m"] = opts.sigma_lo_m;
  sweep["sigma_hi_m"] = opts.sigma_hi_m;
  sweep["pattern_points"] = opts.pattern_points;
  sweep["pattern_floor_db"] = opts.pattern_floor_db;
  sweep["pattern_sigmas_m"] = opts.pattern_sigmas_m;
  sweep["timeshare_factors"] = opts.timeshare_factors;
  sweep["timeshare_sigma_m"] = opts.timeshare_sigma_m;
  sweep["max_power_mw"] = opts.max_power_mw;
  j["sweep"] = sweep;
  j["scenario"] = ordered_json::parse(scenario_to_json(opts.bundle));
  write_text(out / "manifest.json", j.dump(2) + "\n");
}

bool row_ok(const SweepRecord& r) {
  return r.solver_status.rfind("optimal", 0) == 0 ||
         r.solver_status == "direct";
}

// 0 when every row succeeded, 3 when all failed, 4 for a mix.
int sweep_exit(const std::vector<SweepRecord>& rows) {
  int ok = 0;
  for (const auto& r : rows) ok += row_ok(r) ? 1 : 0;
  if (ok == static_cast<int>(rows.size())) return 0;
  return ok == 0 ? 3 : 4;
}

void save_sweep(const fs::path& path, const std::vector<SweepRecord>& rows) {
  std::ostringstream os;
  write_sweep_csv(rows, os);
  write_text(path, os.str());
}

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// One design at the scenario's own clock prior; exports the designed beams
// in the codebook CSV format plus a one-row summary.
int run_design_cmd(const fs::path& out, const ExperimentOptions& opts,
                   const std::string& method) {
  Scenario scn = opts.bundle.scenario;
  realize_gain_phases(scn, opts.seed);
  const ClockPrior prior{scn.sigma_clk_m};
  const UncertaintyGrid grid =
      UncertaintyGrid::from_scenario(scn, opts.bundle.ofdm);
  const auto ivs = aod_intervals_from_grid(grid);
  int nsum = 0;
  for (const auto& iv : ivs)
    nsum += static_cast<int>(iv.beam_angles_rad.size());

  OfdmConfig cfg = opts.bundle.ofdm;
  cfg.num_beams = (method == "sum") ? nsum : 2 * nsum;
  cfg.total_power_mw =
      opts.max_power_mw * cfg.num_beams * cfg.symbols_per_beam;
  const int lrep = cfg.symbols_per_beam;

  SweepRecord row;
  row.sweep_var = scn.sigma_clk_m;
  row.method = method;
  Codebook cb;
  const double t0 = opts.timing ? now_s() : 0.0;

  if (method == "robust") {
    const DesignResult res = solve_robust(grid, cfg, prior);
    auto oracle = [&](const Eigen::MatrixXcd& x) {
      double worst = 0.0;
      for (int n = 0; n < grid.size(); ++n)
        worst = std::max(worst, peb_of_covariance(x, grid.channels[n],
                                                  grid.points[n], grid.base,
                                                  cfg, prior));
      return worst;
    };
    RecoveryOptions ropts;
    ropts.seed = opts.seed;
    const RecoveryResult rec =
        recover_precoder(res.X, cfg.num_beams, lrep, oracle, ropts);
    // Recovered columns are not steered beams; path -1 marks them.
    for (int m = 0; m < rec.F.cols(); ++m)
      cb.beams.push_back({BeamKind::Sum, -1, 0.0, rec.F.col(m)});
    cb.rho = Eigen::VectorXd::Ones(cfg.num_beams);
    row.worst_peb_m = rec.peb_m;
    row.solver_status = status_name(res.status);
  } else {
    const CodebookKind kind = (method == "digital") ? CodebookKind::Digital
                              : (method == "analog") ? CodebookKind::Analog
                                                     : CodebookKind::SumOnly;
    cb = build_codebook(ivs, kind, scn.tx_array, cfg);
    const PowerResult pa = optimize_power(cb, grid, cfg, prior);
    cb.rho = pa.rho;
    row.worst_peb_m = pa.worst_peb_m;
    row.solver_status = status_name(pa.status);
  }
  if (opts.timing) row.wall_s = now_s() - t0;
  row.los_illum =
      relative_los_illumination(cb.covariance(lrep), ivs, scn.tx_array);

  save_sweep(out / "design.csv", {row});
  std::ostringstream os;
  write_codebook_csv(cb, os);
  write_text(out / ("codebook_" + method + ".csv"), os.str());
  return row_ok(row) ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Worst-case position-error-bound design experiments"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonArgs args;
  std::string method = "robust";
  CLI::App* regimes = app.add_subcommand(
      "regimes", "Clock-prior sweep per reflection strength");
  CLI::App* compare = app.add_subcommand(
      "compare", "Strategy comparison across the clock-prior sweep");
  CLI::App* beampattern = app.add_subcommand(
      "beampattern", "Transmit patterns of the compared strategies");
  CLI::App* timeshare = app.add_subcommand(
      "timeshare", "Power allocation versus integer time sharing");
  CLI::App* design = app.add_subcommand(
      "design", "One design at the scenario's clock prior");
  for (CLI::App* c : {regimes, compare, beampattern, timeshare, design})
    add_common(c, args);
  design
      ->add_option("--method", method,
                   "Design strategy: robust, digital, analog, or sum")
      ->check(CLI::IsMember({"robust", "digital", "analog", "sum"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const ExperimentOptions opts = make_options(args);
    const fs::path out = args.out_dir;
    fs::create_directories(out);

    if (app.got_subcommand(regimes)) {
      save_manifest(out, "regimes", args, opts);
      const auto rows = run_regimes(opts);
      save_sweep(out / "regimes.csv", rows);
      return sweep_exit(rows);
    }
    if (app.got_subcommand(compare)) {
      save_manifest(out, "compare", args, opts);
      const auto rows = run_compare(opts);
      save_sweep(out / "compare.csv", rows);
      return sweep_exit(rows);
    }
    if (app.got_subcommand(beampattern)) {
      save_manifest(out, "beampattern", args, opts);
      const auto rows = run_beampattern(opts);
      std::ostringstream os;
      write_beampattern_csv(rows, os);
      write_text(out / "beampattern.csv", os.str());
      return 0;
    }
    if (app.got_subcommand(timeshare)) {
      save_manifest(out, "timeshare", args, opts);
      const auto rows = run_timeshare(opts);
      save_sweep(out / "timeshare.csv", rows);
      return sweep_exit(rows);
    }
    save_manifest(out, "design", args, opts, method);
    return run_design_cmd(out, opts, method);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
