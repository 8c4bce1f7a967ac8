// SPDX-License-Identifier: Apache-2.0

#include "pebopt/codebook.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "pebopt/arrays.hpp"
#include "pebopt/fisher.hpp"

namespace pebopt {

namespace {

// Scales a beam to the requested squared norm.
Eigen::VectorXcd with_norm2(const Eigen::VectorXcd& v, double norm2) {
  const double n2 = v.squaredNorm();
  if (!(n2 > 0.0))
    throw std::invalid_argument("beam weights vanish; cannot normalize");
  return v * std::sqrt(norm2 / n2);
}

double worst_peb_over(const Eigen::MatrixXcd& x, const UncertaintyGrid& grid,
                      const OfdmConfig& cfg, const ClockPrior& prior,
                      bool known_los) {
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

}  // namespace

const char* beam_kind_name(BeamKind k) {
  return k == BeamKind::Sum ? "sum" : "diff";
}

const char* codebook_kind_name(CodebookKind k) {
  switch (k) {
    case CodebookKind::Digital: return "digital";
    case CodebookKind::Analog: return "analog";
    default: return "sum_only";
  }
}

Eigen::MatrixXcd Codebook::matrix() const {
  if (beams.empty()) return {};
  Eigen::MatrixXcd f(beams[0].weights.size(), size());
  for (int m = 0; m < size(); ++m) f.col(m) = beams[m].weights;
  return f;
}

Eigen::MatrixXcd Codebook::covariance(int num_repeats) const {
  if (static_cast<int>(rho.size()) != size())
    throw std::invalid_argument("power weights length mismatch");
  const Eigen::MatrixXcd f = matrix();
  Eigen::MatrixXcd x = static_cast<double>(num_repeats) * f *
                       rho.asDiagonal() * f.adjoint();
  return 0.5 * (x + x.adjoint());
}

double broadside_hpbw_rad(const UlaConfig& cfg) {
  return half_power_beamwidth(0.0, cfg);
}

std::vector<AodInterval> aod_intervals_from_grid(const UncertaintyGrid& grid) {
  if (grid.size() < 1)
    throw std::invalid_argument("uncertainty grid is empty");
  const double hp = broadside_hpbw_rad(grid.base.tx_array);
  const int npaths = static_cast<int>(grid.channels[0].theta_rad.size());

  std::vector<AodInterval> out;
  out.reserve(npaths);
  for (int g = 0; g < npaths; ++g) {
    double lo = grid.channels[0].theta_rad(g);
    double hi = lo;
    for (int n = 1; n < grid.size(); ++n) {
      lo = std::min(lo, grid.channels[n].theta_rad(g));
      hi = std::max(hi, grid.channels[n].theta_rad(g));
    }
    AodInterval iv;
    iv.path = g;
    iv.lower_rad = lo - 0.5 * hp;
    iv.upper_rad = hi + 0.5 * hp;
    // March from the lowest angle in beamwidth steps; the last beam lands on
    // the highest angle so its half-power reach covers the padded edge.
    std::vector<double> angles;
    const double tiny = 1e-12 * std::max(1.0, hp);
    for (double t = lo; t < hi - tiny; t += hp) angles.push_back(t);
    angles.push_back(hi);
    iv.beam_angles_rad = Eigen::Map<const Eigen::VectorXd>(
        angles.data(), static_cast<int>(angles.size()));
    out.push_back(std::move(iv));
  }
  return out;
}

Codebook build_codebook(const std::vector<AodInterval>& intervals,
                        CodebookKind kind, const UlaConfig& tx,
                        const OfdmConfig& cfg) {
  if (intervals.empty())
    throw std::invalid_argument("codebook needs at least one interval");
  int nsum = 0;
  for (const auto& iv : intervals)
    nsum += static_cast<int>(iv.beam_angles_rad.size());
  if (nsum < 1) throw std::invalid_argument("intervals carry no beam angles");
  const int m = kind == CodebookKind::SumOnly ? nsum : 2 * nsum;
  const double norm2 =
      cfg.total_power_mw /
      (static_cast<double>(cfg.num_subcarriers) * cfg.symbols_per_beam * m);

  Codebook cb;
  cb.kind = kind;
  cb.beams.reserve(m);
  for (const auto& iv : intervals)
    for (int i = 0; i < iv.beam_angles_rad.size(); ++i) {
      const double th = iv.beam_angles_rad(i);
      cb.beams.push_back({BeamKind::Sum, iv.path, th,
                          with_norm2(ula_steering(th, tx).conjugate(), norm2)});
    }
  if (kind != CodebookKind::SumOnly) {
    for (const auto& iv : intervals)
      for (int i = 0; i < iv.beam_angles_rad.size(); ++i) {
        const double th = iv.beam_angles_rad(i);
        Eigen::VectorXcd w = ula_derivative(th, tx).conjugate();
        if (kind == CodebookKind::Analog) w = analog_project(w);
        cb.beams.push_back({BeamKind::Diff, iv.path, th, with_norm2(w, norm2)});
      }
  }
  cb.rho = Eigen::VectorXd::Ones(m);
  return cb;
}

PowerResult optimize_power(const Codebook& cb, const UncertaintyGrid& grid,
                           const OfdmConfig& cfg, const ClockPrior& prior,
                           const DesignOptions& opts) {
  if (cb.size() < 1) throw std::invalid_argument("codebook is empty");
  const double norm2 =
      cfg.total_power_mw / (static_cast<double>(cfg.num_subcarriers) *
                            cfg.symbols_per_beam * cb.size());
  for (const auto& b : cb.beams)
    if (std::abs(b.weights.squaredNorm() - norm2) > 1e-6 * norm2)
      throw std::invalid_argument(
          "beam norms do not match the transmit budget");
  return solve_power_allocation(grid, cfg, prior, cb.matrix(),
                                cfg.symbols_per_beam, opts);
}

Eigen::VectorXi round_time_share(const Eigen::VectorXd& rho,
                                 int symbols_per_beam, bool* degenerate) {
  if (symbols_per_beam < 1)
    throw std::invalid_argument("symbol count must be positive");
  if (rho.size() < 1) throw std::invalid_argument("allocation is empty");
  Eigen::VectorXi f(rho.size());
  for (int i = 0; i < rho.size(); ++i)
    f(i) = std::max<long>(0, std::lround(symbols_per_beam * rho(i)));
  const bool degen = f.maxCoeff() == 0;
  if (degen) {
    int best = 0;
    rho.maxCoeff(&best);
    f(best) = 1;
  }
  if (degenerate) *degenerate = degen;
  return f;
}

TimeSharing time_share(const Codebook& cb, const UncertaintyGrid& grid,
                       const OfdmConfig& cfg, const ClockPrior& prior,
                       int symbols_per_beam, double max_power_mw,
                       const DesignOptions& opts) {
  if (symbols_per_beam < 1)
    throw std::invalid_argument("symbol count must be positive");
  if (!(max_power_mw > 0.0))
    throw std::invalid_argument("per-beam power must be positive");
  if (cb.size() < 1) throw std::invalid_argument("codebook is empty");

  // The schedule budget grants every beam its power cap for every symbol.
  OfdmConfig tcfg = cfg;
  tcfg.symbols_per_beam = symbols_per_beam;
  tcfg.num_beams = cb.size();
  tcfg.total_power_mw =
      static_cast<double>(symbols_per_beam) * cb.size() * max_power_mw;
  Codebook tcb = cb;
  const double norm2 = max_power_mw / tcfg.num_subcarriers;
  for (auto& b : tcb.beams) b.weights = with_norm2(b.weights, norm2);

  PowerResult pa = optimize_power(tcb, grid, tcfg, prior, opts);

  TimeSharing ts;
  ts.status = pa.status;
  ts.rho = pa.rho;
  ts.symbols_per_beam = symbols_per_beam;
  ts.max_power_mw = max_power_mw;
  ts.factors = round_time_share(pa.rho, symbols_per_beam, &ts.degenerate);
  ts.continuous_peb_m = pa.worst_peb_m;

  const Eigen::MatrixXcd f = tcb.matrix();
  Eigen::MatrixXcd xts = Eigen::MatrixXcd::Zero(f.rows(), f.rows());
  for (int m = 0; m < cb.size(); ++m)
    xts += static_cast<double>(ts.factors(m)) * f.col(m) * f.col(m).adjoint();
  xts = 0.5 * (xts + xts.adjoint()).eval();
  ts.quantized_peb_m = worst_peb_over(xts, grid, tcfg, prior, opts.known_los);
  return ts;
}

void write_codebook_csv(const Codebook& cb, std::ostream& os) {
  if (static_cast<int>(cb.rho.size()) != cb.size())
    throw std::invalid_argument("power weights length mismatch");
  const int n = cb.beams.empty() ? 0 : int(cb.beams[0].weights.size());
  os << "kind,path,pointing_rad,rho";
  for (int i = 0; i < n; ++i) os << ",w" << i << "_re,w" << i << "_im";
  os << "\n";
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
  };
  for (int m = 0; m < cb.size(); ++m) {
    const Beam& b = cb.beams[m];
    os << beam_kind_name(b.kind) << "," << b.path << ",";
    put(b.pointing_rad);
    os << ",";
    put(cb.rho(m));
    for (int i = 0; i < n; ++i) {
      os << ",";
      put(b.weights(i).real());
      os << ",";
      put(b.weights(i).imag());
    }
    os << "\n";
  }
}

Codebook read_codebook_csv(std::istream& is) {
  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) out.push_back(cell);
    return out;
  };

  std::string line;
  if (!std::getline(is, line))
    throw std::invalid_argument("codebook csv: missing header");
  const auto head = split(line);
  if (head.size() < 4 || head[0] != "kind" || head[1] != "path" ||
      head[2] != "pointing_rad" || head[3] != "rho" ||
      (head.size() - 4) % 2 != 0)
    throw std::invalid_argument("codebook csv: unexpected header");
  const int n = static_cast<int>(head.size() - 4) / 2;

  Codebook cb;
  std::vector<double> rho;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != head.size())
      throw std::invalid_argument("codebook csv: row width mismatch");
    Beam b;
    if (cells[0] == "sum") {
      b.kind = BeamKind::Sum;
    } else if (cells[0] == "diff") {
      b.kind = BeamKind::Diff;
    } else {
      throw std::invalid_argument("codebook csv: unknown beam kind '" +
                                  cells[0] + "'");
    }
    b.path = std::stoi(cells[1]);
    b.pointing_rad = std::stod(cells[2]);
    rho.push_back(std::stod(cells[3]));
    b.weights.resize(n);
    for (int i = 0; i < n; ++i)
      b.weights(i) = cxd(std::stod(cells[4 + 2 * i]),
                         std::stod(cells[5 + 2 * i]));
    cb.beams.push_back(std::move(b));
  }
  cb.rho = Eigen::Map<const Eigen::VectorXd>(rho.data(), rho.size());
  return cb;
}

}  // namespace pebopt
