// SPDX-License-Identifier: Apache-2.0
#include "pebopt/sdp_design.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <utility>

namespace pebopt {

namespace {

// n lattice offsets over [-half, half], endpoints included.
std::vector<double> lattice(double half, int n) {
  if (n < 1) throw std::invalid_argument("lattice needs at least one point");
  std::vector<double> out;
  out.reserve(n);
  if (n == 1) {
    out.push_back(0.0);
    return out;
  }
  for (int i = 0; i < n; ++i)
    out.push_back(-half + 2.0 * half * i / (n - 1));
  return out;
}

// Hermitian parameter metadata in hermitian.hpp order.
struct HermParam {
  int kind;  // 0 diag, 1 re, 2 im
  int a, b;
};

std::vector<HermParam> herm_params(int n) {
  std::vector<HermParam> out;
  out.reserve(n * n);
  for (int a = 0; a < n; ++a) out.push_back({0, a, a});
  for (int b = 1; b < n; ++b)
    for (int a = 0; a < b; ++a) {
      out.push_back({1, a, b});
      out.push_back({2, a, b});
    }
  return out;
}

// Columns of the map from the parameters of Hermitian G to the parameters
// of W G W^H, used to express subspace-compressed coefficients.
Eigen::MatrixXd congruence_param_map(const Eigen::MatrixXcd& w) {
  const int rows = static_cast<int>(w.rows());
  const int cols = static_cast<int>(w.cols());
  Eigen::MatrixXd map(herm_param_count(rows), herm_param_count(cols));
  const auto params = herm_params(cols);
  for (int i = 0; i < static_cast<int>(params.size()); ++i) {
    const auto& pp = params[i];
    Eigen::MatrixXcd q;
    if (pp.kind == 0) {
      q = w.col(pp.a) * w.col(pp.a).adjoint();
    } else if (pp.kind == 1) {
      q = w.col(pp.a) * w.col(pp.b).adjoint() +
          w.col(pp.b) * w.col(pp.a).adjoint();
    } else {
      q = cxd(0.0, 1.0) * (w.col(pp.a) * w.col(pp.b).adjoint() -
                           w.col(pp.b) * w.col(pp.a).adjoint());
    }
    map.col(i) = herm_to_params(0.5 * (q + q.adjoint()));
  }
  return map;
}

// Per-point epigraph assembly shared by the covariance and power designs.
// The design variables occupy problem columns [first_col, first_col+ncols);
// cmaps[n] maps them to point n's subspace coefficients. Adds two epigraph
// variables per point, the worst-case variable t, the LMIs, and the
// objective. The solver sees epigraph variables normalized by their value at
// the initial design (uscale, tscale) so they stay near unit size even when
// the squared error bound spans many decades; raw values are
// uscale * u and tscale * t.
struct EpigraphLayout {
  int us = 0;
  int ts = 0;
  Eigen::VectorXd u0;
  double t0 = 0.0;
  Eigen::VectorXd uscale;
  double tscale = 1.0;
};

EpigraphLayout add_epigraphs(ConicProblem& prob, int first_col, int ncols,
                             const std::vector<const FimLinearMap*>& maps,
                             const std::vector<Eigen::MatrixXd>& cmaps,
                             const Eigen::VectorXd& design0) {
  const int npts = static_cast<int>(maps.size());
  EpigraphLayout out;
  out.us = prob.add_scalars(2 * npts);
  out.ts = prob.add_scalars(1);
  out.u0.resize(2 * npts);
  out.uscale.resize(2 * npts);

  std::vector<int> vars(ncols + 1);
  for (int i = 0; i < ncols; ++i) vars[i] = first_col + i;

  // First pass: error-bound values at the initial design set the scales.
  Eigen::VectorXd direct(2 * npts);
  double tref = 0.0;
  for (int n = 0; n < npts; ++n) {
    const FimLinearMap& map = *maps[n];
    const Eigen::MatrixXd j0 = map.fim_of_coeffs(cmaps[n] * design0);
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(j0);
    double sum = 0.0;
    for (int b = 0; b < 2; ++b) {
      const Eigen::VectorXd r = map.peb_rows().row(b).transpose();
      const double v = r.dot(ldlt.solve(r));
      direct(2 * n + b) = v;
      out.uscale(2 * n + b) = (std::isfinite(v) && v > 0.0) ? v : 1.0;
      sum += v;
    }
    if (std::isfinite(sum) && sum > 0.0) tref = std::max(tref, sum);
  }
  out.tscale = tref > 0.0 ? tref : 1.0;

  for (int n = 0; n < npts; ++n) {
    const FimLinearMap& map = *maps[n];
    const int d = map.fim_dim();
    const int nc = map.num_coeffs();

    // Jacobi equilibration at the initial design keeps the LMI blocks
    // near unit scale; the epigraph row and column shrink by the square
    // root of that variable's scale so its unit coefficient survives.
    const Eigen::VectorXd q0 = cmaps[n] * design0;
    const Eigen::MatrixXd j0 = map.fim_of_coeffs(q0);
    Eigen::VectorXd dscale(d);
    for (int i = 0; i < d; ++i) {
      const double v = j0(i, i);
      dscale(i) = (std::isfinite(v) && v > 0.0) ? 1.0 / std::sqrt(v) : 1.0;
    }

    std::vector<Eigen::MatrixXd> padded;
    padded.reserve(nc + 1);
    for (int e = 0; e < nc; ++e) {
      Eigen::MatrixXd pm = Eigen::MatrixXd::Zero(d + 1, d + 1);
      pm.topLeftCorner(d, d) =
          dscale.asDiagonal() * map.basis(e) * dscale.asDiagonal();
      padded.push_back(std::move(pm));
    }
    Eigen::MatrixXd eu = Eigen::MatrixXd::Zero(d + 1, d + 1);
    eu(d, d) = 1.0;
    padded.push_back(std::move(eu));

    Eigen::MatrixXd pmap = Eigen::MatrixXd::Zero(nc + 1, ncols + 1);
    pmap.topLeftCorner(nc, ncols) = cmaps[n];
    pmap(nc, ncols) = 1.0;

    const Eigen::MatrixXd prior_sc =
        dscale.asDiagonal() * map.prior() * dscale.asDiagonal();

    double usum = 0.0;
    for (int b = 0; b < 2; ++b) {
      const int i = 2 * n + b;
      const Eigen::VectorXd r = map.peb_rows().row(b).transpose();
      Eigen::MatrixXd c0 = Eigen::MatrixXd::Zero(d + 1, d + 1);
      c0.topLeftCorner(d, d) = prior_sc;
      const Eigen::VectorXd rsc =
          dscale.cwiseProduct(r) / std::sqrt(out.uscale(i));
      c0.col(d).head(d) = rsc;
      c0.row(d).head(d) = rsc.transpose();
      vars[ncols] = out.us + i;
      prob.add_lmi(padded, pmap, vars, c0);
      out.u0(i) = 2.0 * direct(i) / out.uscale(i);
      usum += 2.0 * direct(i);
    }
    prob.add_linear_inequality(
        {{out.ts, 1.0},
         {out.us + 2 * n, -out.uscale(2 * n) / out.tscale},
         {out.us + 2 * n + 1, -out.uscale(2 * n + 1) / out.tscale}},
        0.0);
    out.t0 = std::max(out.t0, 2.0 * usum / out.tscale);
  }
  prob.set_objective({{out.ts, 1.0}});
  return out;
}

std::vector<FimLinearMap> build_maps(const UncertaintyGrid& grid,
                                     const OfdmConfig& cfg,
                                     const ClockPrior& prior, bool known_los) {
  std::vector<FimLinearMap> maps;
  maps.reserve(grid.size());
  for (int n = 0; n < grid.size(); ++n) {
    FimLinearMap m(grid.channels[n], grid.points[n], grid.base, cfg, prior);
    maps.push_back(known_los ? m.known_los_variant() : std::move(m));
  }
  return maps;
}

std::vector<const FimLinearMap*> map_pointers(
    const std::vector<FimLinearMap>& maps) {
  std::vector<const FimLinearMap*> out;
  out.reserve(maps.size());
  for (const auto& m : maps) out.push_back(&m);
  return out;
}

// Direct worst-case re-evaluation of a covariance. The standard variant
// recomputes the whole information chain from the channel; the known-LOS
// variant has no independent path, so it reuses the linear maps.
double worst_peb_direct(const Eigen::MatrixXcd& x, const UncertaintyGrid& grid,
                        const OfdmConfig& cfg, const ClockPrior& prior,
                        const std::vector<FimLinearMap>& maps,
                        bool known_los) {
  double worst = 0.0;
  for (int n = 0; n < grid.size(); ++n) {
    const double p =
        known_los ? maps[n].peb_of(x)
                  : peb_of_covariance(x, grid.channels[n], grid.points[n],
                                      grid.base, cfg, prior);
    worst = std::max(worst, p);
  }
  return worst;
}

// Covariance design over a Hermitian variable with a linear trace row.
struct CovarianceSpec {
  int vdim = 0;
  Eigen::VectorXd trace_coeffs;  // over the variable's parameters
  double trace_rhs = 0.0;
  Eigen::VectorXd var0;
};

struct CovarianceOut {
  SolveStatus status = SolveStatus::NumericalFailure;
  Eigen::MatrixXcd var;
  Eigen::VectorXd u;
  double bound_peb = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

CovarianceOut solve_covariance(const CovarianceSpec& cs,
                               const std::vector<const FimLinearMap*>& maps,
                               const std::vector<Eigen::MatrixXd>& cmaps,
                               const SolverOptions& sopts) {
  const int nparams = herm_param_count(cs.vdim);
  ConicProblem prob;
  const int vs = prob.add_hermitian_psd(cs.vdim);
  std::vector<std::pair<int, double>> tr_terms;
  for (int i = 0; i < nparams; ++i)
    if (cs.trace_coeffs(i) != 0.0)
      tr_terms.push_back({vs + i, cs.trace_coeffs(i)});
  prob.add_equality(tr_terms, cs.trace_rhs);

  EpigraphLayout lay = add_epigraphs(prob, vs, nparams, maps, cmaps, cs.var0);

  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(prob.num_vars());
  x0.segment(vs, nparams) = cs.var0;
  x0.segment(lay.us, lay.u0.size()) = lay.u0;
  x0(lay.ts) = lay.t0;

  const ConicSolution sol = prob.solve(x0, sopts);
  const Eigen::VectorXd& xr = sol.x.size() ? sol.x : x0;
  CovarianceOut out;
  out.status = sol.status;
  out.iterations = sol.iterations;
  out.var = ConicProblem::hermitian_value(xr, vs, cs.vdim);
  out.u = lay.uscale.cwiseProduct(xr.segment(lay.us, lay.u0.size()));
  out.bound_peb = std::sqrt(std::max(0.0, lay.tscale * xr(lay.ts)));
  return out;
}

Eigen::VectorXd diag_trace_coeffs(int vdim) {
  Eigen::VectorXd t = Eigen::VectorXd::Zero(herm_param_count(vdim));
  t.head(vdim).setOnes();
  return t;
}

}  // namespace

SubspaceBasis SubspaceBasis::from_angles(const Eigen::VectorXd& theta_rad,
                                         const UlaConfig& tx) {
  SubspaceBasis out;
  std::vector<double> kept;
  for (int g = 0; g < theta_rad.size(); ++g) {
    bool dup = false;
    for (double t : kept) dup = dup || std::abs(theta_rad(g) - t) < 1e-6;
    if (dup) {
      out.collapsed = true;
      continue;
    }
    kept.push_back(theta_rad(g));
  }
  if (out.collapsed)
    std::fprintf(stderr,
                 "warning: coincident departure angles collapsed (%zu of %d "
                 "steering pairs kept)\n",
                 kept.size(), static_cast<int>(theta_rad.size()));
  const int p = static_cast<int>(kept.size());
  out.pointing_rad.resize(p);
  out.u.resize(tx.num_elements, 2 * p);
  for (int g = 0; g < p; ++g) {
    out.pointing_rad(g) = kept[g];
    out.u.col(g) = ula_steering(kept[g], tx).conjugate();
    out.u.col(p + g) = ula_derivative(kept[g], tx).conjugate();
  }
  return out;
}

UncertaintyGrid UncertaintyGrid::from_scenario(const Scenario& scn,
                                               const OfdmConfig& cfg) {
  UncertaintyGrid grid;
  grid.base = scn;
  const int nlos = static_cast<int>(scn.incidence_pos_m.size());

  // Axes: UE x, UE y, then x and y per incidence point. The lattice always
  // contains the box corners.
  std::vector<std::vector<double>> axes;
  axes.push_back(lattice(scn.ue_box_halfwidth_m, scn.ue_grid_per_axis));
  axes.push_back(lattice(scn.ue_box_halfwidth_m, scn.ue_grid_per_axis));
  for (int g = 0; g < nlos; ++g) {
    axes.push_back(
        lattice(scn.incidence_box_halfwidth_m, scn.incidence_grid_per_axis));
    axes.push_back(
        lattice(scn.incidence_box_halfwidth_m, scn.incidence_grid_per_axis));
  }

  std::vector<size_t> idx(axes.size(), 0);
  while (true) {
    Scenario moved = scn;
    moved.ue_pos_m.x() += axes[0][idx[0]];
    moved.ue_pos_m.y() += axes[1][idx[1]];
    for (int g = 0; g < nlos; ++g) {
      moved.incidence_pos_m[g].x() += axes[2 + 2 * g][idx[2 + 2 * g]];
      moved.incidence_pos_m[g].y() += axes[3 + 2 * g][idx[3 + 2 * g]];
    }
    auto [ch, pos] = params_from_scenario(moved, cfg);
    grid.channels.push_back(std::move(ch));
    grid.points.push_back(std::move(pos));

    int k = static_cast<int>(axes.size()) - 1;
    while (k >= 0 && ++idx[k] == axes[k].size()) idx[k--] = 0;
    if (k < 0) break;
  }
  return grid;
}

UncertaintyGrid UncertaintyGrid::single_point(const Scenario& scn,
                                              const OfdmConfig& cfg) {
  UncertaintyGrid grid;
  grid.base = scn;
  auto [ch, pos] = params_from_scenario(scn, cfg);
  grid.channels.push_back(std::move(ch));
  grid.points.push_back(std::move(pos));
  return grid;
}

DesignResult solve_perfect(const Scenario& scn, const OfdmConfig& cfg,
                           const ClockPrior& prior,
                           const DesignOptions& opts) {
  const UncertaintyGrid grid = UncertaintyGrid::single_point(scn, cfg);
  const auto maps = build_maps(grid, cfg, prior, opts.known_los);
  const int n = scn.tx_array.num_elements;
  const double budget = cfg.total_power_mw / cfg.num_subcarriers;

  CovarianceSpec cs;
  cs.vdim = n;
  cs.trace_coeffs = diag_trace_coeffs(n);
  cs.trace_rhs = budget;
  cs.var0 = herm_to_params((budget / n) *
                           Eigen::MatrixXcd::Identity(n, n));
  std::vector<Eigen::MatrixXd> cmaps{maps[0].coeff_map_dense()};
  CovarianceOut co =
      solve_covariance(cs, map_pointers(maps), cmaps, opts.solver);

  DesignResult res;
  res.status = co.status;
  res.iterations = co.iterations;
  res.X = co.var;
  res.epigraph = co.u;
  res.bound_peb_m = co.bound_peb;
  res.worst_peb_m =
      worst_peb_direct(res.X, grid, cfg, prior, maps, opts.known_los);
  return res;
}

DesignResult solve_reduced(const Scenario& scn, const OfdmConfig& cfg,
                           const ClockPrior& prior,
                           const DesignOptions& opts) {
  const UncertaintyGrid grid = UncertaintyGrid::single_point(scn, cfg);
  const auto maps = build_maps(grid, cfg, prior, opts.known_los);
  const Eigen::MatrixXcd& u = maps[0].subspace();

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(u);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(sv.size() - 1) <= 1e-8 * sv(0))
    throw std::invalid_argument(
        "steering subspace is rank deficient (coincident departure angles)");

  // Orthonormalize the steering columns: same span, but the trace row and
  // the coefficient maps stay well scaled despite the large norm spread
  // between steering vectors and their angle derivatives.
  const int s = maps[0].subspace_dim();
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(u);
  const Eigen::MatrixXcd qu =
      qr.householderQ() * Eigen::MatrixXcd::Identity(u.rows(), s);
  const double budget = cfg.total_power_mw / cfg.num_subcarriers;

  CovarianceSpec cs;
  cs.vdim = s;
  cs.trace_coeffs = diag_trace_coeffs(s);
  cs.trace_rhs = budget;
  cs.var0 =
      herm_to_params((budget / s) * Eigen::MatrixXcd::Identity(s, s));
  // Q = U^H X U = (U^H Q_u) Lambda (U^H Q_u)^H.
  std::vector<Eigen::MatrixXd> cmaps{congruence_param_map(u.adjoint() * qu)};
  CovarianceOut co =
      solve_covariance(cs, map_pointers(maps), cmaps, opts.solver);

  DesignResult res;
  res.status = co.status;
  res.iterations = co.iterations;
  res.reduced = co.var;
  Eigen::MatrixXcd x = qu * co.var * qu.adjoint();
  res.X = 0.5 * (x + x.adjoint());
  res.epigraph = co.u;
  res.bound_peb_m = co.bound_peb;
  res.worst_peb_m =
      worst_peb_direct(res.X, grid, cfg, prior, maps, opts.known_los);
  return res;
}

DesignResult solve_robust(const UncertaintyGrid& grid, const OfdmConfig& cfg,
                          const ClockPrior& prior,
                          const DesignOptions& opts) {
  if (grid.size() < 1)
    throw std::invalid_argument("uncertainty grid is empty");
  const auto maps = build_maps(grid, cfg, prior, opts.known_los);
  const int ntx = grid.base.tx_array.num_elements;
  const double budget = cfg.total_power_mw / cfg.num_subcarriers;

  // The information at every grid point depends on X only through its own
  // steering subspace, so the union of those subspaces carries an optimal
  // solution; projecting onto it only shrinks the trace.
  int scols = 0;
  for (const auto& m : maps) scols += m.subspace_dim();
  Eigen::MatrixXcd stacked(ntx, scols);
  int at = 0;
  for (const auto& m : maps) {
    stacked.middleCols(at, m.subspace_dim()) = m.subspace();
    at += m.subspace_dim();
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(stacked);
  qr.setThreshold(1e-10);
  const int rank = std::min<int>(static_cast<int>(qr.rank()), ntx);

  Eigen::MatrixXcd ubar;
  if (rank >= ntx)
    ubar = Eigen::MatrixXcd::Identity(ntx, ntx);
  else
    ubar = qr.householderQ() * Eigen::MatrixXcd::Identity(ntx, rank);

  std::vector<Eigen::MatrixXd> cmaps;
  cmaps.reserve(maps.size());
  for (const auto& m : maps)
    cmaps.push_back(congruence_param_map(m.subspace().adjoint() * ubar));

  CovarianceSpec cs;
  cs.vdim = static_cast<int>(ubar.cols());
  cs.trace_coeffs = diag_trace_coeffs(cs.vdim);
  cs.trace_rhs = budget;
  cs.var0 = herm_to_params((budget / cs.vdim) *
                           Eigen::MatrixXcd::Identity(cs.vdim, cs.vdim));
  CovarianceOut co =
      solve_covariance(cs, map_pointers(maps), cmaps, opts.solver);

  DesignResult res;
  res.status = co.status;
  res.iterations = co.iterations;
  res.reduced = co.var;
  Eigen::MatrixXcd x = ubar * co.var * ubar.adjoint();
  res.X = 0.5 * (x + x.adjoint());
  res.epigraph = co.u;
  res.bound_peb_m = co.bound_peb;
  res.worst_peb_m =
      worst_peb_direct(res.X, grid, cfg, prior, maps, opts.known_los);
  return res;
}

PowerResult solve_power_allocation(const UncertaintyGrid& grid,
                                   const OfdmConfig& cfg,
                                   const ClockPrior& prior,
                                   const Eigen::MatrixXcd& beams,
                                   int num_repeats,
                                   const DesignOptions& opts) {
  const int mbeams = static_cast<int>(beams.cols());
  if (mbeams < 1) throw std::invalid_argument("power allocation needs beams");
  if (num_repeats < 1)
    throw std::invalid_argument("repeat count must be positive");
  if (grid.size() < 1)
    throw std::invalid_argument("uncertainty grid is empty");

  const auto maps = build_maps(grid, cfg, prior, opts.known_los);

  // Coefficients of L f_m f_m^H per point, compressed through the subspace.
  std::vector<Eigen::MatrixXd> cmaps;
  cmaps.reserve(maps.size());
  for (const auto& m : maps) {
    const Eigen::MatrixXcd v = m.subspace().adjoint() * beams;  // 2P x M
    Eigen::MatrixXd cm(m.num_coeffs(), mbeams);
    for (int j = 0; j < mbeams; ++j) {
      Eigen::MatrixXcd q =
          static_cast<double>(num_repeats) * v.col(j) * v.col(j).adjoint();
      cm.col(j) = herm_to_params(0.5 * (q + q.adjoint()));
    }
    cmaps.push_back(std::move(cm));
  }

  ConicProblem prob;
  const int rs = prob.add_scalars(mbeams);
  for (int m = 0; m < mbeams; ++m)
    prob.add_linear_inequality({{rs + m, 1.0}}, 0.0);
  std::vector<std::pair<int, double>> sum_terms;
  for (int m = 0; m < mbeams; ++m) sum_terms.push_back({rs + m, 1.0});
  prob.add_equality(sum_terms, static_cast<double>(mbeams));

  const Eigen::VectorXd rho0 = Eigen::VectorXd::Ones(mbeams);
  EpigraphLayout lay =
      add_epigraphs(prob, rs, mbeams, map_pointers(maps), cmaps, rho0);

  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(prob.num_vars());
  x0.segment(rs, mbeams) = rho0;
  x0.segment(lay.us, lay.u0.size()) = lay.u0;
  x0(lay.ts) = lay.t0;

  const ConicSolution sol = prob.solve(x0, opts.solver);
  const Eigen::VectorXd& xr = sol.x.size() ? sol.x : x0;

  PowerResult res;
  res.status = sol.status;
  res.iterations = sol.iterations;
  res.rho = xr.segment(rs, mbeams).cwiseMax(0.0);
  res.bound_peb_m = std::sqrt(std::max(0.0, lay.tscale * xr(lay.ts)));
  const Eigen::MatrixXcd x = static_cast<double>(num_repeats) * beams *
                             res.rho.asDiagonal() * beams.adjoint();
  res.worst_peb_m =
      worst_peb_direct(0.5 * (x + x.adjoint()), grid, cfg, prior, maps,
                       opts.known_los);
  return res;
}

RecoveryResult recover_precoder(
    const Eigen::MatrixXcd& x_cov, int num_beams, int num_repeats,
    const std::function<double(const Eigen::MatrixXcd&)>& peb_oracle,
    const RecoveryOptions& opts) {
  if (num_beams < 1) throw std::invalid_argument("need at least one beam");
  if (num_repeats < 1)
    throw std::invalid_argument("repeat count must be positive");
  const int n = static_cast<int>(x_cov.rows());
  const double lrep = static_cast<double>(num_repeats);
  const Eigen::MatrixXcd xh = 0.5 * (x_cov + x_cov.adjoint());
  const double target = xh.trace().real();
  if (!(target > 0.0))
    throw std::invalid_argument("covariance must have positive trace");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(xh);
  const Eigen::VectorXd evals = es.eigenvalues().cwiseMax(0.0);

  RecoveryResult best;
  auto consider = [&](Eigen::MatrixXcd f, bool randomized) {
    const double tr = lrep * f.squaredNorm();
    if (!(tr > 0.0)) return;
    f *= std::sqrt(target / tr);
    const Eigen::MatrixXcd cand = lrep * f * f.adjoint();
    const double p = peb_oracle(0.5 * (cand + cand.adjoint()));
    if (p < best.peb_m) {
      best.F = std::move(f);
      best.peb_m = p;
      best.randomized = randomized;
    }
  };

  // Top-eigenpair factorization; exact whenever rank(X) <= num_beams.
  Eigen::MatrixXcd f_eig = Eigen::MatrixXcd::Zero(n, num_beams);
  for (int m = 0; m < std::min(num_beams, n); ++m) {
    const int idx = n - 1 - m;
    f_eig.col(m) = es.eigenvectors().col(idx) * std::sqrt(evals(idx) / lrep);
  }
  consider(f_eig, false);

  // Gaussian randomization: X^(1/2) times random orthonormal columns.
  const Eigen::MatrixXcd xhalf =
      es.eigenvectors() * evals.cwiseSqrt().asDiagonal();
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < opts.trials; ++trial) {
    Eigen::MatrixXcd g(n, std::min(num_beams, n));
    for (int i = 0; i < g.rows(); ++i)
      for (int j = 0; j < g.cols(); ++j) g(i, j) = cxd(gauss(rng), gauss(rng));
    const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    Eigen::MatrixXcd q = qr.householderQ() *
                         Eigen::MatrixXcd::Identity(n, g.cols());
    Eigen::MatrixXcd f = Eigen::MatrixXcd::Zero(n, num_beams);
    f.leftCols(g.cols()) = xhalf * q / std::sqrt(lrep);
    consider(std::move(f), true);
  }
  return best;
}

}  // namespace pebopt
