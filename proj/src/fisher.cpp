// SPDX-License-Identifier: Apache-2.0

#include "pebopt/fisher.hpp"

#include <stdexcept>

namespace pebopt {

namespace {

// Parameter blocks in eta ordering.
enum Kind { kTheta = 0, kPhi = 1, kAlphaRe = 2, kAlphaIm = 3, kTau = 4 };

// Everything in J_ij(X) = Re(w_ij Q(ucol_j, ucol_i)) except Q itself:
// scalar weights collapsing the subcarrier sum, the gain factors, and the
// receive-side Gram products.
struct WTable {
  Eigen::MatrixXcd w;       // 5P x 5P
  std::vector<int> ucol;    // departure-side column of U per parameter
};

Eigen::MatrixXcd receive_gram(const ChannelParams& ch, const Scenario& scn,
                              const OfdmConfig& cfg,
                              const Eigen::MatrixXcd& combiner) {
  const int paths = ch.num_paths();
  const double lam = cfg.wavelength_m();
  Eigen::MatrixXcd v(scn.rx_array.num_elements, 2 * paths);
  for (int g = 0; g < paths; ++g) {
    v.col(g) = uca_steering(ch.phi_rad(g), scn.rx_array, lam);
    v.col(paths + g) = uca_derivative(ch.phi_rad(g), scn.rx_array, lam);
  }
  if (combiner.size() == 0) return v.adjoint() * v;
  if (combiner.rows() != scn.rx_array.num_elements)
    throw std::invalid_argument("combiner rows must match receive elements");
  Eigen::MatrixXcd wv = combiner.adjoint() * v;
  return wv.adjoint() * wv;
}

WTable build_wtable(const ChannelParams& ch, const Scenario& scn,
                    const OfdmConfig& cfg, const Eigen::MatrixXcd& combiner) {
  const int paths = ch.num_paths();
  const int dim = 5 * paths;
  const double sigma2 = cfg.noise_variance_mw();
  const Eigen::MatrixXcd gram = receive_gram(ch, scn, cfg, combiner);

  // Subcarrier sums sum_k omega_k^m exp(j omega_k (tau_g - tau_h)) for
  // m = 0, 1, 2; the delay-derivative rows pull in the omega factors.
  Eigen::MatrixXcd k0(paths, paths), k1(paths, paths), k2(paths, paths);
  for (int g = 0; g < paths; ++g)
    for (int h = 0; h < paths; ++h) {
      cxd s0 = 0.0, s1 = 0.0, s2 = 0.0;
      for (int k = 0; k < cfg.num_subcarriers; ++k) {
        const double wk = cfg.omega(k);
        const cxd e = std::polar(1.0, wk * (ch.tau_s(g) - ch.tau_s(h)));
        s0 += e;
        s1 += wk * e;
        s2 += wk * wk * e;
      }
      k0(g, h) = s0;
      k1(g, h) = s1;
      k2(g, h) = s2;
    }

  WTable t;
  t.w.resize(dim, dim);
  t.ucol.resize(dim);
  auto kind = [paths](int i) { return static_cast<Kind>(i / paths); };
  auto path = [paths](int i) { return i % paths; };
  auto bfac = [&](int i) -> cxd {
    switch (kind(i)) {
      case kTheta:
      case kPhi: return ch.alpha(path(i));
      case kAlphaRe: return 1.0;
      case kAlphaIm: return cxd(0.0, 1.0);
      case kTau: return cxd(0.0, -1.0) * ch.alpha(path(i));
    }
    return 0.0;
  };
  auto rxcol = [&](int i) {
    return kind(i) == kPhi ? paths + path(i) : path(i);
  };
  for (int i = 0; i < dim; ++i)
    t.ucol[i] = kind(i) == kTheta ? paths + path(i) : path(i);

  const double scale = 2.0 / sigma2;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      const int g = path(i), h = path(j);
      const bool ti = kind(i) == kTau, tj = kind(j) == kTau;
      const cxd ks = (ti && tj) ? k2(g, h) : (ti || tj) ? k1(g, h) : k0(g, h);
      t.w(i, j) = scale * std::conj(bfac(i)) * bfac(j) * ks *
                  gram(rxcol(i), rxcol(j));
    }
  return t;
}

Eigen::MatrixXcd departure_subspace(const ChannelParams& ch,
                                    const Scenario& scn) {
  const int paths = ch.num_paths();
  Eigen::MatrixXcd u(scn.tx_array.num_elements, 2 * paths);
  for (int g = 0; g < paths; ++g) {
    u.col(g) = ula_steering(ch.theta_rad(g), scn.tx_array).conjugate();
    u.col(paths + g) = ula_derivative(ch.theta_rad(g), scn.tx_array).conjugate();
  }
  return u;
}

}  // namespace

bool PrecoderCovariance::consistent(int num_subcarriers, double rel_tol) const {
  if (X.rows() != X.cols() || X.size() == 0) return false;
  const double scale = std::max(1.0, X.norm());
  if ((X - X.adjoint()).norm() > rel_tol * scale) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(X,
                                                     Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -rel_tol * scale) return false;
  const double tr = X.trace().real() * num_subcarriers;
  return std::abs(tr - power_budget_mw) <= rel_tol * power_budget_mw;
}

Eigen::MatrixXd fim_channel(const Eigen::MatrixXcd& X,
                            const ChannelParams& params, const Scenario& scn,
                            const OfdmConfig& cfg,
                            const Eigen::MatrixXcd& combiner) {
  if (X.rows() != scn.tx_array.num_elements || X.cols() != X.rows())
    throw std::invalid_argument("fim_channel: covariance size mismatch");
  const WTable t = build_wtable(params, scn, cfg, combiner);
  const Eigen::MatrixXcd u = departure_subspace(params, scn);
  const Eigen::MatrixXcd q = u.adjoint() * X * u;
  const int dim = params.dim();
  Eigen::MatrixXd j(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int k = 0; k < dim; ++k)
      j(i, k) = (t.w(i, k) * q(t.ucol[k], t.ucol[i])).real();
  return 0.5 * (j + j.transpose());
}

Eigen::MatrixXd jacobian_T(const PositionParams& pos, const Scenario& scn) {
  const int paths = pos.num_paths();
  if (static_cast<int>(pos.incidence_pos_m.size()) != paths - 1)
    throw std::invalid_argument("jacobian_T: path count mismatch");
  const int rows = 5 * paths, cols = pos.dim();
  const Eigen::Vector2d q = scn.bs_pos_m, p = pos.ue_pos_m;
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(rows, cols);

  auto angle_grad = [](const Eigen::Vector2d& d) -> Eigen::Vector2d {
    // gradient of atan2(d_y, d_x) with respect to the head point
    return Eigen::Vector2d(-d.y(), d.x()) / d.squaredNorm();
  };

  const Eigen::Vector2d u = p - q;
  const double d0 = u.norm();

  // LOS rows: theta_0, phi_0, tau_0.
  t.block<1, 2>(0, pos.idx_pos()) = angle_grad(u).transpose();
  t.block<1, 2>(paths, pos.idx_pos()) = angle_grad(u).transpose();
  t(paths, pos.idx_orientation()) = -1.0;
  t.block<1, 2>(4 * paths, pos.idx_pos()) =
      u.transpose() / (kSpeedOfLight * d0);
  t(4 * paths, pos.idx_clock()) = 1.0;

  for (int g = 1; g < paths; ++g) {
    const Eigen::Vector2d r = pos.incidence_pos_m[g - 1];
    const Eigen::Vector2d rq = r - q, w = p - r;
    // theta_g depends only on the incidence point.
    t.block<1, 2>(g, pos.idx_incidence(g)) = angle_grad(rq).transpose();
    // phi_g = atan2(p - r) - psi.
    t.block<1, 2>(paths + g, pos.idx_pos()) = angle_grad(w).transpose();
    t.block<1, 2>(paths + g, pos.idx_incidence(g)) = -angle_grad(w).transpose();
    t(paths + g, pos.idx_orientation()) = -1.0;
    // tau_g = (|r - q| + |p - r|) / c + clock bias.
    t.block<1, 2>(4 * paths + g, pos.idx_pos()) =
        w.transpose() / (kSpeedOfLight * w.norm());
    t.block<1, 2>(4 * paths + g, pos.idx_incidence(g)) =
        (rq.transpose() / rq.norm() - w.transpose() / w.norm()) / kSpeedOfLight;
    t(4 * paths + g, pos.idx_clock()) = 1.0;
  }

  // Gains are shared coordinates of both parameterizations.
  for (int g = 0; g < paths; ++g) {
    t(2 * paths + g, pos.idx_alpha_re(g)) = 1.0;
    t(3 * paths + g, pos.idx_alpha_im(g)) = 1.0;
  }
  return t;
}

Eigen::MatrixXd fim_position(const Eigen::MatrixXd& fim_chan,
                             const Eigen::MatrixXd& T,
                             const ClockPrior& prior) {
  if (fim_chan.rows() != T.rows())
    throw std::invalid_argument("fim_position: dimension mismatch");
  Eigen::MatrixXd j = T.transpose() * fim_chan * T;
  j = 0.5 * (j + j.transpose()).eval();
  j(j.rows() - 1, j.cols() - 1) += prior.info_s();
  return j;
}

double peb_linear(const Eigen::MatrixXd& fim, const Eigen::MatrixXd& rows) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(fim.rows());
  if (fim.cols() != n || rows.cols() != n)
    throw std::invalid_argument("peb: dimension mismatch");
  if (!fim.allFinite()) return kInf;

  // Jacobi equilibration keeps mixed units (seconds vs meters vs radians)
  // from masquerading as rank deficiency.
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) {
    if (!(fim(i, i) > 0.0)) return kInf;  // no information on coordinate i
    d(i) = 1.0 / std::sqrt(fim(i, i));
  }
  Eigen::MatrixXd a = d.asDiagonal() * fim * d.asDiagonal();
  a = 0.5 * (a + a.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi > 1e12 * lo) return kInf;

  Eigen::MatrixXd scaled_rows = rows * d.asDiagonal();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success) return kInf;
  Eigen::MatrixXd sol = ldlt.solve(scaled_rows.transpose());
  const double v = (scaled_rows * sol).trace();
  return v >= 0.0 ? std::sqrt(v) : kInf;
}

double peb(const Eigen::MatrixXd& fim_pos) {
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(2, fim_pos.rows());
  rows(0, 0) = rows(1, 1) = 1.0;
  return peb_linear(fim_pos, rows);
}

double peb_of_covariance(const Eigen::MatrixXcd& X, const ChannelParams& ch,
                         const PositionParams& pos, const Scenario& scn,
                         const OfdmConfig& cfg, const ClockPrior& prior,
                         const Eigen::MatrixXcd& combiner) {
  Eigen::MatrixXd j = fim_channel(X, ch, scn, cfg, combiner);
  Eigen::MatrixXd t = jacobian_T(pos, scn);
  return peb(fim_position(j, t, prior));
}

double peb_of_precoder(const Eigen::MatrixXcd& F, const Eigen::VectorXd& rho,
                       const ChannelParams& ch, const PositionParams& pos,
                       const Scenario& scn, const OfdmConfig& cfg,
                       const ClockPrior& prior,
                       const Eigen::MatrixXcd& combiner) {
  if (F.cols() != rho.size())
    throw std::invalid_argument("peb_of_precoder: one weight per beam");
  Eigen::MatrixXcd x = static_cast<double>(cfg.symbols_per_beam) * F *
                       rho.asDiagonal() * F.adjoint();
  return peb_of_covariance(x, ch, pos, scn, cfg, prior, combiner);
}

FimLinearMap::FimLinearMap(const ChannelParams& ch, const PositionParams& pos,
                           const Scenario& scn, const OfdmConfig& cfg,
                           const ClockPrior& prior,
                           const Eigen::MatrixXcd& combiner) {
  const int paths = ch.num_paths();
  const int edim = 5 * paths;
  const int pdim = pos.dim();
  const int sdim = 2 * paths;

  subspace_ = departure_subspace(ch, scn);
  const WTable t = build_wtable(ch, scn, cfg, combiner);
  const Eigen::MatrixXd jac = jacobian_T(pos, scn);

  // d J / d q_e in the channel domain, then squeezed through the Jacobian.
  std::vector<Eigen::MatrixXd> dj(herm_param_count(sdim),
                                  Eigen::MatrixXd::Zero(edim, edim));
  for (int i = 0; i < edim; ++i)
    for (int j = 0; j < edim; ++j) {
      const int a = t.ucol[j], b = t.ucol[i];  // J_ij reads Q(a, b)
      const cxd w = t.w(i, j);
      if (a == b) {
        dj[a](i, j) += w.real();
      } else {
        const int lo = std::min(a, b), hi = std::max(a, b);
        const int e = herm_offdiag_index(lo, hi, sdim);
        dj[e](i, j) += w.real();
        // Q(a,b) = q_re + j q_im when a < b, conjugate otherwise.
        dj[e + 1](i, j) += (a < b ? -w.imag() : w.imag());
      }
    }

  basis_.resize(dj.size());
  for (size_t e = 0; e < dj.size(); ++e) {
    Eigen::MatrixXd b = jac.transpose() * dj[e] * jac;
    basis_[e] = 0.5 * (b + b.transpose());
  }

  prior_ = Eigen::MatrixXd::Zero(pdim, pdim);
  prior_(pdim - 1, pdim - 1) = prior.info_s();

  peb_rows_ = Eigen::MatrixXd::Zero(2, pdim);
  peb_rows_(0, 0) = peb_rows_(1, 1) = 1.0;

  theta0_ = ch.theta_rad(0);
  range0_m_ = (pos.ue_pos_m - scn.bs_pos_m).norm();
}

Eigen::VectorXd FimLinearMap::coeffs_of(const Eigen::MatrixXcd& X) const {
  Eigen::MatrixXcd q = subspace_.adjoint() * X * subspace_;
  q = 0.5 * (q + q.adjoint()).eval();
  return herm_to_params(q);
}

Eigen::MatrixXd FimLinearMap::fim_of_coeffs(const Eigen::VectorXd& q) const {
  if (q.size() != num_coeffs())
    throw std::invalid_argument("fim_of_coeffs: wrong coefficient count");
  Eigen::MatrixXd j = prior_;
  for (int e = 0; e < q.size(); ++e) j.noalias() += q(e) * basis_[e];
  return j;
}

Eigen::MatrixXd FimLinearMap::fim(const Eigen::MatrixXcd& X) const {
  return fim_of_coeffs(coeffs_of(X));
}

double FimLinearMap::peb_of(const Eigen::MatrixXcd& X) const {
  return peb_linear(fim(X), peb_rows_);
}

Eigen::MatrixXd FimLinearMap::coeff_map_dense() const {
  const int n = static_cast<int>(subspace_.rows());
  const int nc = num_coeffs();
  Eigen::MatrixXd map(nc, herm_param_count(n));
  const Eigen::MatrixXcd uh = subspace_.adjoint();  // 2P x N, columns u_a
  auto put = [&](int col, const Eigen::MatrixXcd& qe) {
    Eigen::MatrixXcd q = 0.5 * (qe + qe.adjoint());
    map.col(col) = herm_to_params(q);
  };
  for (int a = 0; a < n; ++a)
    put(a, uh.col(a) * uh.col(a).adjoint());
  for (int b = 1; b < n; ++b)
    for (int a = 0; a < b; ++a) {
      const int e = herm_offdiag_index(a, b, n);
      Eigen::MatrixXcd cross = uh.col(a) * uh.col(b).adjoint();
      put(e, cross + cross.adjoint());
      put(e + 1, cxd(0.0, 1.0) * (cross - cross.adjoint()));
    }
  return map;
}

FimLinearMap FimLinearMap::known_los_variant() const {
  const int pdim = fim_dim();
  // Coordinate change eta~ -> xi = [theta_0, tau_0, psi, r, alpha, dt]:
  // only the UE position rows differ from the identity, through
  // p = q + c (tau_0 - dt) [cos theta_0; sin theta_0].
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(pdim, pdim);
  const double ct = std::cos(theta0_), st = std::sin(theta0_);
  m(0, 0) = -range0_m_ * st;
  m(1, 0) = range0_m_ * ct;
  m(0, 1) = kSpeedOfLight * ct;
  m(1, 1) = kSpeedOfLight * st;
  m(0, pdim - 1) = -kSpeedOfLight * ct;
  m(1, pdim - 1) = -kSpeedOfLight * st;

  const auto keep = Eigen::seq(2, pdim - 1);
  FimLinearMap v;
  v.subspace_ = subspace_;
  v.basis_.resize(basis_.size());
  for (size_t e = 0; e < basis_.size(); ++e) {
    Eigen::MatrixXd b = m.transpose() * basis_[e] * m;
    v.basis_[e] = 0.5 * (b(keep, keep) + b(keep, keep).transpose());
  }
  Eigen::MatrixXd pr = m.transpose() * prior_ * m;
  v.prior_ = pr(keep, keep);

  // With theta_0 and tau_0 pinned, position error flows only through the
  // clock bias: dp/d(dt) = -c [cos; sin].
  v.peb_rows_ = Eigen::MatrixXd::Zero(2, pdim - 2);
  v.peb_rows_(0, pdim - 3) = -kSpeedOfLight * ct;
  v.peb_rows_(1, pdim - 3) = -kSpeedOfLight * st;
  v.theta0_ = theta0_;
  v.range0_m_ = range0_m_;
  return v;
}

}  // namespace pebopt
