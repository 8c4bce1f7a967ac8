// SPDX-License-Identifier: Apache-2.0
#include "pebopt/conic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

namespace pebopt {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Largest step a keeping diag(lam) + a*M PSD, for lam > 0 elementwise.
template <typename Matrix>
double max_step(const Eigen::VectorXd& lam, const Matrix& m) {
  Matrix scaled = m;
  for (int i = 0; i < scaled.rows(); ++i)
    for (int j = 0; j < scaled.cols(); ++j)
      scaled(i, j) /= std::sqrt(lam(i) * lam(j));
  Eigen::SelfAdjointEigenSolver<Matrix> es(scaled, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  return lo >= -1e-14 ? kInf : 1.0 / (-lo);
}

// One cone block of the interior-point iteration. The scaled-space state
// (Nesterov-Todd factors r, rti with rti^H * r = I and the common scaled
// point Lambda = rti^H S rti = r^H Z r) lives inside each block; the driver
// only sees variable-space vectors.
class Block {
 public:
  virtual ~Block() = default;
  virtual int barrier_dim() const = 0;
  // Recomputes S from x; false if S is not strictly positive definite.
  virtual bool set_point(const Eigen::VectorXd& x) = 0;
  virtual void init_dual() = 0;
  virtual bool update_scaling() = 0;
  // B_ij += <A_i, W^-1 A_j W^-1> over this block's variables.
  virtual void add_schur(Eigen::MatrixXd& b) const = 0;
  // out_i += <A_i, Z>.
  virtual void add_adjoint_z(Eigen::VectorXd& out) const = 0;
  virtual double dual_constant() const = 0;  // <C, Z>
  virtual double mu_pair() const = 0;        // <S, Z>
  // out_i += <A_i, rti (-Lambda) rti^H>: the affine-direction constant in
  // the dual equation, computed numerically rather than cancelled against
  // <A_i, Z> so the Newton step targets the measured dual residual.
  virtual void add_affine_adjoint(Eigen::VectorXd& out) const = 0;
  // Affine direction: ds = rti^H A(dx) rti, dz = -Lambda - ds.
  virtual void set_direction_affine(const Eigen::VectorXd& dx) = 0;
  virtual double max_step_primal() const = 0;
  virtual double max_step_dual() const = 0;
  virtual double mu_after(double ap, double ad) const = 0;
  // Mehrotra corrector: solves Lambda o k = sig_mu*I - sym(ds_a dz_a) in the
  // scaled space, stores dk = k - Lambda, and accumulates
  // out_i += <A_i, rti dk rti^H>.
  virtual void add_corrector_adjoint(double sig_mu, Eigen::VectorXd& out) = 0;
  // Final direction: ds = rti^H A(dx) rti, dz = dk - ds.
  virtual void set_direction_corrector(const Eigen::VectorXd& dx) = 0;
  // Z += ad * rti dz rti^H, keeping the dual iterate additive in the
  // original space so roundoff does not recycle through the scaling.
  virtual void step_dual(double ad) = 0;
};

// Complex Hermitian PSD matrix variable: S = mat(x[off .. off+n^2)).
class HermBlock final : public Block {
 public:
  HermBlock(int offset, int n) : off_(offset), n_(n) {
    // Parameter metadata in hermitian.hpp order: kind 0 = diagonal(a),
    // kind 1 = Re(a,b), kind 2 = Im(a,b) with a < b.
    params_.reserve(n * n);
    for (int a = 0; a < n; ++a) params_.push_back({0, a, a});
    for (int b = 1; b < n; ++b)
      for (int a = 0; a < b; ++a) {
        params_.push_back({1, a, b});
        params_.push_back({2, a, b});
      }
  }

  int barrier_dim() const override { return n_; }

  bool set_point(const Eigen::VectorXd& x) override {
    s_ = herm_from_params(x.segment(off_, n_ * n_), n_);
    llt_s_.compute(s_);
    return llt_s_.info() == Eigen::Success;
  }

  void init_dual() override { z_ = Eigen::MatrixXcd::Identity(n_, n_); }

  bool update_scaling() override {
    Eigen::LLT<Eigen::MatrixXcd> llt_z(z_);
    if (llt_z.info() != Eigen::Success) return false;
    Eigen::MatrixXcd ls = llt_s_.matrixL();
    Eigen::MatrixXcd lz = llt_z.matrixL();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(
        lz.adjoint() * ls, Eigen::ComputeThinU | Eigen::ComputeThinV);
    lam_ = svd.singularValues();
    if (lam_.minCoeff() <= 0.0) return false;
    Eigen::VectorXd isq = lam_.cwiseSqrt().cwiseInverse();
    r_ = ls * svd.matrixV() * isq.asDiagonal();
    rti_ = lz * svd.matrixU() * isq.asDiagonal();
    winv_ = rti_ * rti_.adjoint();
    return true;
  }

  void add_schur(Eigen::MatrixXd& b) const override {
    // <H_i, W^-1 H_j W^-1> in O(1) per pair from V = W^-1. With
    // E_ab = e_a e_b^H: tr(E_ab V E_cd V) = V_bc V_da; the elementary
    // Hermitian directions are E_aa, E_ab + E_ba, i(E_ab - E_ba).
    const Eigen::MatrixXcd& v = winv_;
    const int m = n_ * n_;
    for (int i = 0; i < m; ++i) {
      const auto [ki, a, bb] = params_[i];
      for (int j = i; j < m; ++j) {
        const auto [kj, c, d] = params_[j];
        double val = 0.0;
        if (ki == 0 && kj == 0) {
          val = std::norm(v(a, c));
        } else if (ki == 0) {
          const cxd t = v(a, c) * std::conj(v(a, d));
          val = (kj == 1) ? 2.0 * t.real() : -2.0 * t.imag();
        } else if (kj == 0) {
          // <H_i, V E_cc V> with H_i off-diagonal at (a,bb).
          const cxd t = v(bb, c) * std::conj(v(a, c));
          val = (ki == 1) ? 2.0 * t.real() : -2.0 * t.imag();
        } else {
          const cxd z1 = v(bb, c) * std::conj(v(a, d));
          const cxd z2 = v(bb, d) * std::conj(v(a, c));
          if (ki == 1 && kj == 1)
            val = 2.0 * (z1.real() + z2.real());
          else if (ki == 1 && kj == 2)
            val = 2.0 * (z2.imag() - z1.imag());
          else if (ki == 2 && kj == 1)
            val = -2.0 * (z1.imag() + z2.imag());
          else
            val = 2.0 * (z2.real() - z1.real());
        }
        b(off_ + i, off_ + j) += val;
        if (j != i) b(off_ + j, off_ + i) += val;
      }
    }
  }

  void add_adjoint_z(Eigen::VectorXd& out) const override {
    add_adjoint(z_, out);
  }

  double dual_constant() const override { return 0.0; }

  double mu_pair() const override { return lam_.squaredNorm(); }

  void add_affine_adjoint(Eigen::VectorXd& out) const override {
    Eigen::MatrixXcd zr =
        rti_ * lam_.cast<cxd>().asDiagonal() * rti_.adjoint();
    add_adjoint(-zr, out);
  }

  void set_direction_affine(const Eigen::VectorXd& dx) override {
    ds_ = scale_primal(dx);
    dz_ = -ds_;
    dz_.diagonal() -= lam_.cast<cxd>();
  }

  double max_step_primal() const override { return max_step(lam_, ds_); }
  double max_step_dual() const override { return max_step(lam_, dz_); }

  double mu_after(double ap, double ad) const override {
    Eigen::MatrixXcd s = ap * ds_;
    s.diagonal() += lam_.cast<cxd>();
    Eigen::MatrixXcd z = ad * dz_;
    z.diagonal() += lam_.cast<cxd>();
    return (s * z).trace().real();
  }

  void add_corrector_adjoint(double sig_mu, Eigen::VectorXd& out) override {
    Eigen::MatrixXcd rhs = -0.5 * (ds_ * dz_ + dz_ * ds_);
    rhs.diagonal().array() += sig_mu;
    dk_.resize(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        dk_(i, j) = rhs(i, j) * (2.0 / (lam_(i) + lam_(j)));
    dk_.diagonal() -= lam_.cast<cxd>();
    add_adjoint(rti_ * dk_ * rti_.adjoint(), out);
  }

  void set_direction_corrector(const Eigen::VectorXd& dx) override {
    ds_ = scale_primal(dx);
    dz_ = dk_ - ds_;
  }

  void step_dual(double ad) override {
    Eigen::MatrixXcd dz = rti_ * dz_ * rti_.adjoint();
    z_ += ad * dz;
    z_ = 0.5 * (z_ + z_.adjoint()).eval();
  }

 private:
  Eigen::MatrixXcd scale_primal(const Eigen::VectorXd& dx) const {
    Eigen::MatrixXcd m = herm_from_params(dx.segment(off_, n_ * n_), n_);
    Eigen::MatrixXcd out = rti_.adjoint() * m * rti_;
    return 0.5 * (out + out.adjoint());
  }

  void add_adjoint(const Eigen::MatrixXcd& m, Eigen::VectorXd& out) const {
    for (int a = 0; a < n_; ++a) out(off_ + a) += m(a, a).real();
    int i = n_;
    for (int b = 1; b < n_; ++b)
      for (int a = 0; a < b; ++a) {
        out(off_ + i++) += 2.0 * m(a, b).real();
        out(off_ + i++) += 2.0 * m(a, b).imag();
      }
  }

  int off_, n_;
  std::vector<std::array<int, 3>> params_;
  Eigen::MatrixXcd s_, z_, r_, rti_, winv_, ds_, dz_, dk_;
  Eigen::LLT<Eigen::MatrixXcd> llt_s_;
  Eigen::VectorXd lam_;
};

// Real symmetric LMI spanned by a small basis: S = sum_e y_e M_e + C0,
// y = P x[vars].
class BasisBlock final : public Block {
 public:
  BasisBlock(std::vector<Eigen::MatrixXd> basis, Eigen::MatrixXd p,
             std::vector<int> vars, Eigen::MatrixXd offset)
      : basis_(std::move(basis)),
        p_(std::move(p)),
        vars_(std::move(vars)),
        c0_(std::move(offset)),
        d_(static_cast<int>(c0_.rows())) {}

  int barrier_dim() const override { return d_; }

  bool set_point(const Eigen::VectorXd& x) override {
    Eigen::VectorXd y = p_ * gather(x);
    s_ = c0_;
    for (int e = 0; e < static_cast<int>(basis_.size()); ++e)
      s_ += y(e) * basis_[e];
    llt_s_.compute(s_);
    return llt_s_.info() == Eigen::Success;
  }

  void init_dual() override { z_ = Eigen::MatrixXd::Identity(d_, d_); }

  bool update_scaling() override {
    Eigen::LLT<Eigen::MatrixXd> llt_z(z_);
    if (llt_z.info() != Eigen::Success) return false;
    Eigen::MatrixXd ls = llt_s_.matrixL();
    Eigen::MatrixXd lz = llt_z.matrixL();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        lz.transpose() * ls, Eigen::ComputeThinU | Eigen::ComputeThinV);
    lam_ = svd.singularValues();
    if (lam_.minCoeff() <= 0.0) return false;
    Eigen::VectorXd isq = lam_.cwiseSqrt().cwiseInverse();
    r_ = ls * svd.matrixV() * isq.asDiagonal();
    rti_ = lz * svd.matrixU() * isq.asDiagonal();
    return true;
  }

  void add_schur(Eigen::MatrixXd& b) const override {
    const int k = static_cast<int>(basis_.size());
    std::vector<Eigen::MatrixXd> tilde(k);
    for (int e = 0; e < k; ++e) tilde[e] = rti_.transpose() * basis_[e] * rti_;
    Eigen::MatrixXd gram(k, k);
    for (int e = 0; e < k; ++e)
      for (int f = e; f < k; ++f)
        gram(e, f) = gram(f, e) = tilde[e].cwiseProduct(tilde[f]).sum();
    Eigen::MatrixXd contrib = p_.transpose() * gram * p_;
    for (int i = 0; i < static_cast<int>(vars_.size()); ++i)
      for (int j = 0; j < static_cast<int>(vars_.size()); ++j)
        b(vars_[i], vars_[j]) += contrib(i, j);
  }

  void add_adjoint_z(Eigen::VectorXd& out) const override {
    add_adjoint(z_, out);
  }

  double dual_constant() const override {
    // S(x) = A(x) - C with C = -c0.
    return -c0_.cwiseProduct(z_).sum();
  }

  double mu_pair() const override { return lam_.squaredNorm(); }

  void add_affine_adjoint(Eigen::VectorXd& out) const override {
    Eigen::MatrixXd zr = rti_ * lam_.asDiagonal() * rti_.transpose();
    add_adjoint(-zr, out);
  }

  void set_direction_affine(const Eigen::VectorXd& dx) override {
    ds_ = scale_primal(dx);
    dz_ = -ds_;
    dz_.diagonal() -= lam_;
  }

  double max_step_primal() const override { return max_step(lam_, ds_); }
  double max_step_dual() const override { return max_step(lam_, dz_); }

  double mu_after(double ap, double ad) const override {
    Eigen::MatrixXd s = ap * ds_;
    s.diagonal() += lam_;
    Eigen::MatrixXd z = ad * dz_;
    z.diagonal() += lam_;
    return (s * z).trace();
  }

  void add_corrector_adjoint(double sig_mu, Eigen::VectorXd& out) override {
    Eigen::MatrixXd rhs = -0.5 * (ds_ * dz_ + dz_ * ds_);
    rhs.diagonal().array() += sig_mu;
    dk_.resize(d_, d_);
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j)
        dk_(i, j) = rhs(i, j) * (2.0 / (lam_(i) + lam_(j)));
    dk_.diagonal() -= lam_;
    add_adjoint(rti_ * dk_ * rti_.transpose(), out);
  }

  void set_direction_corrector(const Eigen::VectorXd& dx) override {
    ds_ = scale_primal(dx);
    dz_ = dk_ - ds_;
  }

  void step_dual(double ad) override {
    Eigen::MatrixXd dz = rti_ * dz_ * rti_.transpose();
    z_ += ad * dz;
    z_ = 0.5 * (z_ + z_.transpose()).eval();
  }

 private:
  Eigen::VectorXd gather(const Eigen::VectorXd& x) const {
    Eigen::VectorXd sub(vars_.size());
    for (size_t i = 0; i < vars_.size(); ++i) sub(i) = x(vars_[i]);
    return sub;
  }

  Eigen::MatrixXd scale_primal(const Eigen::VectorXd& dx) const {
    Eigen::VectorXd y = p_ * gather(dx);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d_, d_);
    for (int e = 0; e < static_cast<int>(basis_.size()); ++e)
      m += y(e) * basis_[e];
    Eigen::MatrixXd out = rti_.transpose() * m * rti_;
    return 0.5 * (out + out.transpose());
  }

  void add_adjoint(const Eigen::MatrixXd& m, Eigen::VectorXd& out) const {
    Eigen::VectorXd t(basis_.size());
    for (int e = 0; e < static_cast<int>(basis_.size()); ++e)
      t(e) = basis_[e].cwiseProduct(m).sum();
    Eigen::VectorXd contrib = p_.transpose() * t;
    for (size_t i = 0; i < vars_.size(); ++i) out(vars_[i]) += contrib(i);
  }

  std::vector<Eigen::MatrixXd> basis_;
  Eigen::MatrixXd p_;
  std::vector<int> vars_;
  Eigen::MatrixXd c0_;
  int d_;
  Eigen::MatrixXd s_, z_, r_, rti_, ds_, dz_, dk_;
  Eigen::LLT<Eigen::MatrixXd> llt_s_;
  Eigen::VectorXd lam_;
};

// Scalar inequality g'x - rhs >= 0 as a 1x1 cone.
class IneqBlock final : public Block {
 public:
  IneqBlock(std::vector<std::pair<int, double>> terms, double rhs)
      : terms_(std::move(terms)), rhs_(rhs) {}

  int barrier_dim() const override { return 1; }

  bool set_point(const Eigen::VectorXd& x) override {
    s_ = -rhs_;
    for (const auto& [idx, coef] : terms_) s_ += coef * x(idx);
    return s_ > 0.0;
  }

  void init_dual() override { z_ = 1.0; }

  bool update_scaling() override {
    if (z_ <= 0.0 || s_ <= 0.0) return false;
    lam_ = std::sqrt(s_ * z_);
    w_ = std::sqrt(s_ / z_);
    return true;
  }

  void add_schur(Eigen::MatrixXd& b) const override {
    const double scale = 1.0 / (w_ * w_);
    for (const auto& [i, ci] : terms_)
      for (const auto& [j, cj] : terms_) b(i, j) += scale * ci * cj;
  }

  void add_adjoint_z(Eigen::VectorXd& out) const override {
    for (const auto& [i, c] : terms_) out(i) += c * z_;
  }

  double dual_constant() const override { return rhs_ * z_; }

  double mu_pair() const override { return lam_ * lam_; }

  void add_affine_adjoint(Eigen::VectorXd& out) const override {
    const double m = -lam_ / w_;
    for (const auto& [i, c] : terms_) out(i) += c * m;
  }

  void set_direction_affine(const Eigen::VectorXd& dx) override {
    ds_ = apply(dx) / w_;
    dz_ = -lam_ - ds_;
  }

  double max_step_primal() const override {
    return ds_ >= 0.0 ? kInf : lam_ / -ds_;
  }
  double max_step_dual() const override {
    return dz_ >= 0.0 ? kInf : lam_ / -dz_;
  }

  double mu_after(double ap, double ad) const override {
    return (lam_ + ap * ds_) * (lam_ + ad * dz_);
  }

  void add_corrector_adjoint(double sig_mu, Eigen::VectorXd& out) override {
    dk_ = (sig_mu - ds_ * dz_) / lam_ - lam_;
    const double m = dk_ / w_;
    for (const auto& [i, c] : terms_) out(i) += c * m;
  }

  void set_direction_corrector(const Eigen::VectorXd& dx) override {
    ds_ = apply(dx) / w_;
    dz_ = dk_ - ds_;
  }

  void step_dual(double ad) override { z_ += ad * dz_ / w_; }

 private:
  double apply(const Eigen::VectorXd& dx) const {
    double v = 0.0;
    for (const auto& [i, c] : terms_) v += c * dx(i);
    return v;
  }

  std::vector<std::pair<int, double>> terms_;
  double rhs_;
  double s_ = 0, z_ = 0, lam_ = 0, w_ = 0, ds_ = 0, dz_ = 0, dk_ = 0;
};

}  // namespace

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::MaxIterations: return "max_iterations";
    case SolveStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

int ConicProblem::add_scalars(int count) {
  if (count < 1) throw std::invalid_argument("add_scalars: count must be >=1");
  const int first = num_vars_;
  num_vars_ += count;
  return first;
}

int ConicProblem::add_hermitian_psd(int complex_dim) {
  if (complex_dim < 1)
    throw std::invalid_argument("add_hermitian_psd: dimension must be >=1");
  const int first = num_vars_;
  num_vars_ += complex_dim * complex_dim;
  herms_.push_back({first, complex_dim});
  return first;
}

void ConicProblem::check_terms(
    const std::vector<std::pair<int, double>>& terms) const {
  for (const auto& [idx, coef] : terms) {
    (void)coef;
    if (idx < 0 || idx >= num_vars_)
      throw std::invalid_argument("variable index out of range");
  }
}

void ConicProblem::add_linear_inequality(
    const std::vector<std::pair<int, double>>& terms, double rhs) {
  if (terms.empty())
    throw std::invalid_argument("add_linear_inequality: empty terms");
  check_terms(terms);
  ineqs_.push_back({terms, rhs});
}

void ConicProblem::add_lmi(const std::vector<Eigen::MatrixXd>& basis,
                           const Eigen::MatrixXd& coeff_map,
                           const std::vector<int>& vars,
                           const Eigen::MatrixXd& offset) {
  if (basis.empty()) throw std::invalid_argument("add_lmi: empty basis");
  const int d = static_cast<int>(offset.rows());
  if (offset.cols() != d) throw std::invalid_argument("add_lmi: offset shape");
  if (coeff_map.rows() != static_cast<int>(basis.size()) ||
      coeff_map.cols() != static_cast<int>(vars.size()))
    throw std::invalid_argument("add_lmi: coefficient map shape");
  for (const auto& m : basis)
    if (m.rows() != d || m.cols() != d)
      throw std::invalid_argument("add_lmi: basis shape");
  for (int v : vars)
    if (v < 0 || v >= num_vars_)
      throw std::invalid_argument("add_lmi: variable index out of range");
  lmis_.push_back({basis, coeff_map, vars, offset});
}

void ConicProblem::add_equality(
    const std::vector<std::pair<int, double>>& terms, double rhs) {
  if (terms.empty()) throw std::invalid_argument("add_equality: empty terms");
  check_terms(terms);
  eqs_.push_back({terms, rhs});
}

void ConicProblem::set_objective(
    const std::vector<std::pair<int, double>>& terms) {
  check_terms(terms);
  objective_ = terms;
}

Eigen::MatrixXcd ConicProblem::hermitian_value(const Eigen::VectorXd& x,
                                               int start, int complex_dim) {
  return herm_from_params(x.segment(start, complex_dim * complex_dim),
                          complex_dim);
}

ConicSolution ConicProblem::solve(const Eigen::VectorXd& x0,
                                  const SolverOptions& opts) const {
  ConicSolution sol;
  if (x0.size() != num_vars_)
    throw std::invalid_argument("solve: initial point has wrong dimension");

  std::vector<std::unique_ptr<Block>> blocks;
  for (const auto& h : herms_)
    blocks.push_back(std::make_unique<HermBlock>(h.offset, h.n));
  for (const auto& l : lmis_)
    blocks.push_back(
        std::make_unique<BasisBlock>(l.basis, l.coeff_map, l.vars, l.offset));
  for (const auto& q : ineqs_)
    blocks.push_back(std::make_unique<IneqBlock>(q.terms, q.rhs));
  if (blocks.empty()) throw std::invalid_argument("solve: no cone blocks");

  const int m = num_vars_;
  const int neq = static_cast<int>(eqs_.size());
  Eigen::VectorXd c = Eigen::VectorXd::Zero(m);
  for (const auto& [i, v] : objective_) c(i) += v;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(neq, m);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(neq);
  for (int r = 0; r < neq; ++r) {
    for (const auto& [i, v] : eqs_[r].terms) g(r, i) += v;
    h(r) = eqs_[r].rhs;
  }

  double ntot = 0.0;
  for (const auto& b : blocks) ntot += b->barrier_dim();

  Eigen::VectorXd x = x0;
  for (const auto& b : blocks)
    if (!b->set_point(x)) {
      sol.message = "initial point is not strictly feasible";
      return sol;
    }
  for (const auto& b : blocks) b->init_dual();
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(neq);

  const double cnorm = 1.0 + c.lpNorm<Eigen::Infinity>();
  const double hnorm = 1.0 + (neq ? h.lpNorm<Eigen::Infinity>() : 0.0);
  constexpr double kStepFrac = 0.98;

  // Solves [B, -G'; G, 0] [dx; lp] = [rd; rp] through the Schur complement
  // of the positive definite B, then polishes with iterative refinement
  // against the unregularized matrix so near-degenerate endgames keep
  // accurate directions.
  Eigen::MatrixXd bmat(m, m);
  auto kkt = [&](const Eigen::LLT<Eigen::MatrixXd>& llt,
                 const Eigen::VectorXd& rd, const Eigen::VectorXd& rp,
                 Eigen::VectorXd& dx, Eigen::VectorXd& lp) {
    auto solve_once = [&](const Eigen::VectorXd& fd, const Eigen::VectorXd& fp,
                          Eigen::VectorXd& ox, Eigen::VectorXd& ol) {
      if (neq == 0) {
        ox = llt.solve(fd);
        ol.resize(0);
        return;
      }
      Eigen::MatrixXd binv_gt = llt.solve(g.transpose());
      Eigen::VectorXd binv_fd = llt.solve(fd);
      Eigen::MatrixXd meq = g * binv_gt;
      ol = meq.ldlt().solve(fp - g * binv_fd);
      ox = binv_fd + binv_gt * ol;
    };
    solve_once(rd, rp, dx, lp);
    for (int round = 0; round < 2; ++round) {
      Eigen::VectorXd res_d = rd - bmat * dx;
      Eigen::VectorXd res_p;
      if (neq) {
        res_d += g.transpose() * lp;
        res_p = rp - g * dx;
      }
      Eigen::VectorXd cx, cl;
      solve_once(res_d, res_p, cx, cl);
      dx += cx;
      if (neq) lp += cl;
    }
  };

  // The best iterate seen so far is what every exit returns, so numerical
  // trouble after near-convergence cannot erase an almost-optimal point.
  double best_merit = kInf;
  Eigen::VectorXd best_x = x;
  double best_obj = 0.0, best_gap = kInf, best_pres = kInf, best_dres = kInf;
  auto finish = [&](SolveStatus status, const char* message) {
    if (status != SolveStatus::Optimal && best_gap <= opts.accept_gap_tol &&
        best_pres <= opts.accept_feas_tol &&
        best_dres <= opts.accept_feas_tol) {
      status = SolveStatus::Optimal;
      message = "converged to reduced accuracy";
    }
    sol.status = status;
    sol.message = message;
    sol.x = best_x;
    sol.objective = best_obj;
    sol.rel_gap = best_gap;
    sol.primal_residual = best_pres;
    sol.dual_residual = best_dres;
    return sol;
  };

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    sol.iterations = iter;
    bool ok = true;
    for (const auto& b : blocks) ok = ok && b->update_scaling();
    if (!ok)
      return finish(SolveStatus::NumericalFailure,
                    "scaling factorization failed");

    const double obj = c.dot(x);
    double dual_const = 0.0;
    Eigen::VectorXd atz = Eigen::VectorXd::Zero(m);
    for (const auto& b : blocks) {
      dual_const += b->dual_constant();
      b->add_adjoint_z(atz);
    }
    const double dobj = dual_const + (neq ? h.dot(lambda) : 0.0);
    const double gap = obj - dobj;
    const double relgap = std::abs(gap) / (1.0 + std::abs(obj) + std::abs(dobj));
    Eigen::VectorXd rp = h - g * x;
    Eigen::VectorXd rd = c - atz;
    if (neq) rd -= g.transpose() * lambda;
    const double pres = neq ? rp.lpNorm<Eigen::Infinity>() / hnorm : 0.0;
    const double dres = rd.lpNorm<Eigen::Infinity>() / cnorm;

    const double merit = std::max({relgap, pres, dres});
    if (merit < best_merit) {
      best_merit = merit;
      best_x = x;
      best_obj = obj;
      best_gap = relgap;
      best_pres = pres;
      best_dres = dres;
    }
    if (opts.verbose)
      std::fprintf(stderr, "iter %3d obj %.9e gap %.2e pres %.2e dres %.2e\n",
                   iter, obj, relgap, pres, dres);
    if (relgap <= opts.rel_gap_tol && pres <= opts.feas_tol &&
        dres <= opts.feas_tol)
      return finish(SolveStatus::Optimal, "converged");
    if (merit > 1e4 * best_merit && best_merit < 1e-6)
      return finish(SolveStatus::NumericalFailure,
                    "stalled near the solution; returning best iterate");

    bmat.setZero();
    for (const auto& b : blocks) b->add_schur(bmat);
    Eigen::LLT<Eigen::MatrixXd> llt;
    double reg = 0.0;
    const double base = 1e-14 * std::max(1.0, bmat.diagonal().maxCoeff());
    for (int attempt = 0; attempt < 8; ++attempt) {
      Eigen::MatrixXd regged = bmat;
      regged.diagonal().array() += reg;
      llt.compute(regged);
      if (llt.info() == Eigen::Success) break;
      reg = (reg == 0.0) ? base : reg * 100.0;
    }
    if (llt.info() != Eigen::Success)
      return finish(SolveStatus::NumericalFailure,
                    "Schur complement factorization failed");

    // Predictor (affine scaling). The dual equation targets the measured
    // residual: B dx - G' dl = A*(rti K rti^H) + A*(Z) + G'l - c.
    Eigen::VectorXd rd_a = -rd;
    for (const auto& b : blocks) b->add_affine_adjoint(rd_a);
    Eigen::VectorXd dxa, lpa;
    kkt(llt, rd_a, rp, dxa, lpa);
    for (const auto& b : blocks) b->set_direction_affine(dxa);
    double ap = 1.0, ad = 1.0;
    for (const auto& b : blocks) {
      ap = std::min(ap, b->max_step_primal());
      ad = std::min(ad, b->max_step_dual());
    }
    double mu = 0.0, mu_aff = 0.0;
    for (const auto& b : blocks) {
      mu += b->mu_pair();
      mu_aff += b->mu_after(ap, ad);
    }
    mu /= ntot;
    mu_aff /= ntot;
    double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);

    // Corrector.
    Eigen::VectorXd rd_c = -rd;
    for (const auto& b : blocks) b->add_corrector_adjoint(sigma * mu, rd_c);
    Eigen::VectorXd dx, lp;
    kkt(llt, rd_c, rp, dx, lp);
    for (const auto& b : blocks) b->set_direction_corrector(dx);
    ap = kInf;
    ad = kInf;
    for (const auto& b : blocks) {
      ap = std::min(ap, b->max_step_primal());
      ad = std::min(ad, b->max_step_dual());
    }
    ap = std::min(1.0, kStepFrac * ap);
    ad = std::min(1.0, kStepFrac * ad);

    // Fall back to shorter primal steps if roundoff leaves S indefinite.
    Eigen::VectorXd xold = x;
    bool interior = false;
    for (int attempt = 0; attempt < 6 && !interior; ++attempt) {
      x = xold + ap * dx;
      interior = true;
      for (const auto& b : blocks) interior = interior && b->set_point(x);
      if (!interior) ap *= 0.5;
    }
    if (!interior)
      return finish(SolveStatus::NumericalFailure,
                    "primal step failed to stay interior");
    for (const auto& b : blocks) b->step_dual(ad);
    if (neq) lambda += ad * lp;
  }

  return finish(SolveStatus::MaxIterations, "iteration limit reached");
}

}  // namespace pebopt
