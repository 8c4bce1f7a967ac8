// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "pebopt/common.hpp"
#include "pebopt/hermitian.hpp"

namespace pebopt {

enum class SolveStatus { Optimal, MaxIterations, NumericalFailure };
const char* status_name(SolveStatus s);

struct SolverOptions {
  double rel_gap_tol = 1e-8;
  double feas_tol = 1e-8;
  int max_iterations = 100;
  bool verbose = false;
  // When the target tolerances prove unreachable (stall, breakdown, or the
  // iteration limit), the best iterate is still reported Optimal if it meets
  // these relaxed thresholds; the message records the reduced accuracy.
  // Structurally flat problems can pin the reachable gap well above
  // rel_gap_tol while the returned design is accurate to plotting precision.
  double accept_gap_tol = 1e-4;
  double accept_feas_tol = 1e-4;
};

struct ConicSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  Eigen::VectorXd x;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double rel_gap = std::numeric_limits<double>::quiet_NaN();
  double primal_residual = std::numeric_limits<double>::quiet_NaN();
  double dual_residual = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  std::string message;
};

// Canonical conic program over a real variable vector x:
//   minimize  c'x
//   s.t.      sum_i x_i * A_{nu,i} - C_nu  PSD   for every cone block nu
//             G x = h
// Cone blocks come in three shapes: a Hermitian PSD matrix variable
// (its n^2 real parameters are variables and the block pins the matrix
// itself to the cone), a structured LMI spanned by a small basis with a
// linear coefficient map, and scalar linear inequalities. Complex
// Hermitian blocks are handled natively; they are equivalent to the
// real [Re, -Im; Im, Re] embedding with a factor-2 trace bookkeeping.
class ConicProblem {
 public:
  // Appends `count` free scalar variables; returns the first index.
  int add_scalars(int count);

  // Appends a complex Hermitian PSD matrix variable of (complex) dimension
  // n: n^2 real parameters in the hermitian.hpp ordering. Returns the first
  // parameter index.
  int add_hermitian_psd(int complex_dim);

  // Adds sum_k terms_k.second * x_{terms_k.first} - rhs >= 0.
  void add_linear_inequality(const std::vector<std::pair<int, double>>& terms,
                             double rhs);

  // Adds sum_e y_e * basis[e] + offset PSD with y = coeff_map * x[vars].
  // basis elements and offset must be real symmetric and share dimensions.
  void add_lmi(const std::vector<Eigen::MatrixXd>& basis,
               const Eigen::MatrixXd& coeff_map, const std::vector<int>& vars,
               const Eigen::MatrixXd& offset);

  void add_equality(const std::vector<std::pair<int, double>>& terms,
                    double rhs);

  // Objective terms; unspecified coefficients are zero.
  void set_objective(const std::vector<std::pair<int, double>>& terms);

  int num_vars() const { return num_vars_; }

  // Primal-dual interior-point solve (Nesterov-Todd scaling, Mehrotra
  // predictor-corrector). x0 must make every cone block strictly positive
  // definite; callers construct such a point from problem knowledge.
  ConicSolution solve(const Eigen::VectorXd& x0,
                      const SolverOptions& opts = {}) const;

  // Reads a Hermitian matrix variable out of a solution vector.
  static Eigen::MatrixXcd hermitian_value(const Eigen::VectorXd& x, int start,
                                          int complex_dim);

 private:
  struct HermSpec {
    int offset;
    int n;
  };
  struct LmiSpec {
    std::vector<Eigen::MatrixXd> basis;
    Eigen::MatrixXd coeff_map;
    std::vector<int> vars;
    Eigen::MatrixXd offset;
  };
  struct IneqSpec {
    std::vector<std::pair<int, double>> terms;
    double rhs;
  };
  struct EqSpec {
    std::vector<std::pair<int, double>> terms;
    double rhs;
  };

  void check_terms(const std::vector<std::pair<int, double>>& terms) const;

  int num_vars_ = 0;
  std::vector<HermSpec> herms_;
  std::vector<LmiSpec> lmis_;
  std::vector<IneqSpec> ineqs_;
  std::vector<EqSpec> eqs_;
  std::vector<std::pair<int, double>> objective_;
};

}  // namespace pebopt
