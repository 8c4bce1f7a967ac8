// SPDX-License-Identifier: Apache-2.0
//
// Real parameterization of complex Hermitian matrices and the standard
// complex-to-real symmetric embedding. An n x n Hermitian matrix carries
// n^2 real degrees of freedom, ordered as the n diagonal entries followed
// by (Re, Im) pairs of the upper triangle, column by column.
#pragma once

#include "pebopt/common.hpp"

namespace pebopt {

inline int herm_param_count(int n) { return n * n; }

// Index of the parameter for entry (a, b), a < b: returns the Re index;
// the Im index is one higher.
inline int herm_offdiag_index(int a, int b, int n) {
  (void)n;
  return n + 2 * (b * (b - 1) / 2 + a);
}

Eigen::VectorXd herm_to_params(const Eigen::MatrixXcd& m);
Eigen::MatrixXcd herm_from_params(const Eigen::VectorXd& q, int n);

// [Re M, -Im M; Im M, Re M]: symmetric when M is Hermitian, and PSD iff
// M is PSD. Traces and inner products double under the embedding.
Eigen::MatrixXd embed_hermitian(const Eigen::MatrixXcd& m);
Eigen::MatrixXcd extract_hermitian(const Eigen::MatrixXd& s);

}  // namespace pebopt
