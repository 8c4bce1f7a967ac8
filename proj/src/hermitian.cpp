// SPDX-License-Identifier: Apache-2.0

#include "pebopt/hermitian.hpp"

#include <stdexcept>

namespace pebopt {

Eigen::VectorXd herm_to_params(const Eigen::MatrixXcd& m) {
  const int n = static_cast<int>(m.rows());
  if (m.cols() != n) throw std::invalid_argument("hermitian: square expected");
  Eigen::VectorXd q(herm_param_count(n));
  for (int a = 0; a < n; ++a) q(a) = m(a, a).real();
  for (int b = 1; b < n; ++b)
    for (int a = 0; a < b; ++a) {
      const int e = herm_offdiag_index(a, b, n);
      q(e) = m(a, b).real();
      q(e + 1) = m(a, b).imag();
    }
  return q;
}

Eigen::MatrixXcd herm_from_params(const Eigen::VectorXd& q, int n) {
  if (q.size() != herm_param_count(n))
    throw std::invalid_argument("hermitian: wrong parameter count");
  Eigen::MatrixXcd m(n, n);
  for (int a = 0; a < n; ++a) m(a, a) = q(a);
  for (int b = 1; b < n; ++b)
    for (int a = 0; a < b; ++a) {
      const int e = herm_offdiag_index(a, b, n);
      m(a, b) = cxd(q(e), q(e + 1));
      m(b, a) = std::conj(m(a, b));
    }
  return m;
}

Eigen::MatrixXd embed_hermitian(const Eigen::MatrixXcd& m) {
  const int n = static_cast<int>(m.rows());
  if (m.cols() != n) throw std::invalid_argument("embed: square expected");
  Eigen::MatrixXd s(2 * n, 2 * n);
  s.topLeftCorner(n, n) = m.real();
  s.bottomRightCorner(n, n) = m.real();
  s.topRightCorner(n, n) = -m.imag();
  s.bottomLeftCorner(n, n) = m.imag();
  return s;
}

Eigen::MatrixXcd extract_hermitian(const Eigen::MatrixXd& s) {
  const int t = static_cast<int>(s.rows());
  if (s.cols() != t || t % 2 != 0)
    throw std::invalid_argument("extract: even-dimensional square expected");
  const int n = t / 2;
  // Average the two redundant copies; exact for true embeddings.
  Eigen::MatrixXcd m =
      0.5 * (s.topLeftCorner(n, n) + s.bottomRightCorner(n, n)).cast<cxd>();
  m += cxd(0.0, 0.5) *
       (s.bottomLeftCorner(n, n) - s.topRightCorner(n, n)).cast<cxd>();
  return m;
}

}  // namespace pebopt
