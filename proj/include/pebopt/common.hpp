// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>

#include <Eigen/Dense>

namespace pebopt {

using cxd = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s, exact
inline constexpr double kPi = 3.14159265358979323846264338327950288;

// Power quantities only (10 dB per decade).
inline double db_to_lin(double db) { return std::pow(10.0, 0.1 * db); }
inline double lin_to_db(double lin) { return 10.0 * std::log10(lin); }

}  // namespace pebopt
