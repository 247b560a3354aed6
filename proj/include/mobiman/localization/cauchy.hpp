#pragma once

#include <cmath>

namespace mobiman::localization {

// Robust kernel: cauchy(r) = (s^2/2) ln(1 + (r/s)^2).
// Bounded below the quadratic r^2/2 everywhere except r = 0.
inline double cauchy(double residual, double scale) {
  const double x = residual / scale;
  return 0.5 * scale * scale * std::log1p(x * x);
}

// d cauchy / d r = r / (1 + (r/s)^2).
inline double cauchy_derivative(double residual, double scale) {
  const double x = residual / scale;
  return residual / (1.0 + x * x);
}

// IRLS weight w(r) = cauchy'(r)/r = 1 / (1 + (r/s)^2); w(0) = 1.
inline double cauchy_weight(double residual, double scale) {
  const double x = residual / scale;
  return 1.0 / (1.0 + x * x);
}

}  // namespace mobiman::localization
