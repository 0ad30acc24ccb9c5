#pragma once

#include <functional>

namespace rsw::quad {

struct Result {
  double value = 0;
  double error = 0;
  int evaluations = 0;
};

struct Options {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  int max_intervals = 4000;
};

/// Globally adaptive 7/15-point Gauss-Kronrod quadrature on a finite interval.
/// Nodes never touch the endpoints, so integrable endpoint singularities are
/// tolerated (slowly). Throws Error(quadrature_fail) when the interval budget
/// runs out before the tolerance is met.
Result gauss_kronrod(const std::function<double(double)>& f, double a, double b,
                     const Options& opts = {});

}  // namespace rsw::quad
