#pragma once

#include <cstddef>

#include "dirac/common.hpp"

namespace dirac {

// Adaptive Gauss(7)-Kronrod(15) quadrature on [a,b].
// Bisects the interval with the largest Kronrod error estimate until
//   sum(err) <= max(abs_tol, rel_tol * |sum(value)|).
// `initial_splits` seeds the work list with a uniform partition, which is
// how oscillatory integrands get resolved before refinement starts.

struct QuadOptions {
  double abs_tol = 0.0;
  double rel_tol = 1e-10;
  int initial_splits = 1;
  int max_intervals = 200000;
};

Complex integrate(const std::function<Complex(double)>& f, double a, double b,
                  const QuadOptions& opt = {});

double integrate_real(const std::function<double(double)>& f, double a,
                      double b, const QuadOptions& opt = {});

}  // namespace dirac
