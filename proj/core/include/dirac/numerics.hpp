#pragma once

#include <span>
#include <vector>

#include "dirac/potential.hpp"

namespace dirac {

// integral_a^b poly(t) e^{i omega t} dt, closed form.
// Series about the segment midpoint while |omega|(b-a) <= 8 (term count
// adapted to machine precision), integration by parts above; the recursion
// is then free of cancellation growth for the degrees that occur here.
Complex osc_segment_integral(const Poly& poly, Complex omega, double a,
                             double b);

// exact integral_a^b pot(t) e^{i omega t} dt (per-segment closed forms)
Complex osc_potential_integral(const Potential& pot, Complex omega, double a,
                               double b);

// Windowed transform x -> integral_0^x e^{i omega t} sigma(t) dt sampled on
// the uniform grid x_i = i/M; values are exact per segment (potential
// breakpoints are merged into the accumulation).
struct OscTransform {
  Potential source;
  Complex omega;
  int grid_m = 0;
  std::vector<Complex> prefix;  // M+1 values, prefix[0] == 0

  Complex at_node(int i) const { return prefix[static_cast<std::size_t>(i)]; }
  Complex value_at(double x) const;  // exact at arbitrary x in [0,1]
};

OscTransform prefix_transform(const Potential& pot, Complex omega, int M);

// Exact evaluator for G(t) = integral_0^t g(xi) e^{i omega xi} dxi.
class ExactPrefix {
 public:
  ExactPrefix(const Potential& g, Complex omega);
  Complex value(double t) const;

 private:
  const Potential* g_;
  Complex omega_;
  std::vector<Complex> at_breaks_;
};

// integral_0^{x} f(t) e^{i w_out t} [ integral_0^t g(xi) e^{i w_in xi} dxi ] dt.
// Inner transform exact; outer product integrated adaptively (rel 1e-10).
Complex triangle_double_integral(const Potential& f, const Potential& g,
                                 Complex omega_outer, Complex omega_inner,
                                 double x_upper = 1.0);

// cumulative version on the uniform grid x_i = i/M
std::vector<Complex> triangle_double_integral_prefix(const Potential& f,
                                                     const Potential& g,
                                                     Complex omega_outer,
                                                     Complex omega_inner,
                                                     int M);

// ---------------------------------------------------------------------------
// Product integration of gridded data against exact oscillatory weights.
// f holds n >= 1 samples on the uniform grid t_j = j*h; the piecewise-linear
// interpolant of f is integrated against e^{i omega t} (optionally times t)
// in closed form per cell.

Complex gridded_osc_integral(std::span<const Complex> f, double h,
                             Complex omega);
Complex gridded_osc_integral_tweighted(std::span<const Complex> f, double h,
                                       Complex omega);
std::vector<Complex> gridded_osc_prefix(std::span<const Complex> f, double h,
                                        Complex omega);

// ---------------------------------------------------------------------------
// Zero localization by the argument principle on rectangle boundaries.

struct SearchBox {
  Complex center;
  double half_width = 0.45;
  double half_height = 4.0;
  int boundary_samples = 64;  // initial sample count (whole perimeter)

  bool contains(Complex z, double slack = 0.0) const {
    return std::abs(z.real() - center.real()) <= half_width + slack &&
           std::abs(z.imag() - center.imag()) <= half_height + slack;
  }
};

// Thrown when |phi| on the boundary drops below the zero-detection
// threshold; the caller is expected to move or resize the box.
struct BoundaryZeroError : NumericalError {
  using NumericalError::NumericalError;
};

using ComplexFn = std::function<Complex(Complex)>;

// number of zeros inside (with multiplicity); adaptive boundary sampling
// until every argument increment is below pi/2
int winding_count(const ComplexFn& phi, const SearchBox& box);

struct PolishResult {
  Complex root;
  double residual = 0.0;  // |phi(root)|
  int iterations = 0;
};

// derivative-free secant refinement from `start`, constrained to `box`;
// falls back to winding-guided box subdivision when the iteration escapes
PolishResult root_polish(const ComplexFn& phi, Complex start, double tol,
                         const SearchBox& box);

}  // namespace dirac
