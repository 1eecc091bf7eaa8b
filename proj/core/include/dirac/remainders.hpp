#pragma once

#include <vector>

#include "dirac/kernel.hpp"
#include "dirac/potential.hpp"

namespace dirac {

// The remainder functionals at one mu, sampled on the uniform grid:
//   gamma0(x) = sum_j |int_0^x e^{-2i mu t} s_j| + |int_0^x e^{+2i mu t} s_j|
//   gamma     = sum of the four L_q norms in x (sup norms when q = inf)
//   Gamma     = sum of the four sup norms
//   gamma1    = int_0^1 sigma0 gamma0^2, gamma2 = a2^2 gamma^2 + a1 gamma1
struct RemainderProfile {
  Complex mu;
  int grid_m = 0;
  std::vector<double> gamma0;  // at x_i = i/M
  double gamma = 0.0;
  double Gamma = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  // constants snapshot
  double a0 = 0.0, a1 = 0.0, a2 = 0.0, ta0 = 0.0, ta = 0.0, d = 0.0;
};

RemainderProfile remainder_profile(const PotentialPair& pair, Complex mu,
                                   int M, double d);

// exact gamma0 at one point
double gamma0_at(const PotentialPair& pair, Complex mu, double x);

// Margins (rhs - lhs) of the explicit inequality suite at a single mu in
// P_d; nonnegative values mean the inequality holds on the grid.
struct RemainderMargins {
  Complex mu;
  double est_im0 = 0.0;      // diag J~ rows, sup over x
  double est_im100 = 0.0;    // off-diag T J~ rows, sup over x
  double est_im1 = 0.0;      // pointwise bound, min over x
  double est_im3_n2 = 0.0;
  double est_im3_n3 = 0.0;
  double gs1_gamma0 = 0.0;   // 2 e^{2d} a1 - sup gamma0
  double gs1_gamma0_lq = 0.0;  // gamma - ||gamma0||_{L_q}
  double gs1_gamma = 0.0;    // 2 e^{2d} a1 - gamma
  double g21_static = 0.0;   // 4 e^{4d} a1^2 (a2 + a1^2) - gamma2
  double g21_gamma = 0.0;    // 2 a1 e^{2d}(a2 + 2 a1 e^{2d} ||sigma0||_p) gamma - gamma2
  double scale = 1.0;        // for tolerance: max of the bound magnitudes

  double min_margin() const;
};

RemainderMargins remainder_margins(const PotentialPair& pair,
                                   const KernelWorkspace& ws, Complex mu,
                                   double d);

struct AsimpReport {
  std::vector<RemainderMargins> entries;
  // true when every margin >= -tol_per_scale * scale
  bool all_nonnegative(double tol_per_scale = 1e-8) const;
  double worst_relative_margin() const;  // min over entries of margin/scale
};

AsimpReport verify_asimp(const PotentialPair& pair, const KernelWorkspace& ws,
                         const std::vector<Complex>& mu_sweep, double d);

// convenience for eigen records: (gamma(mu), Gamma(mu)) at grid M
std::pair<double, double> gamma_and_Gamma(const PotentialPair& pair,
                                          Complex mu, int M);

}  // namespace dirac
