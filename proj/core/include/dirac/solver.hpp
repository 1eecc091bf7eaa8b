#pragma once

#include <vector>

#include "dirac/kernel.hpp"
#include "dirac/potential.hpp"

namespace dirac {

struct Mat2 {
  Complex m11{}, m12{}, m21{}, m22{};

  Mat2 operator-(const Mat2& o) const {
    return {m11 - o.m11, m12 - o.m12, m21 - o.m21, m22 - o.m22};
  }
  double max_abs() const {
    return std::max(std::max(std::abs(m11), std::abs(m12)),
                    std::max(std::abs(m21), std::abs(m22)));
  }
  double sum_abs() const {
    return std::abs(m11) + std::abs(m12) + std::abs(m21) + std::abs(m22);
  }
};

enum class SolveMethod { direct, kernel, approx_leading, approx_D0, approx_N };

const char* to_string(SolveMethod m);

// D(x, mu) sampled on an x-grid; D(0) = I for the direct/kernel methods.
struct FundamentalSample {
  Complex mu;
  SolveMethod method = SolveMethod::direct;
  std::vector<double> x;
  std::vector<Mat2> values;
};

// Adaptive RKF78 integration of D' = (A_mu - J(x)) D, D(0) = I, restricted
// so that no internal step straddles a potential breakpoint. This is the
// build's oracle for everything kernel-derived.
FundamentalSample solve_direct(const PotentialPair& pair, Complex mu, int M,
                               double tol = 1e-11);

// D at arbitrary sorted nodes (first implicit node is 0 with D = I)
std::vector<Mat2> solve_direct_at(const PotentialPair& pair, Complex mu,
                                  const std::vector<double>& nodes,
                                  double tol = 1e-11);

// D = e^{xA} + int_0^x e^{(x-2t)A} [Q(x,t) - J(t)] dt with the potential part
// exact and the Q rows integrated against exact oscillatory cell weights.
// Q must live on a grid whose M is a multiple of the output M.
FundamentalSample solve_via_kernel(const PotentialPair& pair,
                                   const KernelField& q, Complex mu, int M);

FundamentalSample approx_leading(Complex mu, int M);

// e^{xA} plus the explicit first-correction matrix (windowed transforms of
// sigma_j and sigma-tilde_j)
FundamentalSample approx_D0(const PotentialPair& pair, Complex mu, int M);

// e^{xA} - int e^{(x-2t)A} J dt + int e^{(x-2t)A} N(x,t) dt
FundamentalSample approx_N(const PotentialPair& pair, const KernelField& n,
                           Complex mu, int M);

// sup over common nodes of the entrywise difference
double sample_distance(const FundamentalSample& a, const FundamentalSample& b);

// sup over interior stencil nodes of |D' - (A_mu - J) D| (6th-order finite
// differences; stencil windows containing potential breakpoints are skipped)
double fundamental_ode_residual(const PotentialPair& pair,
                                const FundamentalSample& sample);

}  // namespace dirac
