#pragma once

#include <optional>
#include <vector>

#include "dirac/kernel.hpp"
#include "dirac/potential.hpp"
#include "dirac/solver.hpp"

namespace dirac {

// Two readings of the first-correction eigenvalue term. `paper` evaluates
// the published expression verbatim (parity factors and all); `oracle` is
// the variant whose signs are fixed by the constant-potential closed form,
// mu0 = (1/2i)(F1 - F2) - i * double-integral, and is the one the remainder
// diagnostics subtract.
enum class Mu0Convention { paper, oracle };

struct EigenRecord {
  int n = 0;
  Complex mu;
  Complex mu0_paper;
  Complex mu0_oracle;
  Complex rho;             // mu - pi n - mu0_oracle
  double phi_residual = 0.0;
  int iterations = 0;
  int box_winding = 0;
  double gamma_pin = 0.0;  // gamma(pi n)
  double Gamma_pin = 0.0;  // Gamma(pi n)
};

Complex char_fn_direct(const PotentialPair& pair, Complex mu,
                       double ode_tol = 1e-12);
Complex char_fn_kernel(const PotentialPair& pair, const KernelField& q,
                       Complex mu);

struct LocateOptions {
  double d = 2.0;                 // stripe half-width (box half-height = 2d)
  double box_half_width = 0.45;
  int boundary_samples = 64;
  double root_tol = 1e-10;
  double ode_tol = 1e-13;         // for the final direct refinement
  bool direct_refine = true;
  unsigned threads = 1;
  int gamma_grid = 0;             // 0: reuse the kernel grid
};

// One record per n in [n_lo, n_hi]: winding-count confirmation on the box
// around pi n, secant polish of the kernel characteristic function from
// pi n + mu0, then a direct-method refinement.
std::vector<EigenRecord> locate_eigenvalues(const PotentialPair& pair,
                                            const KernelWorkspace& ws,
                                            int n_lo, int n_hi,
                                            const LocateOptions& opts = {});

Complex asymptotic_mu0(const PotentialPair& pair, int n,
                       Mu0Convention convention);
// Fourier terms only (valid reading for 1 < p <= 4/3)
Complex simplified_mu0(const PotentialPair& pair, int n,
                       Mu0Convention convention = Mu0Convention::oracle);

struct DecayReport {
  double p = 0.0, q = 0.0;
  std::vector<int> n;
  std::vector<double> rho_abs;
  std::vector<double> gamma_pin;
  std::vector<double> Gamma_pin;
  std::vector<double> partial_sums;  // S_N = sum_{k<=N} |rho_k|^{q/2} (1<p<2)
  std::vector<double> ratio;         // |rho_n| / Gamma(pi n)^2   (p=1 mode)
};

DecayReport decay_report(const std::vector<EigenRecord>& records,
                         const PotentialPair& pair);

// medians over dyadic index blocks [start, 2 start), [2 start, 4 start), ...
std::vector<double> dyadic_block_medians(const std::vector<int>& n,
                                         const std::vector<double>& values,
                                         int start = 8);

struct EigenfunctionSample {
  int n = 0;
  Complex mu;
  std::vector<double> x;
  std::vector<Complex> y1, y2;
  double boundary_residual = 0.0;  // |y1(1) - y2(1)|
};

// column sums of the direct fundamental matrix at mu_n
EigenfunctionSample eigenfunction(const PotentialPair& pair,
                                  const EigenRecord& record, int M,
                                  double ode_tol = 1e-12);

// sup of |y' - (A_mu - J) y| by 6th-order differences on a mu-adapted grid
double eigenfunction_ode_residual(const PotentialPair& pair,
                                  const EigenRecord& record,
                                  double ode_tol = 1e-13);

// Theorem-grade approximation with F_j = -sigma_j + sigma~_j - T sigma~
// including the t-weighted transforms; needs 1 < p < 2.
EigenfunctionSample asymptotic_eigenfunction_full(const PotentialPair& pair,
                                                  const KernelWorkspace& ws,
                                                  const EigenRecord& record,
                                                  int M);

// shorter variant: Fourier term of sigma_j plus the triangle double
// integral, interior frequency read as pi n
EigenfunctionSample asymptotic_eigenfunction_short(const PotentialPair& pair,
                                                   const EigenRecord& record,
                                                   int M);

double eigenfunction_sup_distance(const EigenfunctionSample& a,
                                  const EigenfunctionSample& b);

}  // namespace dirac
