#pragma once

#include <span>
#include <vector>

#include "dirac/numerics.hpp"
#include "dirac/potential.hpp"

namespace dirac {

// Uniform discretization of the triangle 0 <= t <= x <= 1: nodes
// (x_i, t_j) = (i/M, j/M) with 0 <= j <= i <= M.
struct TriangleGrid {
  int M = 0;

  explicit TriangleGrid(int m) : M(m) {
    if (m < 8) throw DomainError("TriangleGrid needs M >= 8");
  }
  double h() const { return 1.0 / M; }
  std::size_t node_count() const {
    const std::size_t n = static_cast<std::size_t>(M) + 1;
    return n * (n + 1) / 2;
  }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * (i + 1) / 2 + j;
  }
  bool operator==(const TriangleGrid& o) const { return M == o.M; }
};

// Complex scalar on the discrete triangle; implicit 0 for t > x.
struct ScalarField {
  TriangleGrid grid;
  std::vector<Complex> v;

  explicit ScalarField(TriangleGrid g)
      : grid(g), v(g.node_count(), Complex{}) {}
  Complex at(int i, int j) const { return v[grid.index(i, j)]; }
  Complex& at(int i, int j) { return v[grid.index(i, j)]; }
  // row i = values (f(x_i, t_0), ..., f(x_i, t_i)), contiguous
  std::span<const Complex> row(int i) const {
    return {v.data() + grid.index(i, 0), static_cast<std::size_t>(i) + 1};
  }
  std::span<Complex> row(int i) {
    return {v.data() + grid.index(i, 0), static_cast<std::size_t>(i) + 1};
  }
};

// 2x2 matrix-valued field on the shared grid.
struct KernelField {
  ScalarField e11, e12, e21, e22;

  explicit KernelField(TriangleGrid g) : e11(g), e12(g), e21(g), e22(g) {}
  TriangleGrid grid() const { return e11.grid; }
  void add(const KernelField& o);
};

// (integral over the operator's path with sigma treated exactly)
// Precomputes per-cell moments of sigma so that
//   (T_sigma f)(x_i,t_j) = integral_{t_j}^{x_i} sigma(s) f(s, s-t_j) ds
// is evaluated with f piecewise linear along the line and sigma exact.
class ProductIntegrator {
 public:
  ProductIntegrator(const Potential& sigma, TriangleGrid grid);
  ScalarField apply(const ScalarField& f) const;
  TriangleGrid grid() const { return grid_; }

 private:
  TriangleGrid grid_;
  std::vector<Complex> w0_, w1_;  // cell weights, size M
};

// sigma_tilde_1(x,t) = integral_0^{x-t} sigma1(t+xi) sigma2(xi) dxi
// (which = 1 swaps nothing, which = 2 swaps the roles); exact at nodes.
ScalarField sigma_tilde(const PotentialPair& pair, int which,
                        TriangleGrid grid);

ScalarField apply_T(const Potential& sigma, const ScalarField& f);

// diag(sigma_tilde_1, sigma_tilde_2)
KernelField build_J_tilde(const PotentialPair& pair, TriangleGrid grid);

// applies -[[0, T_{s1}],[T_{s2}, 0]] to a matrix field
KernelField apply_T_matrix(const ProductIntegrator& t1,
                           const ProductIntegrator& t2, const KernelField& f);

// N = J_tilde + T J_tilde = [[st1, -T_{s1} st2], [-T_{s2} st1, st2]]
KernelField build_N(const PotentialPair& pair, TriangleGrid grid);

// discrete B-norm: max over rows of the trapezoid L_r norm on [0, x_i]
double b_norm(const ScalarField& f, double r);
// sum of the four entry norms
double mb_norm(const KernelField& f, double r);

struct NeumannReport {
  int terms = 0;             // number of operator powers summed
  double tail_bound = 0.0;   // a-priori bound on the dropped tail
  double last_term_norm = 0.0;
  double j_tilde_norm = 0.0;
};

// Q = sum_n T^n J_tilde, summed in pairs T^{2k}(I+T) J_tilde until the
// factorial tail bound (1+a0) e^a ||J~||_B a^{k+1}/(k+1)! drops below
// tail_tol. Throws if 1024 powers do not reach the tolerance.
std::pair<KernelField, NeumannReport> neumann_solve(const PotentialPair& pair,
                                                    TriangleGrid grid,
                                                    double tail_tol);

// ||Q - J~ - T Q||_{M(B)} on the grid (fixed-point diagnostic)
double fixed_point_residual(const PotentialPair& pair, const KernelField& q,
                            double r);

// Everything the asymptotic machinery consumes, built once per pair/grid.
struct KernelWorkspace {
  TriangleGrid grid;
  ScalarField sig1t, sig2t;
  KernelField Jt;
  KernelField TJt, T2Jt, T3Jt;
  KernelField N;
  KernelField Q;
  NeumannReport report;

  explicit KernelWorkspace(TriangleGrid g)
      : grid(g), sig1t(g), sig2t(g), Jt(g), TJt(g), T2Jt(g), T3Jt(g), N(g),
        Q(g) {}
};

KernelWorkspace build_workspace(const PotentialPair& pair, int M,
                                double tail_tol = 1e-10);

}  // namespace dirac
