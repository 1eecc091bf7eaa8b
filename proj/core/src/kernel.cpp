#include "dirac/kernel.hpp"

#include <algorithm>
#include <cmath>

namespace dirac {

void KernelField::add(const KernelField& o) {
  for (std::size_t k = 0; k < e11.v.size(); ++k) {
    e11.v[k] += o.e11.v[k];
    e12.v[k] += o.e12.v[k];
    e21.v[k] += o.e21.v[k];
    e22.v[k] += o.e22.v[k];
  }
}

// ---------------------------------------------------------------------------
// sigma_tilde: exact node values of the convolution-type kernels

ScalarField sigma_tilde(const PotentialPair& pair, int which,
                        TriangleGrid grid) {
  if (which != 1 && which != 2) throw DomainError("sigma_tilde: which in {1,2}");
  const Potential& outer = which == 1 ? pair.sigma1 : pair.sigma2;
  const Potential& inner = which == 1 ? pair.sigma2 : pair.sigma1;
  ScalarField out(grid);
  if (outer.is_zero() || inner.is_zero()) return out;

  const int M = grid.M;
  for (int j = 0; j <= M; ++j) {
    const double t = static_cast<double>(j) / M;
    // integrand in s on [t,1]: outer(s) * inner(s - t)
    std::vector<double> shifted;
    shifted.reserve(inner.breakpoints().size());
    for (double b : inner.breakpoints()) {
      const double s = b + t;
      if (s > t - 1e-15 && s < 1.0 + 1e-15)
        shifted.push_back(std::min(std::max(s, t), 1.0));
    }
    std::vector<double> cuts;
    for (double b : outer.breakpoints())
      if (b >= t - 1e-15) cuts.push_back(std::max(b, t));
    cuts = merge_breakpoints(cuts, shifted);
    if (cuts.empty() || cuts.front() > t + 1e-15) cuts.insert(cuts.begin(), t);
    if (cuts.back() < 1.0 - 1e-15) cuts.push_back(1.0);

    // walk nodes x_i (i >= j) and cut intervals together, accumulating the
    // exact integral of the degree<=6 product polynomial
    Complex acc{};
    std::size_t seg = 0;
    double lo = t;
    auto product_poly = [&](double mid) {
      const Poly& po = outer.segment_poly(outer.segment_index(mid));
      const Poly pi = inner.segment_poly(inner.segment_index(mid - t)).shifted(-t);
      return Poly::mul(po, pi);
    };
    for (int i = j; i <= M; ++i) {
      const double node = static_cast<double>(i) / M;
      while (seg + 1 < cuts.size() && cuts[seg + 1] < node - 1e-15) {
        const double hi = cuts[seg + 1];
        if (hi > lo)
          acc += product_poly(0.5 * (lo + hi)).integral(lo, hi);
        lo = hi;
        ++seg;
      }
      if (node > lo)
        acc += product_poly(0.5 * (lo + node)).integral(lo, node);
      lo = node;
      out.at(i, j) = acc;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Volterra operator with exact sigma moments

ProductIntegrator::ProductIntegrator(const Potential& sigma, TriangleGrid grid)
    : grid_(grid),
      w0_(static_cast<std::size_t>(grid.M), Complex{}),
      w1_(static_cast<std::size_t>(grid.M), Complex{}) {
  const int M = grid.M;
  const double h = grid.h();
  for (int k = 0; k < M; ++k) {
    const double sa = static_cast<double>(k) / M;
    const double sb = static_cast<double>(k + 1) / M;
    // A = int sigma, B = int s*sigma over the cell, split at breakpoints
    Complex A{}, B{};
    const auto& breaks = sigma.breakpoints();
    std::size_t seg = sigma.segment_index(sa);
    double lo = sa;
    while (lo < sb - 1e-16) {
      const double hi = std::min(sb, breaks[seg + 1]);
      const Poly& p = sigma.segment_poly(seg);
      A += p.integral(lo, hi);
      B += p.times_t().integral(lo, hi);
      lo = hi;
      ++seg;
      if (seg >= sigma.segment_count()) break;
    }
    w0_[static_cast<std::size_t>(k)] = (sb * A - B) / h;
    w1_[static_cast<std::size_t>(k)] = (B - sa * A) / h;
  }
}

ScalarField ProductIntegrator::apply(const ScalarField& f) const {
  if (!(f.grid == grid_))
    throw DomainError("ProductIntegrator: grid mismatch");
  const int M = grid_.M;
  ScalarField out(grid_);
  for (int j = 0; j <= M; ++j) {
    Complex acc{};
    out.at(j, j) = acc;
    for (int i = j + 1; i <= M; ++i) {
      const std::size_t k = static_cast<std::size_t>(i) - 1;
      acc += w0_[k] * f.at(i - 1, i - 1 - j) + w1_[k] * f.at(i, i - j);
      out.at(i, j) = acc;
    }
  }
  return out;
}

ScalarField apply_T(const Potential& sigma, const ScalarField& f) {
  return ProductIntegrator(sigma, f.grid).apply(f);
}

// ---------------------------------------------------------------------------

KernelField build_J_tilde(const PotentialPair& pair, TriangleGrid grid) {
  KernelField out(grid);
  out.e11 = sigma_tilde(pair, 1, grid);
  out.e22 = sigma_tilde(pair, 2, grid);
  return out;
}

KernelField apply_T_matrix(const ProductIntegrator& t1,
                           const ProductIntegrator& t2, const KernelField& f) {
  KernelField out(f.grid());
  out.e11 = t1.apply(f.e21);
  out.e12 = t1.apply(f.e22);
  out.e21 = t2.apply(f.e11);
  out.e22 = t2.apply(f.e12);
  for (auto* field : {&out.e11, &out.e12, &out.e21, &out.e22})
    for (auto& z : field->v) z = -z;
  return out;
}

KernelField build_N(const PotentialPair& pair, TriangleGrid grid) {
  KernelField n = build_J_tilde(pair, grid);
  const ProductIntegrator t1(pair.sigma1, grid);
  const ProductIntegrator t2(pair.sigma2, grid);
  KernelField tj = apply_T_matrix(t1, t2, n);
  n.add(tj);
  return n;
}

double b_norm(const ScalarField& f, double r) {
  if (!(r >= 1.0)) throw DomainError("b_norm needs r >= 1");
  const int M = f.grid.M;
  const double h = f.grid.h();
  double best = 0.0;
  for (int i = 1; i <= M; ++i) {
    double s = 0.0;
    for (int j = 0; j <= i; ++j) {
      const double w = (j == 0 || j == i) ? 0.5 : 1.0;
      s += w * std::pow(std::abs(f.at(i, j)), r);
    }
    best = std::max(best, std::pow(h * s, 1.0 / r));
  }
  return best;
}

double mb_norm(const KernelField& f, double r) {
  return b_norm(f.e11, r) + b_norm(f.e12, r) + b_norm(f.e21, r) +
         b_norm(f.e22, r);
}

// ---------------------------------------------------------------------------
// Neumann series

namespace {

double factorial_tail(double a, int k) {
  // a^{k+1} / (k+1)!
  double v = 1.0;
  for (int m = 1; m <= k + 1; ++m) v *= a / m;
  return v;
}

}  // namespace

std::pair<KernelField, NeumannReport> neumann_solve(const PotentialPair& pair,
                                                    TriangleGrid grid,
                                                    double tail_tol) {
  if (!pair.constants_derived)
    throw DomainError("neumann_solve: derive_constants first");
  if (!(tail_tol > 0.0)) throw DomainError("neumann_solve: tail_tol > 0");

  KernelField jt = build_J_tilde(pair, grid);
  NeumannReport rep;
  rep.j_tilde_norm = mb_norm(jt, pair.r);
  if (rep.j_tilde_norm == 0.0) {
    rep.terms = 0;
    return {std::move(jt), rep};
  }

  const ProductIntegrator t1(pair.sigma1, grid);
  const ProductIntegrator t2(pair.sigma2, grid);
  const double prefactor = (1.0 + pair.a0) * std::exp(pair.a) * rep.j_tilde_norm;

  // pair term k: T^{2k}(I + T) J~, covering powers 2k and 2k+1
  KernelField term = jt;
  term.add(apply_T_matrix(t1, t2, jt));
  KernelField q = term;
  for (int k = 0;; ++k) {
    rep.terms = 2 * k + 2;
    rep.tail_bound = prefactor * factorial_tail(pair.a, k);
    rep.last_term_norm = mb_norm(term, pair.r);
    if (rep.tail_bound < tail_tol) break;
    if (rep.terms >= 1024)
      throw NumericalError("neumann_solve: term budget exhausted before tail tolerance");
    term = apply_T_matrix(t1, t2, apply_T_matrix(t1, t2, term));
    q.add(term);
  }
  return {std::move(q), rep};
}

double fixed_point_residual(const PotentialPair& pair, const KernelField& q,
                            double r) {
  const TriangleGrid grid = q.grid();
  const ProductIntegrator t1(pair.sigma1, grid);
  const ProductIntegrator t2(pair.sigma2, grid);
  KernelField res = build_J_tilde(pair, grid);
  res.add(apply_T_matrix(t1, t2, q));
  for (std::size_t k = 0; k < res.e11.v.size(); ++k) {
    res.e11.v[k] -= q.e11.v[k];
    res.e12.v[k] -= q.e12.v[k];
    res.e21.v[k] -= q.e21.v[k];
    res.e22.v[k] -= q.e22.v[k];
  }
  return mb_norm(res, r);
}

KernelWorkspace build_workspace(const PotentialPair& pair, int M,
                                double tail_tol) {
  TriangleGrid grid(M);
  KernelWorkspace ws(grid);
  ws.sig1t = sigma_tilde(pair, 1, grid);
  ws.sig2t = sigma_tilde(pair, 2, grid);
  ws.Jt = KernelField(grid);
  ws.Jt.e11 = ws.sig1t;
  ws.Jt.e22 = ws.sig2t;
  const ProductIntegrator t1(pair.sigma1, grid);
  const ProductIntegrator t2(pair.sigma2, grid);
  ws.TJt = apply_T_matrix(t1, t2, ws.Jt);
  ws.T2Jt = apply_T_matrix(t1, t2, ws.TJt);
  ws.T3Jt = apply_T_matrix(t1, t2, ws.T2Jt);
  ws.N = ws.Jt;
  ws.N.add(ws.TJt);
  auto [q, rep] = neumann_solve(pair, grid, tail_tol);
  ws.Q = std::move(q);
  ws.report = rep;
  return ws;
}

}  // namespace dirac
