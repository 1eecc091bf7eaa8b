#include "dirac/remainders.hpp"

#include <algorithm>
#include <cmath>

namespace dirac {

namespace {

struct PrefixSet {
  OscTransform p1m, p1p, p2m, p2p;  // sigma_j against e^{-+2i mu t}

  PrefixSet(const PotentialPair& pair, Complex mu, int M)
      : p1m(prefix_transform(pair.sigma1, -2.0 * mu, M)),
        p1p(prefix_transform(pair.sigma1, 2.0 * mu, M)),
        p2m(prefix_transform(pair.sigma2, -2.0 * mu, M)),
        p2p(prefix_transform(pair.sigma2, 2.0 * mu, M)) {}

  double gamma0_node(int i) const {
    return std::abs(p1m.at_node(i)) + std::abs(p1p.at_node(i)) +
           std::abs(p2m.at_node(i)) + std::abs(p2p.at_node(i));
  }
};

// trapezoid L_q norm in x over [0,1] of grid samples; sup when q = inf
double grid_lq_norm(const std::vector<double>& g, double q) {
  const std::size_t n = g.size();
  if (std::isinf(q) || q > 300.0) {
    double m = 0.0;
    for (double v : g) m = std::max(m, v);
    return m;
  }
  const double h = 1.0 / static_cast<double>(n - 1);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
    acc += w * std::pow(g[i], q);
  }
  return std::pow(h * acc, 1.0 / q);
}

double transform_lq_norm(const OscTransform& t, double q) {
  std::vector<double> mags(t.prefix.size());
  for (std::size_t i = 0; i < mags.size(); ++i) mags[i] = std::abs(t.prefix[i]);
  return grid_lq_norm(mags, q);
}

// exact sigma0 moments against the piecewise-linear interpolant of g
double sigma0_product_integral(const Potential& sigma0,
                               const std::vector<double>& g) {
  const int M = static_cast<int>(g.size()) - 1;
  const double h = 1.0 / M;
  double acc = 0.0;
  const auto& breaks = sigma0.breakpoints();
  for (int k = 0; k < M; ++k) {
    const double sa = k * h, sb = (k + 1) * h;
    Complex A{}, B{};
    std::size_t seg = sigma0.segment_index(sa);
    double lo = sa;
    while (lo < sb - 1e-16) {
      const double hi = std::min(sb, breaks[seg + 1]);
      const Poly& p = sigma0.segment_poly(seg);
      A += p.integral(lo, hi);
      B += p.times_t().integral(lo, hi);
      lo = hi;
      ++seg;
      if (seg >= sigma0.segment_count()) break;
    }
    const double w0 = ((sb * A - B) / h).real();
    const double w1 = ((B - sa * A) / h).real();
    acc += w0 * g[static_cast<std::size_t>(k)] +
           w1 * g[static_cast<std::size_t>(k) + 1];
  }
  return acc;
}

}  // namespace

RemainderProfile remainder_profile(const PotentialPair& pair, Complex mu,
                                   int M, double d) {
  if (!pair.constants_derived)
    throw DomainError("remainder_profile: derive_constants first");
  RemainderProfile out;
  out.mu = mu;
  out.grid_m = M;
  out.a0 = pair.a0;
  out.a1 = pair.a1;
  out.a2 = pair.a2;
  out.ta0 = pair.ta0;
  out.ta = pair.ta;
  out.d = d;

  const PrefixSet px(pair, mu, M);
  out.gamma0.resize(static_cast<std::size_t>(M) + 1);
  for (int i = 0; i <= M; ++i)
    out.gamma0[static_cast<std::size_t>(i)] = px.gamma0_node(i);

  out.Gamma = transform_lq_norm(px.p1m, std::numeric_limits<double>::infinity()) +
              transform_lq_norm(px.p1p, std::numeric_limits<double>::infinity()) +
              transform_lq_norm(px.p2m, std::numeric_limits<double>::infinity()) +
              transform_lq_norm(px.p2p, std::numeric_limits<double>::infinity());
  if (pair.p == 1.0) {
    out.gamma = out.Gamma;
  } else {
    out.gamma = transform_lq_norm(px.p1m, pair.q) +
                transform_lq_norm(px.p1p, pair.q) +
                transform_lq_norm(px.p2m, pair.q) +
                transform_lq_norm(px.p2p, pair.q);
  }

  std::vector<double> g0sq(out.gamma0.size());
  for (std::size_t i = 0; i < g0sq.size(); ++i)
    g0sq[i] = out.gamma0[i] * out.gamma0[i];
  out.gamma1 = sigma0_product_integral(pair.sigma0, g0sq);
  out.gamma2 = pair.a2 * pair.a2 * out.gamma * out.gamma + pair.a1 * out.gamma1;
  return out;
}

double gamma0_at(const PotentialPair& pair, Complex mu, double x) {
  auto piece = [&](const Potential& s, Complex omega) {
    return std::abs(osc_potential_integral(s, omega, 0.0, x));
  };
  return piece(pair.sigma1, -2.0 * mu) + piece(pair.sigma1, 2.0 * mu) +
         piece(pair.sigma2, -2.0 * mu) + piece(pair.sigma2, 2.0 * mu);
}

double RemainderMargins::min_margin() const {
  return std::min({est_im0, est_im100, est_im1, est_im3_n2, est_im3_n3,
                   gs1_gamma0, gs1_gamma0_lq, gs1_gamma, g21_static,
                   g21_gamma});
}

RemainderMargins remainder_margins(const PotentialPair& pair,
                                   const KernelWorkspace& ws, Complex mu,
                                   double d) {
  const int M = ws.grid.M;
  const double h = ws.grid.h();
  const Complex wm = -2.0 * mu, wp = 2.0 * mu;
  const RemainderProfile prof = remainder_profile(pair, mu, M, d);

  // sup over grid rows of |int_0^x weight * field| per entry
  auto row_sup = [&](const ScalarField& f, Complex omega) {
    double s = 0.0;
    for (int i = 1; i <= M; ++i)
      s = std::max(s, std::abs(gridded_osc_integral(f.row(i), h, omega)));
    return s;
  };

  RemainderMargins m;
  m.mu = mu;
  const double e2d = std::exp(2.0 * d);

  const double lhs0 = row_sup(ws.Jt.e11, wm) + row_sup(ws.Jt.e22, wp);
  const double rhs0 = 2.0 * e2d * pair.ta0 * prof.gamma;
  m.est_im0 = rhs0 - lhs0;

  const double lhs100 = row_sup(ws.TJt.e12, wm) + row_sup(ws.TJt.e21, wp);
  const double rhs100 = 2.0 * std::exp(4.0 * d) * pair.ta0 * pair.ta0 * prof.gamma;
  m.est_im100 = rhs100 - lhs100;

  // pointwise in x, matrix weight: row 1 against e^{-2i mu t}, row 2 against
  // e^{+2i mu t}
  double worst1 = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= M; ++i) {
    const double lhs =
        std::abs(gridded_osc_integral(ws.TJt.e12.row(i), h, wm)) +
        std::abs(gridded_osc_integral(ws.TJt.e21.row(i), h, wp));
    const double rhs =
        2.0 * (pair.a2 + 1.0) * e2d *
        (prof.gamma * prof.gamma0[static_cast<std::size_t>(i)] + prof.gamma1);
    worst1 = std::min(worst1, rhs - lhs);
  }
  m.est_im1 = worst1;

  const double lhs3n2 = row_sup(ws.T2Jt.e11, wm) + row_sup(ws.T2Jt.e22, wp);
  const double rhs3n2 = 2.0 * std::exp(4.0 * d) * prof.gamma2;
  m.est_im3_n2 = rhs3n2 - lhs3n2;

  const double lhs3n3 = row_sup(ws.T3Jt.e12, wm) + row_sup(ws.T3Jt.e21, wp);
  const double rhs3n3 = 2.0 * std::exp(6.0 * d) * pair.a1 * prof.gamma2;
  m.est_im3_n3 = rhs3n3 - lhs3n3;

  const double g0sup =
      *std::max_element(prof.gamma0.begin(), prof.gamma0.end());
  m.gs1_gamma0 = 2.0 * e2d * pair.a1 - g0sup;
  m.gs1_gamma0_lq = prof.gamma - grid_lq_norm(prof.gamma0, pair.q);
  m.gs1_gamma = 2.0 * e2d * pair.a1 - prof.gamma;

  const double a1sq = pair.a1 * pair.a1;
  m.g21_static =
      4.0 * std::exp(4.0 * d) * a1sq * (pair.a2 + a1sq) - prof.gamma2;
  const double s0p = pair.sigma0.lp_norm(pair.p);
  m.g21_gamma = 2.0 * pair.a1 * e2d * (pair.a2 + 2.0 * pair.a1 * e2d * s0p) *
                    prof.gamma -
                prof.gamma2;

  m.scale = std::max({rhs0, rhs100, rhs3n2, rhs3n3, 2.0 * e2d * pair.a1,
                      4.0 * std::exp(4.0 * d) * a1sq * (pair.a2 + a1sq), 1.0});
  return m;
}

bool AsimpReport::all_nonnegative(double tol_per_scale) const {
  for (const auto& m : entries)
    if (m.min_margin() < -tol_per_scale * m.scale) return false;
  return true;
}

double AsimpReport::worst_relative_margin() const {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& m : entries)
    worst = std::min(worst, m.min_margin() / m.scale);
  return worst;
}

AsimpReport verify_asimp(const PotentialPair& pair, const KernelWorkspace& ws,
                         const std::vector<Complex>& mu_sweep, double d) {
  AsimpReport rep;
  rep.entries.reserve(mu_sweep.size());
  for (Complex mu : mu_sweep)
    rep.entries.push_back(remainder_margins(pair, ws, mu, d));
  return rep;
}

std::pair<double, double> gamma_and_Gamma(const PotentialPair& pair,
                                          Complex mu, int M) {
  const RemainderProfile prof = remainder_profile(pair, mu, M, 0.0);
  return {prof.gamma, prof.Gamma};
}

}  // namespace dirac
