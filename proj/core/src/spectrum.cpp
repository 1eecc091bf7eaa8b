#include "dirac/spectrum.hpp"

#include <algorithm>
#include <cmath>

#include "dirac/remainders.hpp"

namespace dirac {

Complex char_fn_direct(const PotentialPair& pair, Complex mu, double ode_tol) {
  const std::vector<Mat2> d =
      solve_direct_at(pair, mu, std::vector<double>{1.0}, ode_tol);
  const Mat2& m = d.front();
  return m.m11 + m.m12 - m.m21 - m.m22;
}

Complex char_fn_kernel(const PotentialPair& pair, const KernelField& q,
                       Complex mu) {
  const int M = q.grid().M;
  const double h = q.grid().h();
  const Complex wm = -2.0 * mu, wp = 2.0 * mu;
  const Complex ep = std::exp(kI * mu), em = std::exp(-kI * mu);
  const Complex row1 = gridded_osc_integral(q.e11.row(M), h, wm) +
                       gridded_osc_integral(q.e12.row(M), h, wm) -
                       osc_potential_integral(pair.sigma1, wm, 0.0, 1.0);
  const Complex row2 = gridded_osc_integral(q.e21.row(M), h, wp) +
                       gridded_osc_integral(q.e22.row(M), h, wp) -
                       osc_potential_integral(pair.sigma2, wp, 0.0, 1.0);
  return 2.0 * kI * std::sin(mu) + ep * row1 - em * row2;
}

// ---------------------------------------------------------------------------
// Asymptotic eigenvalue terms

Complex asymptotic_mu0(const PotentialPair& pair, int n,
                       Mu0Convention convention) {
  if (n == 0) throw DomainError("asymptotic_mu0: n must be nonzero");
  const double w = 2.0 * kPi * n;
  const Complex f1 =
      osc_potential_integral(pair.sigma1, Complex{-w, 0.0}, 0.0, 1.0);
  const Complex f2 =
      osc_potential_integral(pair.sigma2, Complex{w, 0.0}, 0.0, 1.0);
  const Complex half_i = 1.0 / (2.0 * kI);
  if (convention == Mu0Convention::oracle) {
    const Complex di = triangle_double_integral(pair.sigma2, pair.sigma1,
                                                Complex{w, 0.0},
                                                Complex{-w, 0.0});
    return half_i * (f1 - f2) - kI * di;
  }
  const double sn = (n % 2 == 0) ? 1.0 : -1.0;  // (-1)^n
  const Complex di = triangle_double_integral(pair.sigma1, pair.sigma2,
                                              Complex{-w, 0.0},
                                              Complex{w, 0.0});
  return sn * half_i * f1 - sn * half_i * f2 - kI * di;
}

Complex simplified_mu0(const PotentialPair& pair, int n,
                       Mu0Convention convention) {
  if (n == 0) throw DomainError("simplified_mu0: n must be nonzero");
  if (!(pair.p > 1.0 && pair.p <= 4.0 / 3.0))
    throw DomainError("simplified_mu0 needs 1 < p <= 4/3");
  const double w = 2.0 * kPi * n;
  const Complex f1 =
      osc_potential_integral(pair.sigma1, Complex{-w, 0.0}, 0.0, 1.0);
  const Complex f2 =
      osc_potential_integral(pair.sigma2, Complex{w, 0.0}, 0.0, 1.0);
  const Complex half_i = 1.0 / (2.0 * kI);
  if (convention == Mu0Convention::oracle) return half_i * (f1 - f2);
  const double sn1 = (n % 2 == 0) ? -1.0 : 1.0;  // (-1)^{n+1}
  return sn1 * half_i * (-f1 + f2);
}

// ---------------------------------------------------------------------------
// Localization

namespace {

Complex refine_direct(const PotentialPair& pair, Complex start, double tol,
                      double ode_tol, int& iters, double& residual) {
  auto phi = [&](Complex mu) { return char_fn_direct(pair, mu, ode_tol); };
  Complex x0 = start;
  Complex x1 = start + Complex{1e-6 * (1.0 + std::abs(start)), 0.0};
  Complex f0 = phi(x0), f1 = phi(x1);
  for (int it = 0; it < 12; ++it) {
    if (f1 == f0) break;
    const Complex dx = -f1 * (x1 - x0) / (f1 - f0);
    x0 = x1;
    f0 = f1;
    x1 = x1 + dx;
    f1 = phi(x1);
    ++iters;
    if (std::abs(dx) < tol) break;
  }
  residual = std::abs(f1);
  return x1;
}

}  // namespace

std::vector<EigenRecord> locate_eigenvalues(const PotentialPair& pair,
                                            const KernelWorkspace& ws,
                                            int n_lo, int n_hi,
                                            const LocateOptions& opts) {
  if (n_hi < n_lo) throw DomainError("locate_eigenvalues: empty n range");
  const int count = n_hi - n_lo + 1;
  std::vector<EigenRecord> records(static_cast<std::size_t>(count));
  const int gamma_grid = opts.gamma_grid > 0 ? opts.gamma_grid : ws.grid.M;

  auto phik = [&](Complex mu) { return char_fn_kernel(pair, ws.Q, mu); };

  parallel_for(
      static_cast<std::size_t>(count), opts.threads,
      [&](std::size_t slot) {
        const int n = n_lo + static_cast<int>(slot);
        EigenRecord rec;
        rec.n = n;
        const double center = kPi * n;

        SearchBox box;
        box.center = Complex{center, 0.0};
        box.half_width = opts.box_half_width;
        box.half_height = 2.0 * opts.d;
        box.boundary_samples = opts.boundary_samples;

        const Complex mu0_guess =
            n != 0 ? asymptotic_mu0(pair, n, Mu0Convention::oracle) : Complex{};

        auto count_with_retries = [&](SearchBox b) {
          for (int attempt = 0; attempt < 4; ++attempt) {
            try {
              return std::pair{winding_count(phik, b), b};
            } catch (const BoundaryZeroError&) {
              b.half_width *= 0.985;  // a zero grazes the contour
              b.half_height *= 1.01;
            }
          }
          throw NumericalError(
              "locate_eigenvalues: could not sample box at n=" +
              std::to_string(n));
        };

        auto [winding, used] = count_with_retries(box);
        box = used;
        if (winding == 0) {
          SearchBox wide = box;
          wide.half_width = std::min(0.49, box.half_width * 1.1);
          wide.half_height = box.half_height * 1.5;
          std::tie(winding, box) = count_with_retries(wide);
        }
        if (winding == 0 && n != 0) {
          // large first-correction displacement: recenter at the prediction
          SearchBox shifted = box;
          const double shift = std::clamp(mu0_guess.real(),
                                          -(kPi / 2.0 - box.half_width - 0.01),
                                          kPi / 2.0 - box.half_width - 0.01);
          shifted.center = Complex{center + shift, 0.0};
          std::tie(winding, box) = count_with_retries(shifted);
        }
        rec.box_winding = winding;
        if (winding != 1)
          throw NumericalError(
              "locate_eigenvalues: box at n=" + std::to_string(n) +
              " contains " + std::to_string(winding) +
              " zeros (split/shift required)");

        Complex start = box.center;
        if (n != 0) {
          const Complex predicted = Complex{center, 0.0} + mu0_guess;
          if (box.contains(predicted, -0.1 * box.half_width)) start = predicted;
        }
        PolishResult pol = root_polish(phik, start, opts.root_tol, box);
        rec.mu = pol.root;
        rec.iterations = pol.iterations;
        rec.phi_residual = pol.residual;

        if (opts.direct_refine) {
          double res = 0.0;
          rec.mu = refine_direct(pair, rec.mu, opts.root_tol, opts.ode_tol,
                                 rec.iterations, res);
          rec.phi_residual = res;
        }

        if (n != 0) {
          rec.mu0_paper = asymptotic_mu0(pair, n, Mu0Convention::paper);
          rec.mu0_oracle = mu0_guess;
        }
        rec.rho = rec.mu - Complex{center, 0.0} - rec.mu0_oracle;
        const auto [g, G] =
            gamma_and_Gamma(pair, Complex{center, 0.0}, gamma_grid);
        rec.gamma_pin = g;
        rec.Gamma_pin = G;
        records[slot] = rec;
      });
  return records;
}

// ---------------------------------------------------------------------------
// Decay diagnostics

DecayReport decay_report(const std::vector<EigenRecord>& records,
                         const PotentialPair& pair) {
  DecayReport rep;
  rep.p = pair.p;
  rep.q = pair.q;
  std::vector<const EigenRecord*> pos;
  for (const auto& r : records)
    if (r.n >= 1) pos.push_back(&r);
  std::sort(pos.begin(), pos.end(),
            [](const EigenRecord* a, const EigenRecord* b) { return a->n < b->n; });
  double s = 0.0;
  for (const EigenRecord* r : pos) {
    rep.n.push_back(r->n);
    const double rho = std::abs(r->rho);
    rep.rho_abs.push_back(rho);
    rep.gamma_pin.push_back(r->gamma_pin);
    rep.Gamma_pin.push_back(r->Gamma_pin);
    if (pair.p > 1.0) {
      s += std::pow(rho, pair.q / 2.0);
      rep.partial_sums.push_back(s);
    }
    rep.ratio.push_back(r->Gamma_pin > 0.0
                            ? rho / (r->Gamma_pin * r->Gamma_pin)
                            : 0.0);
  }
  return rep;
}

std::vector<double> dyadic_block_medians(const std::vector<int>& n,
                                         const std::vector<double>& values,
                                         int start) {
  std::vector<double> medians;
  for (int lo = start;; lo *= 2) {
    std::vector<double> block;
    for (std::size_t k = 0; k < n.size(); ++k)
      if (n[k] >= lo && n[k] < 2 * lo) block.push_back(values[k]);
    if (block.empty()) break;
    std::sort(block.begin(), block.end());
    const std::size_t m = block.size();
    medians.push_back(m % 2 == 1
                          ? block[m / 2]
                          : 0.5 * (block[m / 2 - 1] + block[m / 2]));
  }
  return medians;
}

// ---------------------------------------------------------------------------
// Eigenfunctions

EigenfunctionSample eigenfunction(const PotentialPair& pair,
                                  const EigenRecord& record, int M,
                                  double ode_tol) {
  const FundamentalSample d = solve_direct(pair, record.mu, M, ode_tol);
  EigenfunctionSample out;
  out.n = record.n;
  out.mu = record.mu;
  out.x = d.x;
  out.y1.resize(d.values.size());
  out.y2.resize(d.values.size());
  for (std::size_t k = 0; k < d.values.size(); ++k) {
    out.y1[k] = d.values[k].m11 + d.values[k].m12;
    out.y2[k] = d.values[k].m21 + d.values[k].m22;
  }
  out.boundary_residual = std::abs(out.y1.back() - out.y2.back());
  return out;
}

double eigenfunction_ode_residual(const PotentialPair& pair,
                                  const EigenRecord& record, double ode_tol) {
  const int M = std::max(
      512, 16 * static_cast<int>(std::ceil(1.0 + std::abs(record.mu))));
  const FundamentalSample d = solve_direct(pair, record.mu, M, ode_tol);
  const double h = 1.0 / M;
  std::vector<double> breaks = merge_breakpoints(pair.sigma1.breakpoints(),
                                                 pair.sigma2.breakpoints());
  std::vector<Complex> y1(d.values.size()), y2(d.values.size());
  for (std::size_t k = 0; k < d.values.size(); ++k) {
    y1[k] = d.values[k].m11 + d.values[k].m12;
    y2[k] = d.values[k].m21 + d.values[k].m22;
  }
  auto window_clean = [&](std::size_t k) {
    const double lo = d.x[k - 3] - 1e-14, hi = d.x[k + 3] + 1e-14;
    auto it = std::lower_bound(breaks.begin(), breaks.end(), lo);
    for (; it != breaks.end() && *it <= hi; ++it)
      if (*it > lo + 2e-14 && *it < hi - 2e-14) return false;
    return true;
  };
  auto stencil = [&](const std::vector<Complex>& y, std::size_t k) {
    return (-y[k - 3] + 9.0 * y[k - 2] - 45.0 * y[k - 1] + 45.0 * y[k + 1] -
            9.0 * y[k + 2] + y[k + 3]) /
           (60.0 * h);
  };
  const Complex imu = kI * record.mu;
  double worst = 0.0;
  for (std::size_t k = 3; k + 3 < d.x.size(); ++k) {
    if (!window_clean(k)) continue;
    const Complex s1 = pair.sigma1.eval(d.x[k]);
    const Complex s2 = pair.sigma2.eval(d.x[k]);
    const Complex r1 = stencil(y1, k) - (imu * y1[k] - s1 * y2[k]);
    const Complex r2 = stencil(y2, k) - (-s2 * y1[k] - imu * y2[k]);
    worst = std::max({worst, std::abs(r1), std::abs(r2)});
  }
  return worst;
}

EigenfunctionSample asymptotic_eigenfunction_full(const PotentialPair& pair,
                                                  const KernelWorkspace& ws,
                                                  const EigenRecord& record,
                                                  int M) {
  if (!(pair.p > 1.0 && pair.p < 2.0))
    throw DomainError("asymptotic_eigenfunction_full needs 1 < p < 2");
  const int mq = ws.grid.M;
  if (M < 2 || mq % M != 0)
    throw DomainError("asymptotic_eigenfunction_full: grid mismatch");
  const int stride = mq / M;
  const double h = ws.grid.h();
  const int n = record.n;
  const double w = 2.0 * kPi * n;
  const Complex wm{-w, 0.0}, wp{w, 0.0};
  const Complex mu0 = record.mu0_oracle;

  const OscTransform p1 = prefix_transform(pair.sigma1, wm, mq);
  const OscTransform p1t = prefix_transform(pair.sigma1.times_t(), wm, mq);
  const OscTransform p2 = prefix_transform(pair.sigma2, wp, mq);
  const OscTransform p2t = prefix_transform(pair.sigma2.times_t(), wp, mq);

  EigenfunctionSample out;
  out.n = n;
  out.mu = record.mu;
  out.x.resize(static_cast<std::size_t>(M) + 1);
  out.y1.resize(out.x.size());
  out.y2.resize(out.x.size());
  for (int i = 0; i <= M; ++i) {
    const double x = static_cast<double>(i) / M;
    const int row = i * stride;
    // F1 = -sigma1 + sigma~1 - T_{s1} sigma~2, and TJt.e12 = -T_{s1} sigma~2
    const Complex i1 = -p1.at_node(row) +
                       gridded_osc_integral(ws.sig1t.row(row), h, wm) +
                       gridded_osc_integral(ws.TJt.e12.row(row), h, wm);
    const Complex i1t = -p1t.at_node(row) +
                        gridded_osc_integral_tweighted(ws.sig1t.row(row), h, wm) +
                        gridded_osc_integral_tweighted(ws.TJt.e12.row(row), h, wm);
    const Complex i2 = -p2.at_node(row) +
                       gridded_osc_integral(ws.sig2t.row(row), h, wp) +
                       gridded_osc_integral(ws.TJt.e21.row(row), h, wp);
    const Complex i2t = -p2t.at_node(row) +
                        gridded_osc_integral_tweighted(ws.sig2t.row(row), h, wp) +
                        gridded_osc_integral_tweighted(ws.TJt.e21.row(row), h, wp);
    const Complex ep = std::exp(kI * (kPi * n) * x);
    const Complex em = std::exp(-kI * (kPi * n) * x);
    out.x[static_cast<std::size_t>(i)] = x;
    out.y1[static_cast<std::size_t>(i)] =
        ep * (1.0 + kI * mu0 * x) * (1.0 + i1) - 2.0 * kI * mu0 * ep * i1t;
    out.y2[static_cast<std::size_t>(i)] =
        em * (1.0 - kI * mu0 * x) * (1.0 + i2) + 2.0 * kI * mu0 * em * i2t;
  }
  out.boundary_residual = std::abs(out.y1.back() - out.y2.back());
  return out;
}

EigenfunctionSample asymptotic_eigenfunction_short(const PotentialPair& pair,
                                                   const EigenRecord& record,
                                                   int M) {
  const int n = record.n;
  const double w = 2.0 * kPi * n;
  const Complex wm{-w, 0.0}, wp{w, 0.0};
  const Complex mu0 = record.mu0_oracle;

  const OscTransform p1 = prefix_transform(pair.sigma1, wm, M);
  const OscTransform p2 = prefix_transform(pair.sigma2, wp, M);
  const std::vector<Complex> w1 =
      triangle_double_integral_prefix(pair.sigma1, pair.sigma2, wm, wp, M);
  const std::vector<Complex> w2 =
      triangle_double_integral_prefix(pair.sigma2, pair.sigma1, wp, wm, M);

  EigenfunctionSample out;
  out.n = n;
  out.mu = record.mu;
  out.x.resize(static_cast<std::size_t>(M) + 1);
  out.y1.resize(out.x.size());
  out.y2.resize(out.x.size());
  for (int i = 0; i <= M; ++i) {
    const double x = static_cast<double>(i) / M;
    const std::size_t k = static_cast<std::size_t>(i);
    const Complex ep = std::exp(kI * (kPi * n) * x);
    const Complex em = std::exp(-kI * (kPi * n) * x);
    out.x[k] = x;
    out.y1[k] = ep * (1.0 + kI * mu0 * x - p1.at_node(i) + w1[k]);
    out.y2[k] = em * (1.0 - kI * mu0 * x - p2.at_node(i) + w2[k]);
  }
  out.boundary_residual = std::abs(out.y1.back() - out.y2.back());
  return out;
}

double eigenfunction_sup_distance(const EigenfunctionSample& a,
                                  const EigenfunctionSample& b) {
  if (a.x.size() != b.x.size())
    throw DomainError("eigenfunction_sup_distance: grids differ");
  double d = 0.0;
  for (std::size_t k = 0; k < a.x.size(); ++k)
    d = std::max({d, std::abs(a.y1[k] - b.y1[k]), std::abs(a.y2[k] - b.y2[k])});
  return d;
}

}  // namespace dirac
