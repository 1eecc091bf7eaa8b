#include "dirac/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "dirac/quadrature.hpp"

namespace dirac {

// ---------------------------------------------------------------------------
// Oscillatory segment integrals

namespace {

Complex osc_series(const Poly& poly, Complex omega, double a, double b) {
  // expand about the midpoint: exp(i w c) * sum_m (i w)^m/m! mom_m,
  // mom_m = integral_{-h}^{h} u^m q(u) du with q(u) = poly(c + u)
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const Poly q = poly.shifted(c);
  double qscale = 0.0;
  double hk = 1.0;
  for (const auto& qc : q.c) {
    qscale += std::abs(qc) * hk;
    hk *= h;
  }
  Complex acc{};
  Complex factor{1.0, 0.0};  // (i w)^m / m!
  const Complex iw = kI * omega;
  double hm = h;  // h^{m+1}
  for (int m = 0; m < 64; ++m) {
    Complex mom{};
    for (std::size_t k = 0; k < q.c.size(); ++k) {
      const int e = m + static_cast<int>(k);
      if (e % 2 != 0) continue;
      mom += q.c[k] * (2.0 * std::pow(h, e + 1) / (e + 1));
    }
    acc += factor * mom;
    factor *= iw / static_cast<double>(m + 1);
    hm *= h;
    // remaining-tail bound: |factor| * 2 h^{m+2} qscale (rapidly decreasing)
    if (m >= 4 && std::abs(factor) * 2.0 * hm * qscale <
                      1e-18 * (std::abs(acc) + 2.0 * h * qscale + 1e-300))
      break;
  }
  return std::exp(kI * omega * c) * acc;
}

Complex osc_ibp(const Poly& poly, Complex omega, double a, double b) {
  // I_k = [t^k e^{iwt}/(iw)]_a^b - (k/(iw)) I_{k-1}
  const Complex iw = kI * omega;
  const Complex ea = std::exp(iw * a), eb = std::exp(iw * b);
  Complex acc{};
  Complex ik{};
  double apow = 1.0, bpow = 1.0;
  for (int k = 0; k <= poly.degree(); ++k) {
    if (k == 0) {
      ik = (eb - ea) / iw;
    } else {
      apow *= a;
      bpow *= b;
      ik = (bpow * eb - apow * ea - static_cast<double>(k) * ik) / iw;
    }
    acc += poly.c[static_cast<std::size_t>(k)] * ik;
  }
  return acc;
}

}  // namespace

Complex osc_segment_integral(const Poly& poly, Complex omega, double a,
                             double b) {
  if (poly.c.empty() || a == b) return {};
  if (omega == Complex{}) return poly.integral(a, b);
  const double z = std::abs(omega) * std::abs(b - a);
  if (z <= 8.0) return osc_series(poly, omega, a, b);
  return osc_ibp(poly, omega, a, b);
}

Complex osc_potential_integral(const Potential& pot, Complex omega, double a,
                               double b) {
  if (a > b) return -osc_potential_integral(pot, omega, b, a);
  const auto& breaks = pot.breakpoints();
  Complex acc{};
  std::size_t k = pot.segment_index(a);
  double lo = a;
  while (lo < b) {
    const double hi = std::min(b, breaks[k + 1]);
    acc += osc_segment_integral(pot.segment_poly(k), omega, lo, hi);
    lo = hi;
    ++k;
    if (k >= pot.segment_count()) break;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Prefix transforms

OscTransform prefix_transform(const Potential& pot, Complex omega, int M) {
  if (M < 2) throw DomainError("prefix_transform needs M >= 2");
  OscTransform out;
  out.source = pot;
  out.omega = omega;
  out.grid_m = M;
  out.prefix.assign(static_cast<std::size_t>(M) + 1, Complex{});
  const auto& breaks = pot.breakpoints();
  Complex acc{};
  std::size_t seg = 0;
  double lo = 0.0;
  for (int i = 1; i <= M; ++i) {
    const double node = static_cast<double>(i) / M;
    while (seg < pot.segment_count() && breaks[seg + 1] < node - 1e-15) {
      acc += osc_segment_integral(pot.segment_poly(seg), omega, lo,
                                  breaks[seg + 1]);
      lo = breaks[seg + 1];
      ++seg;
    }
    acc += osc_segment_integral(pot.segment_poly(seg), omega, lo, node);
    lo = node;
    out.prefix[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

Complex OscTransform::value_at(double x) const {
  if (x < 0.0 || x > 1.0)
    throw DomainError("OscTransform evaluated outside [0,1]");
  const int i = std::min(grid_m, static_cast<int>(std::floor(x * grid_m)));
  const double node = static_cast<double>(i) / grid_m;
  Complex acc = prefix[static_cast<std::size_t>(i)];
  if (x > node) acc += osc_potential_integral(source, omega, node, x);
  return acc;
}

// ---------------------------------------------------------------------------
// Triangle double integrals

ExactPrefix::ExactPrefix(const Potential& g, Complex omega)
    : g_(&g), omega_(omega) {
  const auto& breaks = g.breakpoints();
  at_breaks_.assign(breaks.size(), Complex{});
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k)
    at_breaks_[k + 1] =
        at_breaks_[k] + osc_segment_integral(g.segment_poly(k), omega_,
                                             breaks[k], breaks[k + 1]);
}

Complex ExactPrefix::value(double t) const {
  const std::size_t k = g_->segment_index(t);
  return at_breaks_[k] + osc_segment_integral(g_->segment_poly(k), omega_,
                                              g_->breakpoints()[k], t);
}

namespace {

// adaptive integral of f(t) e^{i w t} G(t) over [lo,hi] within one f-segment
Complex outer_piece(const Poly& fpoly, Complex omega_outer,
                    const ExactPrefix& inner, double lo, double hi,
                    double combined_freq, double abs_tol) {
  QuadOptions opt;
  opt.rel_tol = 1e-10;
  opt.abs_tol = abs_tol;
  opt.initial_splits = std::clamp(
      static_cast<int>(std::ceil(combined_freq * (hi - lo) / kPi)), 1, 4096);
  return integrate(
      [&](double t) {
        return fpoly.eval(t) * std::exp(kI * omega_outer * t) * inner.value(t);
      },
      lo, hi, opt);
}

}  // namespace

Complex triangle_double_integral(const Potential& f, const Potential& g,
                                 Complex omega_outer, Complex omega_inner,
                                 double x_upper) {
  if (x_upper < 0.0 || x_upper > 1.0)
    throw DomainError("triangle_double_integral: x outside [0,1]");
  if (x_upper == 0.0 || f.is_zero() || g.is_zero()) return {};
  ExactPrefix inner(g, omega_inner);
  const double freq = std::abs(omega_outer) + std::abs(omega_inner);
  const auto& breaks = f.breakpoints();
  Complex acc{};
  for (std::size_t k = 0; k < f.segment_count(); ++k) {
    const double lo = breaks[k];
    const double hi = std::min(breaks[k + 1], x_upper);
    if (hi <= lo) break;
    acc += outer_piece(f.segment_poly(k), omega_outer, inner, lo, hi, freq,
                       1e-13);
    if (hi >= x_upper) break;
  }
  return acc;
}

std::vector<Complex> triangle_double_integral_prefix(const Potential& f,
                                                     const Potential& g,
                                                     Complex omega_outer,
                                                     Complex omega_inner,
                                                     int M) {
  std::vector<Complex> out(static_cast<std::size_t>(M) + 1, Complex{});
  if (f.is_zero() || g.is_zero()) return out;
  ExactPrefix inner(g, omega_inner);
  const double freq = std::abs(omega_outer) + std::abs(omega_inner);
  const auto& breaks = f.breakpoints();
  Complex acc{};
  std::size_t seg = 0;
  double lo = 0.0;
  for (int i = 1; i <= M; ++i) {
    const double node = static_cast<double>(i) / M;
    while (seg < f.segment_count() && breaks[seg + 1] < node - 1e-15) {
      acc += outer_piece(f.segment_poly(seg), omega_outer, inner, lo,
                         breaks[seg + 1], freq, 1e-14);
      lo = breaks[seg + 1];
      ++seg;
    }
    acc += outer_piece(f.segment_poly(seg), omega_outer, inner, lo, node, freq,
                       1e-14);
    lo = node;
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gridded product integration

namespace {

struct CellWeights {
  Complex u0, u1;  // plain
  Complex w0, w1;  // extra factor tau (local coordinate)
};

CellWeights cell_weights(double h, Complex omega) {
  CellWeights cw;
  const Poly hat0{1.0, Complex{-1.0 / h}};            // (h - tau)/h, tau in [0,h]
  const Poly hat1{0.0, Complex{1.0 / h}};             // tau/h
  cw.u0 = osc_segment_integral(hat0, omega, 0.0, h);
  cw.u1 = osc_segment_integral(hat1, omega, 0.0, h);
  cw.w0 = osc_segment_integral(hat0.times_t(), omega, 0.0, h);
  cw.w1 = osc_segment_integral(hat1.times_t(), omega, 0.0, h);
  return cw;
}

}  // namespace

Complex gridded_osc_integral(std::span<const Complex> f, double h,
                             Complex omega) {
  if (f.size() < 2) return {};
  const CellWeights cw = cell_weights(h, omega);
  const Complex stepe = std::exp(kI * omega * h);
  Complex e{1.0, 0.0};
  Complex acc{};
  for (std::size_t j = 0; j + 1 < f.size(); ++j) {
    acc += e * (cw.u0 * f[j] + cw.u1 * f[j + 1]);
    e *= stepe;
  }
  return acc;
}

Complex gridded_osc_integral_tweighted(std::span<const Complex> f, double h,
                                       Complex omega) {
  if (f.size() < 2) return {};
  const CellWeights cw = cell_weights(h, omega);
  const Complex stepe = std::exp(kI * omega * h);
  Complex e{1.0, 0.0};
  Complex acc{};
  for (std::size_t j = 0; j + 1 < f.size(); ++j) {
    const double tj = h * static_cast<double>(j);
    acc += e * ((tj * cw.u0 + cw.w0) * f[j] + (tj * cw.u1 + cw.w1) * f[j + 1]);
    e *= stepe;
  }
  return acc;
}

std::vector<Complex> gridded_osc_prefix(std::span<const Complex> f, double h,
                                        Complex omega) {
  std::vector<Complex> out(f.size(), Complex{});
  if (f.size() < 2) return out;
  const CellWeights cw = cell_weights(h, omega);
  const Complex stepe = std::exp(kI * omega * h);
  Complex e{1.0, 0.0};
  Complex acc{};
  for (std::size_t j = 0; j + 1 < f.size(); ++j) {
    acc += e * (cw.u0 * f[j] + cw.u1 * f[j + 1]);
    e *= stepe;
    out[j + 1] = acc;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Winding numbers

namespace {

// boundary point for parameter s in [0,4), counterclockwise from bottom-left
Complex boundary_point(const SearchBox& box, double s) {
  const double w = box.half_width, h = box.half_height;
  const Complex bl = box.center + Complex{-w, -h};
  const Complex br = box.center + Complex{w, -h};
  const Complex tr = box.center + Complex{w, h};
  const Complex tl = box.center + Complex{-w, h};
  const int side = static_cast<int>(std::floor(s));
  const double u = s - side;
  switch (side) {
    case 0: return bl + u * (br - bl);
    case 1: return br + u * (tr - br);
    case 2: return tr + u * (tl - tr);
    default: return tl + u * (bl - tl);
  }
}

}  // namespace

int winding_count(const ComplexFn& phi, const SearchBox& box) {
  if (box.half_width <= 0.0 || box.half_height <= 0.0)
    throw DomainError("winding_count: box must have positive extent");
  std::map<double, Complex> samples;
  const int per_side = std::max(8, box.boundary_samples / 4);
  for (int side = 0; side < 4; ++side)
    for (int k = 0; k < per_side; ++k) {
      const double s = side + static_cast<double>(k) / per_side;
      samples[s] = phi(boundary_point(box, s));
    }
  samples[4.0] = samples.begin()->second;  // closed contour

  double scale = 0.0;
  for (const auto& [s, v] : samples) scale = std::max(scale, std::abs(v));
  auto check_zero = [&](Complex v) {
    if (std::abs(v) < 1e-12 * scale)
      throw BoundaryZeroError(
          "winding_count: zero suspected on the box boundary; shift the box");
  };
  for (const auto& [s, v] : samples) check_zero(v);

  const std::size_t budget = 40000;
  for (int pass = 0; pass < 48; ++pass) {
    std::vector<double> to_insert;
    auto it = samples.begin();
    auto prev = it++;
    for (; it != samples.end(); prev = it++) {
      const double da = std::arg(it->second / prev->second);
      if (std::abs(da) >= kPi / 2.0)
        to_insert.push_back(0.5 * (prev->first + it->first));
    }
    if (to_insert.empty()) break;
    if (samples.size() + to_insert.size() > budget)
      throw NumericalError("winding_count: refinement budget exhausted");
    for (double s : to_insert) {
      Complex v = phi(boundary_point(box, std::fmod(s, 4.0)));
      scale = std::max(scale, std::abs(v));
      check_zero(v);
      samples[s] = v;
    }
  }

  double total = 0.0;
  auto it = samples.begin();
  auto prev = it++;
  for (; it != samples.end(); prev = it++)
    total += std::arg(it->second / prev->second);
  const double turns = total / (2.0 * kPi);
  const long w = std::lround(turns);
  if (std::abs(turns - static_cast<double>(w)) > 0.2)
    throw NumericalError("winding_count: non-integer winding after refinement");
  return static_cast<int>(w);
}

// ---------------------------------------------------------------------------
// Root polishing

namespace {

PolishResult secant_run(const ComplexFn& phi, Complex x0, double tol,
                        const SearchBox& box, int max_iter, bool& escaped,
                        int& evals) {
  Complex x1 = x0 + Complex{1e-4 * (1.0 + std::abs(x0)), 0.0};
  Complex f0 = phi(x0), f1 = phi(x1);
  evals += 2;
  PolishResult res;
  escaped = false;
  for (int it = 0; it < max_iter; ++it) {
    if (f1 == f0) {
      x1 += Complex{0.0, 1e-6};
      f1 = phi(x1);
      ++evals;
      continue;
    }
    const Complex dx = -f1 * (x1 - x0) / (f1 - f0);
    const Complex x2 = x1 + dx;
    if (!box.contains(x2, 2.0 * (box.half_width + box.half_height))) {
      escaped = true;
      res.iterations = it + 1;
      return res;
    }
    x0 = x1;
    f0 = f1;
    x1 = x2;
    f1 = phi(x1);
    ++evals;
    if (std::abs(dx) < tol) {
      res.root = x1;
      res.residual = std::abs(f1);
      res.iterations = it + 1;
      return res;
    }
  }
  escaped = true;  // treat non-convergence like an escape
  res.iterations = max_iter;
  return res;
}

}  // namespace

PolishResult root_polish(const ComplexFn& phi, Complex start, double tol,
                         const SearchBox& box) {
  if (!(tol > 0.0)) throw DomainError("root_polish: tol must be positive");
  int evals = 0;
  bool escaped = false;
  PolishResult res = secant_run(phi, start, tol, box, 80, escaped, evals);
  if (!escaped) return res;

  // winding-guided subdivision, then retry from the shrunken box center
  SearchBox sub = box;
  for (int round = 0; round < 60; ++round) {
    if (winding_count(phi, sub) != 1)
      throw NumericalError("root_polish: lost the root during subdivision");
    const bool split_width = sub.half_width >= sub.half_height;
    for (double ratio : {0.5, 0.47, 0.53}) {
      SearchBox lo = sub, hi = sub;
      if (split_width) {
        lo.half_width = sub.half_width * ratio;
        hi.half_width = sub.half_width * (1.0 - ratio);
        lo.center -= Complex{sub.half_width - lo.half_width, 0.0};
        hi.center += Complex{sub.half_width - hi.half_width, 0.0};
      } else {
        lo.half_height = sub.half_height * ratio;
        hi.half_height = sub.half_height * (1.0 - ratio);
        lo.center -= Complex{0.0, sub.half_height - lo.half_height};
        hi.center += Complex{0.0, sub.half_height - hi.half_height};
      }
      try {
        sub = winding_count(phi, lo) == 1 ? lo : hi;
        break;
      } catch (const BoundaryZeroError&) {
        continue;  // a zero sits on the split line; nudge the ratio
      }
    }
    if (std::max(sub.half_width, sub.half_height) < std::max(100.0 * tol, 1e-9)) {
      PolishResult fin = secant_run(phi, sub.center, tol, box, 80, escaped, evals);
      if (!escaped) return fin;
      fin.root = sub.center;
      fin.residual = std::abs(phi(sub.center));
      return fin;
    }
    if (round % 4 == 3) {
      PolishResult retry = secant_run(phi, sub.center, tol, box, 40, escaped, evals);
      if (!escaped) return retry;
    }
    if (evals > 4000)
      throw NumericalError("root_polish: evaluation budget exhausted");
  }
  throw NumericalError("root_polish: failed to converge inside the box");
}

}  // namespace dirac
