#include "dirac/potential.hpp"

#include <algorithm>
#include <cmath>

#include "dirac/quadrature.hpp"

namespace dirac {

namespace {
constexpr double kBreakEps = 1e-13;
}

// ---------------------------------------------------------------------------
// Poly

bool Poly::is_zero() const {
  for (const auto& a : c)
    if (a != Complex{}) return false;
  return true;
}

Complex Poly::eval(double t) const {
  Complex acc{};
  for (std::size_t k = c.size(); k-- > 0;) acc = acc * t + c[k];
  return acc;
}

Complex Poly::eval(Complex t) const {
  Complex acc{};
  for (std::size_t k = c.size(); k-- > 0;) acc = acc * t + c[k];
  return acc;
}

Poly Poly::derivative() const {
  if (c.size() <= 1) return Poly{};
  Poly d;
  d.c.resize(c.size() - 1);
  for (std::size_t k = 1; k < c.size(); ++k)
    d.c[k - 1] = c[k] * static_cast<double>(k);
  return d;
}

Poly Poly::antiderivative() const {
  Poly a;
  a.c.assign(c.size() + 1, Complex{});
  for (std::size_t k = 0; k < c.size(); ++k)
    a.c[k + 1] = c[k] / static_cast<double>(k + 1);
  return a;
}

Complex Poly::integral(double a, double b) const {
  Poly anti = antiderivative();
  return anti.eval(b) - anti.eval(a);
}

Poly Poly::shifted(double s) const {
  // p(t+s) = sum_k c_k (t+s)^k, binomial expansion
  Poly out;
  out.c.assign(c.size(), Complex{});
  for (std::size_t k = 0; k < c.size(); ++k) {
    double binom = 1.0;
    double spow = 1.0;
    for (std::size_t j = 0; j <= k; ++j) {
      out.c[k - j] += c[k] * binom * spow;
      binom *= static_cast<double>(k - j) / static_cast<double>(j + 1);
      spow *= s;
    }
  }
  return out;
}

Poly Poly::times_t() const {
  if (c.empty()) return {};
  Poly out;
  out.c.assign(c.size() + 1, Complex{});
  for (std::size_t k = 0; k < c.size(); ++k) out.c[k + 1] = c[k];
  return out;
}

Poly Poly::conjugated() const {
  Poly out = *this;
  for (auto& a : out.c) a = std::conj(a);
  return out;
}

Poly Poly::mul(const Poly& p, const Poly& q) {
  if (p.c.empty() || q.c.empty()) return {};
  Poly out;
  out.c.assign(p.c.size() + q.c.size() - 1, Complex{});
  for (std::size_t i = 0; i < p.c.size(); ++i)
    for (std::size_t j = 0; j < q.c.size(); ++j) out.c[i + j] += p.c[i] * q.c[j];
  return out;
}

Poly Poly::add(const Poly& p, const Poly& q) {
  Poly out;
  out.c.assign(std::max(p.c.size(), q.c.size()), Complex{});
  for (std::size_t i = 0; i < p.c.size(); ++i) out.c[i] += p.c[i];
  for (std::size_t i = 0; i < q.c.size(); ++i) out.c[i] += q.c[i];
  return out;
}

Poly Poly::scaled(Complex alpha) const {
  Poly out = *this;
  for (auto& a : out.c) a *= alpha;
  return out;
}

void Poly::trim() {
  while (!c.empty() && c.back() == Complex{}) c.pop_back();
}

// ---------------------------------------------------------------------------
// Potential

Potential::Potential(double p) : breaks_{0.0, 1.0}, polys_{Poly{}}, p_(p) {
  if (!(p >= 1.0 && p < 2.0))
    throw DomainError("potential exponent must satisfy 1 <= p < 2");
}

Potential::Potential(std::vector<double> breaks, std::vector<Poly> polys,
                     double p)
    : breaks_(std::move(breaks)), polys_(std::move(polys)), p_(p) {
  if (!(p >= 1.0 && p < 2.0))
    throw DomainError("potential exponent must satisfy 1 <= p < 2");
  if (breaks_.size() < 2 || polys_.size() + 1 != breaks_.size())
    throw DomainError("potential: breakpoint/segment count mismatch");
  if (std::abs(breaks_.front()) > kBreakEps ||
      std::abs(breaks_.back() - 1.0) > kBreakEps)
    throw DomainError("potential: breakpoints must start at 0 and end at 1");
  breaks_.front() = 0.0;
  breaks_.back() = 1.0;
  for (std::size_t k = 1; k < breaks_.size(); ++k)
    if (breaks_[k] <= breaks_[k - 1])
      throw DomainError("potential: breakpoints must be strictly increasing");
}

Potential Potential::zero(double p) { return Potential(p); }

Potential Potential::constant(Complex value, double p) {
  return Potential({0.0, 1.0}, {Poly{value}}, p);
}

Potential Potential::from_poly(Poly poly, double p) {
  return Potential({0.0, 1.0}, {std::move(poly)}, p);
}

Potential Potential::step(double a, double b, Complex height, double p) {
  if (!(0.0 <= a && a < b && b <= 1.0))
    throw DomainError("step potential needs 0 <= a < b <= 1");
  std::vector<double> breaks{0.0};
  std::vector<Poly> polys;
  if (a > 0.0) {
    breaks.push_back(a);
    polys.push_back(Poly{});
  }
  breaks.push_back(b < 1.0 ? b : 1.0);
  polys.push_back(Poly{height});
  if (b < 1.0) {
    breaks.push_back(1.0);
    polys.push_back(Poly{});
  }
  return Potential(std::move(breaks), std::move(polys), p);
}

namespace {

// cubic through the 4 Chebyshev points of [a,b], in the global coordinate
Poly fit_cubic(const std::function<Complex(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double xs[4];
  Complex ys[4];
  for (int k = 0; k < 4; ++k) {
    xs[k] = c + h * std::cos((2 * k + 1) * kPi / 8.0);
    ys[k] = f(xs[k]);
  }
  // Newton divided differences -> monomial coefficients
  Complex dd[4] = {ys[0], ys[1], ys[2], ys[3]};
  for (int lvl = 1; lvl < 4; ++lvl)
    for (int k = 3; k >= lvl; --k)
      dd[k] = (dd[k] - dd[k - 1]) / (xs[k] - xs[k - lvl]);
  Poly out{dd[0]};
  Poly basis{1.0};
  for (int k = 1; k < 4; ++k) {
    basis = Poly::mul(basis, Poly{-xs[k - 1], 1.0});
    out = Poly::add(out, basis.scaled(dd[k]));
  }
  return out;
}

}  // namespace

Potential Potential::trig(const std::vector<std::pair<int, Complex>>& terms,
                          int segments, double p) {
  if (segments < 1) throw DomainError("trig potential needs >= 1 segment");
  auto f = [&terms](double t) {
    Complex acc{};
    for (const auto& [freq, coef] : terms)
      acc += coef * std::exp(Complex{0.0, 2.0 * kPi * freq * t});
    return acc;
  };
  std::vector<double> breaks(segments + 1);
  std::vector<Poly> polys(segments);
  for (int k = 0; k <= segments; ++k)
    breaks[k] = static_cast<double>(k) / segments;
  for (int k = 0; k < segments; ++k)
    polys[k] = fit_cubic(f, breaks[k], breaks[k + 1]);
  return Potential(std::move(breaks), std::move(polys), p);
}

Potential Potential::power_singularity(double alpha, int knots, Complex scale,
                                       double p) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw DomainError("power singularity needs 0 < alpha < 1");
  if (!(alpha * p < 1.0))
    throw DomainError("power singularity needs alpha*p < 1");
  if (knots < 2) throw DomainError("power singularity needs >= 2 knots");
  const double grading = 1.0 / (1.0 - alpha);
  std::vector<double> breaks(knots + 1);
  breaks[0] = 0.0;
  for (int k = 1; k <= knots; ++k)
    breaks[k] = std::pow(static_cast<double>(k) / knots, grading);
  breaks[knots] = 1.0;
  std::vector<Poly> polys(knots);
  auto target = [&](double t) { return std::pow(t, -alpha); };
  // first piece: constant at the first knot value
  polys[0] = Poly{scale * target(breaks[1])};
  for (int k = 1; k < knots; ++k) {
    const double ta = breaks[k], tb = breaks[k + 1];
    const double fa = target(ta), fb = target(tb);
    const double slope = (fb - fa) / (tb - ta);
    polys[k] = Poly{scale * (fa - slope * ta), scale * slope};
  }
  return Potential(std::move(breaks), std::move(polys), p);
}

int Potential::max_degree() const {
  int d = 0;
  for (const auto& poly : polys_) d = std::max(d, poly.degree());
  return d;
}

bool Potential::is_zero() const {
  for (const auto& poly : polys_)
    if (!poly.is_zero()) return false;
  return true;
}

std::size_t Potential::segment_index(double x) const {
  if (x < 0.0 || x > 1.0)
    throw DomainError("potential evaluated outside [0,1]");
  if (x >= breaks_[breaks_.size() - 2]) return polys_.size() - 1;
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
  return static_cast<std::size_t>(it - breaks_.begin()) - 1;
}

Complex Potential::eval(double x) const {
  return polys_[segment_index(x)].eval(x);
}

double Potential::lp_norm(double s) const {
  if (!(s >= 1.0)) throw DomainError("lp_norm needs s >= 1");
  double total = 0.0;
  QuadOptions opt;
  opt.rel_tol = 1e-10;
  opt.abs_tol = 1e-15;
  for (std::size_t k = 0; k < polys_.size(); ++k) {
    const Poly& poly = polys_[k];
    if (poly.is_zero()) continue;
    total += integrate_real(
        [&](double t) { return std::pow(std::abs(poly.eval(t)), s); },
        breaks_[k], breaks_[k + 1], opt);
  }
  return std::pow(total, 1.0 / s);
}

std::vector<double> merge_breakpoints(const std::vector<double>& a,
                                      const std::vector<double>& b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  out.erase(std::unique(out.begin(), out.end(),
                        [](double x, double y) {
                          return std::abs(x - y) <= kBreakEps;
                        }),
            out.end());
  return out;
}

Potential Potential::scaled(Complex alpha) const {
  Potential out = *this;
  for (auto& poly : out.polys_) poly = poly.scaled(alpha);
  return out;
}

Potential Potential::plus(const Potential& other) const {
  std::vector<double> breaks = merge_breakpoints(breaks_, other.breaks_);
  std::vector<Poly> polys(breaks.size() - 1);
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double mid = 0.5 * (breaks[k] + breaks[k + 1]);
    polys[k] = Poly::add(polys_[segment_index(mid)],
                         other.polys_[other.segment_index(mid)]);
  }
  return Potential(std::move(breaks), std::move(polys), p_);
}

Potential Potential::times_t() const {
  Potential out = *this;
  for (auto& poly : out.polys_) poly = poly.times_t();
  return out;
}

Potential Potential::conjugated() const {
  Potential out = *this;
  for (auto& poly : out.polys_) poly = poly.conjugated();
  return out;
}

Potential Potential::abs_interpolant(int per_unit_refine) const {
  std::vector<double> breaks{0.0};
  std::vector<Poly> polys;
  for (std::size_t k = 0; k < polys_.size(); ++k) {
    const double a = breaks_[k], b = breaks_[k + 1];
    const Poly& poly = polys_[k];
    const int pieces =
        std::max(1, static_cast<int>(std::ceil((b - a) * per_unit_refine)));
    auto f = [&poly](double t) { return Complex{std::abs(poly.eval(t)), 0.0}; };
    for (int j = 0; j < pieces; ++j) {
      const double u = a + (b - a) * j / pieces;
      const double v = j + 1 == pieces ? b : a + (b - a) * (j + 1) / pieces;
      polys.push_back(fit_cubic(f, u, v));
      breaks.push_back(v);
    }
  }
  return Potential(std::move(breaks), std::move(polys), p_);
}

// ---------------------------------------------------------------------------
// PotentialPair

double conjugate_exponent(double p) {
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  return p / (p - 1.0);
}

double young_exponent(double p) { return p / (2.0 - p); }

PotentialPair make_pair(Potential sigma1, Potential sigma2) {
  if (sigma1.p_exponent() != sigma2.p_exponent())
    throw ConfigError("potential pair: mismatched integrability exponents");
  PotentialPair pair;
  pair.p = sigma1.p_exponent();
  pair.q = conjugate_exponent(pair.p);
  pair.r = young_exponent(pair.p);
  pair.sigma1 = std::move(sigma1);
  pair.sigma2 = std::move(sigma2);
  derive_constants(pair);
  return pair;
}

PotentialPair& derive_constants(PotentialPair& pair) {
  const double n1 = pair.sigma1.l1_norm();
  const double n2 = pair.sigma2.l1_norm();
  pair.a0 = std::max(n1, n2);
  pair.a = n1 * n2;
  pair.a1 = n1 + n2;
  const double m1 = pair.sigma1.lp_norm(pair.p);
  const double m2 = pair.sigma2.lp_norm(pair.p);
  pair.ta0 = std::max(m1, m2);
  pair.ta = m1 * m2;
  pair.a2 = m1 + m2;
  pair.sigma0 =
      pair.sigma1.abs_interpolant().plus(pair.sigma2.abs_interpolant());
  pair.constants_derived = true;
  return pair;
}

PotentialPair from_bq_form(const Potential& q1, const Potential& q2) {
  if (q1.p_exponent() != q2.p_exponent())
    throw ConfigError("from_bq_form: mismatched integrability exponents");
  Potential s1 = q1.plus(q2.scaled(kI));
  Potential s2 = q1.plus(q2.scaled(-kI));
  return make_pair(std::move(s1), std::move(s2));
}

double power_family_lp_error(double alpha, int knots, double scale, double p) {
  Potential approx = Potential::power_singularity(alpha, knots, scale, p);
  const double t1 = approx.breakpoints()[1];
  // on [0,t1] the approximant is below the target, |diff| <= t^{-alpha}
  const double head =
      std::pow(t1, 1.0 - alpha * p) / (1.0 - alpha * p);
  QuadOptions opt;
  opt.rel_tol = 1e-8;
  opt.abs_tol = 1e-14;
  opt.initial_splits = 16;
  double body = integrate_real(
      [&](double t) {
        return std::pow(
            std::abs(scale) * std::abs(std::pow(t, -alpha) -
                                       std::abs(approx.eval(t))),
            p);
      },
      t1, 1.0, opt);
  return std::pow(std::pow(std::abs(scale), p) * head + body, 1.0 / p);
}

}  // namespace dirac
