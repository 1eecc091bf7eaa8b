#include "dirac/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace dirac {
namespace {

// QUADPACK dqk15 abscissae/weights.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename T>
struct Piece {
  double a, b;
  T value;
  double error;
};

template <typename T, typename F>
Piece<T> kronrod15(const F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  T fc = f(c);
  T resg = kWg[3] * fc;
  T resk = kWgk[7] * fc;
  for (int j = 0; j < 3; ++j) {
    const double x = h * kXgk[2 * j + 1];
    T f1 = f(c - x), f2 = f(c + x);
    resg += kWg[j] * (f1 + f2);
    resk += kWgk[2 * j + 1] * (f1 + f2);
  }
  for (int j = 0; j < 4; ++j) {
    const double x = h * kXgk[2 * j];
    T f1 = f(c - x), f2 = f(c + x);
    resk += kWgk[2 * j] * (f1 + f2);
  }
  Piece<T> out;
  out.a = a;
  out.b = b;
  out.value = resk * h;
  out.error = std::abs(resk - resg) * std::abs(h);
  return out;
}

template <typename T, typename F>
T adaptive(const F& f, double a, double b, const QuadOptions& opt) {
  if (a == b) return T{};
  const int splits = std::max(1, opt.initial_splits);

  auto cmp = [](const Piece<T>& l, const Piece<T>& r) {
    return l.error < r.error;
  };
  std::priority_queue<Piece<T>, std::vector<Piece<T>>, decltype(cmp)> heap(cmp);

  T total{};
  double total_err = 0.0;
  auto push = [&](double lo, double hi) {
    Piece<T> p = kronrod15<T>(f, lo, hi);
    total += p.value;
    total_err += p.error;
    heap.push(std::move(p));
  };

  const double step = (b - a) / splits;
  for (int k = 0; k < splits; ++k)
    push(a + k * step, k + 1 == splits ? b : a + (k + 1) * step);

  int intervals = splits;
  while (true) {
    const double goal = std::max(opt.abs_tol, opt.rel_tol * std::abs(total));
    if (total_err <= goal || total_err <= 1e-17) break;
    if (intervals >= opt.max_intervals)
      throw NumericalError("adaptive quadrature: interval budget exhausted");
    Piece<T> worst = heap.top();
    heap.pop();
    total -= worst.value;
    total_err -= worst.error;
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      // interval is at rounding resolution; accept its estimate
      total += worst.value;
      continue;
    }
    push(worst.a, mid);
    push(mid, worst.b);
    ++intervals;
  }
  return total;
}

}  // namespace

Complex integrate(const std::function<Complex(double)>& f, double a, double b,
                  const QuadOptions& opt) {
  return adaptive<Complex>(f, a, b, opt);
}

double integrate_real(const std::function<double(double)>& f, double a,
                      double b, const QuadOptions& opt) {
  return adaptive<double>(f, a, b, opt);
}

}  // namespace dirac
