#include "dirac/solver.hpp"

#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cmath>

namespace dirac {

const char* to_string(SolveMethod m) {
  switch (m) {
    case SolveMethod::direct: return "direct";
    case SolveMethod::kernel: return "kernel";
    case SolveMethod::approx_leading: return "approx_leading";
    case SolveMethod::approx_D0: return "approx_D0";
    case SolveMethod::approx_N: return "approx_N";
  }
  return "?";
}

namespace {

using State = std::vector<Complex>;  // (d11, d12, d21, d22)

// RHS frozen to one segment of each potential: integration chunks never
// straddle breakpoints, and stage evaluations that land exactly on a chunk
// endpoint must not read the neighbouring segment's value
struct DiracRhs {
  const Poly* s1_poly;
  const Poly* s2_poly;
  Complex imu;

  void operator()(const State& y, State& dy, double x) const {
    const Complex s1 = s1_poly->eval(x);
    const Complex s2 = s2_poly->eval(x);
    dy[0] = imu * y[0] - s1 * y[2];
    dy[1] = imu * y[1] - s1 * y[3];
    dy[2] = -s2 * y[0] - imu * y[2];
    dy[3] = -s2 * y[1] - imu * y[3];
  }
};

Mat2 to_mat(const State& y) { return {y[0], y[1], y[2], y[3]}; }

// sorted union of output nodes and potential breakpoints
std::vector<double> hard_points(const PotentialPair& pair,
                                const std::vector<double>& nodes) {
  std::vector<double> pts = merge_breakpoints(pair.sigma1.breakpoints(),
                                              pair.sigma2.breakpoints());
  return merge_breakpoints(pts, nodes);
}

}  // namespace

std::vector<Mat2> solve_direct_at(const PotentialPair& pair, Complex mu,
                                  const std::vector<double>& nodes,
                                  double tol) {
  namespace ode = boost::numeric::odeint;
  using Stepper = ode::runge_kutta_fehlberg78<State>;

  for (double x : nodes)
    if (x < 0.0 || x > 1.0)
      throw DomainError("solve_direct: node outside [0,1]");

  State y{1.0, 0.0, 0.0, 1.0};
  auto stepper = ode::make_controlled<Stepper>(tol, tol);

  std::vector<double> pts = hard_points(pair, nodes);
  std::vector<Mat2> out;
  out.reserve(nodes.size());
  std::size_t next_node = 0;
  while (next_node < nodes.size() && nodes[next_node] <= 0.0) {
    out.push_back(to_mat(y));
    ++next_node;
  }
  const double dt0 = std::min(1e-2, 0.1 / (1.0 + std::abs(mu)));
  double lo = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size() && next_node < nodes.size(); ++k) {
    const double hi = pts[k + 1];
    if (hi <= lo) continue;
    const double mid = 0.5 * (lo + hi);
    DiracRhs rhs{
        &pair.sigma1.segment_poly(pair.sigma1.segment_index(mid)),
        &pair.sigma2.segment_poly(pair.sigma2.segment_index(mid)), kI * mu};
    try {
      ode::integrate_adaptive(stepper, rhs, y, lo, hi,
                              std::min(dt0, hi - lo));
    } catch (const std::exception& e) {
      throw NumericalError(std::string("solve_direct: integration failed on [") +
                           std::to_string(lo) + "," + std::to_string(hi) +
                           "]: " + e.what());
    }
    lo = hi;
    // nodes were merged into the hard-point list within its dedupe tolerance
    while (next_node < nodes.size() &&
           std::abs(nodes[next_node] - hi) <= 2e-13) {
      out.push_back(to_mat(y));
      ++next_node;
    }
  }
  if (out.size() != nodes.size())
    throw NumericalError("solve_direct: node bookkeeping failed");
  return out;
}

FundamentalSample solve_direct(const PotentialPair& pair, Complex mu, int M,
                               double tol) {
  if (M < 64) throw DomainError("solve_direct needs M >= 64");
  FundamentalSample s;
  s.mu = mu;
  s.method = SolveMethod::direct;
  s.x.resize(static_cast<std::size_t>(M) + 1);
  for (int i = 0; i <= M; ++i)
    s.x[static_cast<std::size_t>(i)] = static_cast<double>(i) / M;
  s.values = solve_direct_at(pair, mu, s.x, tol);
  return s;
}

FundamentalSample solve_via_kernel(const PotentialPair& pair,
                                   const KernelField& q, Complex mu, int M) {
  const int mq = q.grid().M;
  if (M < 2 || mq % M != 0)
    throw DomainError("solve_via_kernel: kernel grid must refine the output grid");
  const int stride = mq / M;
  const double h = q.grid().h();

  const OscTransform p1 = prefix_transform(pair.sigma1, -2.0 * mu, mq);
  const OscTransform p2 = prefix_transform(pair.sigma2, 2.0 * mu, mq);

  FundamentalSample s;
  s.mu = mu;
  s.method = SolveMethod::kernel;
  s.x.resize(static_cast<std::size_t>(M) + 1);
  s.values.resize(s.x.size());
  for (int i = 0; i <= M; ++i) {
    const double x = static_cast<double>(i) / M;
    s.x[static_cast<std::size_t>(i)] = x;
    const int row = i * stride;
    const Complex ep = std::exp(kI * mu * x);
    const Complex em = std::exp(-kI * mu * x);
    Mat2 d;
    d.m11 = ep * (1.0 + gridded_osc_integral(q.e11.row(row), h, -2.0 * mu));
    d.m12 = ep * (gridded_osc_integral(q.e12.row(row), h, -2.0 * mu) -
                  p1.at_node(row));
    d.m21 = em * (gridded_osc_integral(q.e21.row(row), h, 2.0 * mu) -
                  p2.at_node(row));
    d.m22 = em * (1.0 + gridded_osc_integral(q.e22.row(row), h, 2.0 * mu));
    s.values[static_cast<std::size_t>(i)] = d;
  }
  return s;
}

FundamentalSample approx_leading(Complex mu, int M) {
  FundamentalSample s;
  s.mu = mu;
  s.method = SolveMethod::approx_leading;
  s.x.resize(static_cast<std::size_t>(M) + 1);
  s.values.resize(s.x.size());
  for (int i = 0; i <= M; ++i) {
    const double x = static_cast<double>(i) / M;
    s.x[static_cast<std::size_t>(i)] = x;
    s.values[static_cast<std::size_t>(i)] = {std::exp(kI * mu * x), 0.0, 0.0,
                                             std::exp(-kI * mu * x)};
  }
  return s;
}

FundamentalSample approx_D0(const PotentialPair& pair, Complex mu, int M) {
  const OscTransform p1 = prefix_transform(pair.sigma1, -2.0 * mu, M);
  const OscTransform p2 = prefix_transform(pair.sigma2, 2.0 * mu, M);
  const std::vector<Complex> r1 = triangle_double_integral_prefix(
      pair.sigma1, pair.sigma2, -2.0 * mu, 2.0 * mu, M);
  const std::vector<Complex> r2 = triangle_double_integral_prefix(
      pair.sigma2, pair.sigma1, 2.0 * mu, -2.0 * mu, M);

  FundamentalSample s;
  s.mu = mu;
  s.method = SolveMethod::approx_D0;
  s.x.resize(static_cast<std::size_t>(M) + 1);
  s.values.resize(s.x.size());
  for (int i = 0; i <= M; ++i) {
    const double x = static_cast<double>(i) / M;
    s.x[static_cast<std::size_t>(i)] = x;
    const Complex ep = std::exp(kI * mu * x);
    const Complex em = std::exp(-kI * mu * x);
    const std::size_t k = static_cast<std::size_t>(i);
    Mat2 d;
    d.m11 = ep * (1.0 + r1[k]);
    d.m12 = -ep * p1.at_node(i);
    d.m21 = -em * p2.at_node(i);
    d.m22 = em * (1.0 + r2[k]);
    s.values[k] = d;
  }
  return s;
}

FundamentalSample approx_N(const PotentialPair& pair, const KernelField& n,
                           Complex mu, int M) {
  const int mq = n.grid().M;
  if (M < 2 || mq % M != 0)
    throw DomainError("approx_N: kernel grid must refine the output grid");
  const int stride = mq / M;
  const double h = n.grid().h();
  const OscTransform p1 = prefix_transform(pair.sigma1, -2.0 * mu, mq);
  const OscTransform p2 = prefix_transform(pair.sigma2, 2.0 * mu, mq);

  FundamentalSample s;
  s.mu = mu;
  s.method = SolveMethod::approx_N;
  s.x.resize(static_cast<std::size_t>(M) + 1);
  s.values.resize(s.x.size());
  for (int i = 0; i <= M; ++i) {
    const double x = static_cast<double>(i) / M;
    s.x[static_cast<std::size_t>(i)] = x;
    const int row = i * stride;
    const Complex ep = std::exp(kI * mu * x);
    const Complex em = std::exp(-kI * mu * x);
    Mat2 d;
    d.m11 = ep * (1.0 + gridded_osc_integral(n.e11.row(row), h, -2.0 * mu));
    d.m12 = ep * (gridded_osc_integral(n.e12.row(row), h, -2.0 * mu) -
                  p1.at_node(row));
    d.m21 = em * (gridded_osc_integral(n.e21.row(row), h, 2.0 * mu) -
                  p2.at_node(row));
    d.m22 = em * (1.0 + gridded_osc_integral(n.e22.row(row), h, 2.0 * mu));
    s.values[static_cast<std::size_t>(i)] = d;
  }
  return s;
}

double sample_distance(const FundamentalSample& a, const FundamentalSample& b) {
  if (a.values.size() != b.values.size())
    throw DomainError("sample_distance: grids differ");
  double d = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k)
    d = std::max(d, (a.values[k] - b.values[k]).max_abs());
  return d;
}

double fundamental_ode_residual(const PotentialPair& pair,
                                const FundamentalSample& sample) {
  const std::size_t n = sample.x.size();
  if (n < 8) throw DomainError("ode residual needs >= 8 nodes");
  const double h = sample.x[1] - sample.x[0];
  std::vector<double> breaks = merge_breakpoints(pair.sigma1.breakpoints(),
                                                 pair.sigma2.breakpoints());

  auto window_clean = [&](std::size_t k) {
    const double lo = sample.x[k - 3] - 1e-14, hi = sample.x[k + 3] + 1e-14;
    auto it = std::lower_bound(breaks.begin(), breaks.end(), lo);
    for (; it != breaks.end() && *it <= hi; ++it)
      if (*it > lo + 2e-14 && *it < hi - 2e-14) return false;
    return true;
  };

  const Complex imu = kI * sample.mu;
  double worst = 0.0;
  for (std::size_t k = 3; k + 3 < n; ++k) {
    if (!window_clean(k)) continue;
    auto deriv = [&](auto pick) {
      return (-pick(sample.values[k - 3]) + 9.0 * pick(sample.values[k - 2]) -
              45.0 * pick(sample.values[k - 1]) +
              45.0 * pick(sample.values[k + 1]) -
              9.0 * pick(sample.values[k + 2]) + pick(sample.values[k + 3])) /
             (60.0 * h);
    };
    const Mat2& d = sample.values[k];
    const Complex s1 = pair.sigma1.eval(sample.x[k]);
    const Complex s2 = pair.sigma2.eval(sample.x[k]);
    const Complex res11 =
        deriv([](const Mat2& m) { return m.m11; }) - (imu * d.m11 - s1 * d.m21);
    const Complex res12 =
        deriv([](const Mat2& m) { return m.m12; }) - (imu * d.m12 - s1 * d.m22);
    const Complex res21 = deriv([](const Mat2& m) { return m.m21; }) -
                          (-s2 * d.m11 - imu * d.m21);
    const Complex res22 = deriv([](const Mat2& m) { return m.m22; }) -
                          (-s2 * d.m12 - imu * d.m22);
    worst = std::max({worst, std::abs(res11), std::abs(res12), std::abs(res21),
                      std::abs(res22)});
  }
  return worst;
}

}  // namespace dirac
