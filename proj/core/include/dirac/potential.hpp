#pragma once

#include <cmath>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include "dirac/common.hpp"

namespace dirac {

// Complex polynomial in the global coordinate t, c[0] + c[1] t + c[2] t^2 + ...
struct Poly {
  std::vector<Complex> c;

  Poly() = default;
  Poly(std::initializer_list<Complex> init) : c(init) {}
  explicit Poly(std::vector<Complex> coeffs) : c(std::move(coeffs)) {}

  int degree() const { return static_cast<int>(c.size()) - 1; }
  bool is_zero() const;

  Complex eval(double t) const;
  Complex eval(Complex t) const;

  Poly derivative() const;
  Poly antiderivative() const;           // constant term 0
  Complex integral(double a, double b) const;

  Poly shifted(double s) const;          // p(t + s) as a polynomial in t
  Poly times_t() const;
  Poly conjugated() const;               // conj(p(conj(t))) coefficient-wise

  static Poly mul(const Poly& p, const Poly& q);
  static Poly add(const Poly& p, const Poly& q);
  Poly scaled(Complex alpha) const;

  void trim();
};

// Complex-valued function on [0,1] stored as a piecewise polynomial: strictly
// increasing breakpoints 0 = b_0 < ... < b_K = 1 with one polynomial per
// interval [b_k, b_{k+1}). Evaluation is right-continuous at interior
// breakpoints; x = 1 uses the last segment. The tag p records which L_p
// family the value models (1 <= p < 2); values themselves are always bounded.
class Potential {
 public:
  Potential() : Potential(1.0) {}
  explicit Potential(double p);
  Potential(std::vector<double> breaks, std::vector<Poly> polys, double p);

  static Potential zero(double p);
  static Potential constant(Complex value, double p);
  static Potential from_poly(Poly poly, double p);
  // height * indicator of [a,b]
  static Potential step(double a, double b, Complex height, double p);
  // sum_k coeff_k * exp(2*pi*i*freq_k*t), compiled to piecewise cubics on a
  // uniform mesh of `segments` pieces (Chebyshev interpolation per piece)
  static Potential trig(const std::vector<std::pair<int, Complex>>& terms,
                        int segments, double p);
  // scale * t^{-alpha} on a graded mesh t_k = (k/K)^{1/(1-alpha)}, linear
  // interpolation per piece, constant on the first piece; requires alpha*p < 1
  static Potential power_singularity(double alpha, int knots, Complex scale,
                                     double p);

  double p_exponent() const { return p_; }
  std::size_t segment_count() const { return polys_.size(); }
  const std::vector<double>& breakpoints() const { return breaks_; }
  const Poly& segment_poly(std::size_t k) const { return polys_[k]; }
  int max_degree() const;
  bool is_zero() const;

  Complex eval(double x) const;
  std::size_t segment_index(double x) const;

  // (integral_0^1 |f|^s dt)^{1/s}, adaptive quadrature per segment
  double lp_norm(double s) const;
  double l1_norm() const { return lp_norm(1.0); }

  Potential scaled(Complex alpha) const;
  Potential plus(const Potential& other) const;
  Potential times_t() const;
  Potential conjugated() const;

  // refit |*this| as a piecewise cubic on a refined mesh (exact whenever the
  // modulus is itself polynomial on a piece, e.g. sign-definite real data)
  Potential abs_interpolant(int per_unit_refine = 64) const;

 private:
  std::vector<double> breaks_;
  std::vector<Poly> polys_;
  double p_;
};

std::vector<double> merge_breakpoints(const std::vector<double>& a,
                                      const std::vector<double>& b);

// The two potentials of the system with the norm constants attached:
//   a0 = max(||s1||_1, ||s2||_1)   a  = ||s1||_1 * ||s2||_1   a1 = sum
//   ta0/ta/a2: the same triple in L_p;  sigma0 = |s1| + |s2|.
// q is the conjugate exponent (inf at p=1), r = p/(2-p) the Young exponent
// of the convolution sigma-tilde (so r=1 at p=1).
struct PotentialPair {
  Potential sigma1;
  Potential sigma2;
  Potential sigma0;
  double p = 1.0;
  double q = 0.0;
  double r = 1.0;
  double a0 = 0.0, a = 0.0, a1 = 0.0;
  double ta0 = 0.0, ta = 0.0, a2 = 0.0;
  bool constants_derived = false;
};

PotentialPair make_pair(Potential sigma1, Potential sigma2);
PotentialPair& derive_constants(PotentialPair& pair);

// sigma1 = q1 + i q2, sigma2 = q1 - i q2, coefficient-wise on merged breaks
PotentialPair from_bq_form(const Potential& q1, const Potential& q2);

double conjugate_exponent(double p);
double young_exponent(double p);

// upper estimate of || t^{-alpha} - power_singularity(alpha,K) ||_{L_p}
double power_family_lp_error(double alpha, int knots, double scale, double p);

}  // namespace dirac
