#pragma once

// Small numeric toolbox shared across the library: log-space combinatorics,
// compensated summation, quadrature over the half line, and the special
// function wrappers (Boost.Math) used by the statistical tests.

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace sieve {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// log C(n, k) for real n >= k >= 0
inline double log_binomial(double n, double k) {
  if (k < 0 || k > n) return -kInf;
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// log (x)_n = log Gamma(x+n) - log Gamma(x), n >= 0, x > 0
inline double log_pochhammer(double x, long long n) {
  if (n < 0) throw std::invalid_argument("log_pochhammer: n < 0");
  if (n == 0) return 0.0;
  return std::lgamma(x + static_cast<double>(n)) - std::lgamma(x);
}

struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    double y = x - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

// chi-square survival P(X > x) with `dof` degrees of freedom
inline double chi_square_survival(double x, double dof) {
  if (x <= 0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, x / 2.0);
}

inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p outside (0,1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

inline double normal_cdf(double z) {
  return boost::math::cdf(boost::math::normal_distribution<double>(), z);
}

// Survival function of the Kolmogorov distribution, Q(t) = 2 sum (-1)^{k-1} e^{-2k^2 t^2}.
inline double kolmogorov_survival(double t) {
  if (t <= 0) return 1.0;
  if (t > 10) return 0.0;
  double s = 0.0;
  for (int k = 1; k <= 200; ++k) {
    double term = std::exp(-2.0 * k * k * t * t);
    s += (k % 2 == 1) ? term : -term;
    if (term < 1e-18) break;
  }
  return std::min(1.0, std::max(0.0, 2.0 * s));
}

// Integral of f over (0, inf). Double-exponential scheme; f may be singular
// at 0 and must decay at infinity.
inline double integrate_halfline(const std::function<double(double)>& f, double tol = 1e-12) {
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate(f, tol);
}

// Integral of f over (0, 1); endpoint singularities allowed.
inline double integrate_unit(const std::function<double(double)>& f, double tol = 1e-12) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(f, 0.0, 1.0, tol);
}

// Regularized incomplete beta I_x(a, b)
inline double reg_inc_beta(double a, double b, double x) {
  if (x <= 0) return 0.0;
  if (x >= 1) return 1.0;
  return boost::math::ibeta(a, b, x);
}

inline double digamma(double x) { return boost::math::digamma(x); }

}  // namespace sieve
