#pragma once

#include <cmath>
#include <cstdlib>
#include <vector>

#include <boost/rational.hpp>

#include "sombrero/errors.hpp"

// Angular factor of the N-dimensional separation. With z = cos(theta) the
// polar equation is
//
//   (1-z^2) Z'' - (N-1) z Z' + [l(l+N-2) - m(m+N-3)/(1-z^2)] Z = 0,
//
// solved by Z_{l,m} = (1-z^2)^{m/2} d^m Z_{l,0}, where Z_{l,0} is the
// (kappa-1)-th derivative of a Legendre polynomial for odd N and of a
// Chebyshev polynomial for even N, kappa = (N-1)/2 or N/2. Coefficients
// are carried as exact rationals so residual checks measure only the
// final evaluation roundoff.

namespace sombrero {

using Rational = boost::rational<long long>;
using RatPoly = std::vector<Rational>;  // ascending coefficients

namespace detail {

inline RatPoly legendre(int n) {
  RatPoly pm1{Rational(1)};
  if (n == 0) return pm1;
  RatPoly p{Rational(0), Rational(1)};
  for (int j = 2; j <= n; ++j) {
    RatPoly next(j + 1, Rational(0));
    for (size_t i = 0; i < p.size(); ++i)
      next[i + 1] += Rational(2 * j - 1, j) * p[i];
    for (size_t i = 0; i < pm1.size(); ++i)
      next[i] -= Rational(j - 1, j) * pm1[i];
    pm1 = std::move(p);
    p = std::move(next);
  }
  return p;
}

inline RatPoly chebyshev(int n) {
  RatPoly pm1{Rational(1)};
  if (n == 0) return pm1;
  RatPoly p{Rational(0), Rational(1)};
  for (int j = 2; j <= n; ++j) {
    RatPoly next(j + 1, Rational(0));
    for (size_t i = 0; i < p.size(); ++i) next[i + 1] += Rational(2) * p[i];
    for (size_t i = 0; i < pm1.size(); ++i) next[i] -= pm1[i];
    pm1 = std::move(p);
    p = std::move(next);
  }
  return p;
}

inline RatPoly poly_derivative(const RatPoly& p) {
  if (p.size() <= 1) return RatPoly{Rational(0)};
  RatPoly d(p.size() - 1);
  for (size_t i = 1; i < p.size(); ++i)
    d[i - 1] = Rational(static_cast<long long>(i)) * p[i];
  return d;
}

inline double poly_eval(const RatPoly& p, double z) {
  double acc = 0.0;
  for (size_t i = p.size(); i-- > 0;)
    acc = acc * z + boost::rational_cast<double>(p[i]);
  return acc;
}

}  // namespace detail

// Laplacian eigenvalue on the n-sphere for angular momentum l.
inline double angular_eigenvalue(int l, int n) {
  if (l < 0 || n < 1) throw StructuralError("angular_eigenvalue: bad indices");
  return static_cast<double>(l) * (l + n - 1.0);
}

// 4k(k-1) = 4K(K-1) + 4l(l+N-2) with k = l + (N-1)/2 and K = (N-1)/2;
// quadrupled so both sides stay integers for every N.
inline bool separation_identity_holds(int N, int l) {
  const long long lhs = (2LL * l + N - 1) * (2LL * l + N - 3);
  const long long rhs =
      static_cast<long long>(N - 1) * (N - 3) + 4LL * l * (l + N - 2);
  return lhs == rhs;
}

struct AngularFunction {
  int N = 0, l = 0, m = 0, kappa = 0;
  RatPoly Q;  // Z = (1-z^2)^{m/2} Q(z)

  double Q_value(double z) const { return detail::poly_eval(Q, z); }

  double operator()(double z) const {
    if (std::abs(z) > 1.0)
      throw DomainError("angular function: |z| must be at most 1");
    return std::pow(1.0 - z * z, 0.5 * m) * Q_value(z);
  }
};

inline AngularFunction build_Z(int N, int l, int m) {
  if (N < 2) throw StructuralError("build_Z: N must be at least 2");
  if (l < 0) throw StructuralError("build_Z: l must be nonnegative");
  if (m < 0 || m > l)
    throw DomainError("build_Z: m must satisfy 0 <= m <= l");
  const int kappa = (N % 2 == 1) ? (N - 1) / 2 : N / 2;
  const int base_degree = l + kappa - 1;
  if (base_degree > 20)
    throw StructuralError(
        "build_Z: l + kappa - 1 above 20 overflows the exact recurrences");

  RatPoly q = (N % 2 == 1) ? detail::legendre(base_degree)
                           : detail::chebyshev(base_degree);
  for (int j = 0; j < kappa - 1 + m; ++j) q = detail::poly_derivative(q);

  AngularFunction af;
  af.N = N;
  af.l = l;
  af.m = m;
  af.kappa = kappa;
  af.Q = std::move(q);
  return af;
}

// Polar-equation defect at z. Substituting Z = (1-z^2)^{m/2} Q turns the
// equation into
//   (1-z^2) Q'' - (N-1+2m) z Q' + [l(l+N-2) - m(m+N-2)] Q = 0
// times the prefactor, which avoids dividing by 1-z^2 near the poles.
inline double ode_residual(const AngularFunction& af, double z) {
  if (std::abs(z) > 1.0)
    throw DomainError("ode_residual: |z| must be at most 1");
  const RatPoly dq = detail::poly_derivative(af.Q);
  const RatPoly ddq = detail::poly_derivative(dq);
  const double lam = angular_eigenvalue(af.l, af.N - 1);
  const double body = (1.0 - z * z) * detail::poly_eval(ddq, z) -
                      (af.N - 1.0 + 2.0 * af.m) * z * detail::poly_eval(dq, z) +
                      (lam - af.m * (af.m + af.N - 2.0)) * af.Q_value(z);
  return std::pow(1.0 - z * z, 0.5 * af.m) * body;
}

}  // namespace sombrero
