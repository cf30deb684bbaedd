#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "sombrero/errors.hpp"

// Model layer for the N-dimensional double well V(r) = (g^2/2)(r^2 - 1)^2
// at angular momentum l. With psi = r^K R, K = (N-1)/2, the radial problem
// on the half line is
//
//   -psi''/2 + [ k(k-1)/(2 r^2) + V(r) ] psi = E psi,   k = l + K.
//
// The trial function phi is built from the two WKB branches around the
// well minimum r = 1 and carries one shape parameter a > 0. It satisfies
// exactly
//
//   -phi''/2 + [ k(k-1)/(2 r^2) + V(r) + w(r) - E0 ] phi = 0
//
// with E0 = g (1 + k a) and a residual potential w(r) that is positive,
// decreasing, and has a single positive jump at r = 1. Everything here is
// closed form; no quadrature.

namespace sombrero {

// Cubic action generating the branch exponents. s0(1) = 0, s0(0) = 2/3,
// s0'(r) = r^2 - 1, and (g^2/2) s0'(r)^2 reproduces the potential.
inline double s0(double r) {
  return (r - 1.0) * (r - 1.0) * (r + 2.0) / 3.0;
}

inline double s0_prime(double r) { return r * r - 1.0; }

inline double well_potential(double g, double r) {
  const double d = r * r - 1.0;
  return 0.5 * g * g * d * d;
}

// Exponent separating the two branches: phi_minus / phi_plus =
// exp(-branch_exponent). Equals 4g/3 at r = 1 and vanishes at r = 0.
inline double branch_exponent(double g, double r) {
  return 2.0 * g * (r - r * r * r / 3.0);
}

struct ModelParams {
  double g = 0.0;  // coupling, > 0
  int N = 0;       // spatial dimension, >= 2
  int l = 0;       // angular momentum, >= 0
  double a = 0.0;  // trial-function shape parameter, > 0
};

// Constants derived from (g, k, a). N and l are kept when known (k = l + K);
// construction directly from half-integer k leaves N = 0, l = -1 and K = k.
struct DerivedConstants {
  double g = 0.0;
  double a = 0.0;
  double k = 0.0;
  double K = 0.0;
  int N = 0;
  int l = -1;

  double g_plus = 0.0;   // g + (k/a + 1)
  double g_minus = 0.0;  // g - (k/a + 1)
  double E0 = 0.0;       // g (1 + k a)

  // Sufficient-condition window at fixed (k, a):
  //   g_min < g  and  g^2 < g_max^2,
  // equivalently a_min < a < a_max at fixed (g, k).
  double a_min = 0.0;
  double a_max = 0.0;
  double g_min = 0.0;
  double g_max_sq = 0.0;
  double window_ratio = 0.0;  // g / (k/a + 1), must exceed 1
  double window_limit = 0.0;  // sqrt(1 + 1/(k + a)), must exceed the ratio
  bool hierarchy_valid = false;
};

inline DerivedConstants derive_constants(double g, double k, double a,
                                         int N = 0, int l = -1) {
  if (!(g > 0.0)) throw StructuralError("derive_constants: g must be > 0");
  if (!(k >= 0.0)) throw StructuralError("derive_constants: k must be >= 0");
  if (!(a > 0.0)) throw StructuralError("derive_constants: a must be > 0");

  DerivedConstants dc;
  dc.g = g;
  dc.a = a;
  dc.k = k;
  dc.N = N;
  dc.l = l;
  dc.K = (N >= 2) ? 0.5 * (N - 1) : k;

  const double kap1 = k / a + 1.0;
  dc.g_plus = g + kap1;
  dc.g_minus = g - kap1;
  dc.E0 = g * (1.0 + k * a);

  dc.g_min = kap1;
  dc.g_max_sq = kap1 * (kap1 + 1.0 / a);
  dc.window_ratio = g / kap1;
  dc.window_limit = std::sqrt(1.0 + 1.0 / (k + a));

  if (g > 1.0) {
    dc.a_min = k / (g - 1.0);
    // a_max solves g^2 = (1 + k x)(1 + (k+1) x) with x = 1/a_max.
    const double q = 2.0 * k + 1.0;
    if (k > 0.0) {
      const double disc = q * q + 4.0 * k * (k + 1.0) * (g * g - 1.0);
      const double x = (std::sqrt(disc) - q) / (2.0 * k * (k + 1.0));
      dc.a_max = 1.0 / x;
    } else {
      dc.a_max = 1.0 / (g * g - 1.0);
    }
  } else {
    dc.a_min = std::numeric_limits<double>::infinity();
    dc.a_max = 0.0;
  }

  dc.hierarchy_valid =
      dc.window_ratio > 1.0 && dc.window_ratio < dc.window_limit;
  return dc;
}

inline DerivedConstants validate_params(const ModelParams& p) {
  if (!(p.g > 0.0)) throw StructuralError("validate_params: g must be > 0");
  if (p.N < 2) throw StructuralError("validate_params: N must be >= 2");
  if (p.l < 0) throw StructuralError("validate_params: l must be >= 0");
  if (!(p.a > 0.0)) throw StructuralError("validate_params: a must be > 0");
  const double K = 0.5 * (p.N - 1);
  return derive_constants(p.g, p.l + K, p.a, p.N, p.l);
}

// Trial function, evaluated in log magnitude so the exp(-g s0) falloff
// never underflows. phi > 0 on (0, inf); phi ~ r^k at the origin, and
// (r^{-k} phi)'(0) = 0 by construction.
struct PhiValue {
  double log_mag;  // log phi(r)
  double dlog;     // phi'(r) / phi(r)
};

class TrialFunction {
 public:
  explicit TrialFunction(const DerivedConstants& dc) : dc_(dc) {
    if (dc_.g_plus <= 0.0)
      throw DomainError("TrialFunction: g_plus must be positive");
    ratio_ = dc_.g_minus / dc_.g_plus;
    tail_ = ratio_ * std::exp(-4.0 * dc_.g / 3.0);
    if (1.0 + tail_ <= 0.0)
      throw DomainError("TrialFunction: nonpositive branch combination");
  }

  const DerivedConstants& constants() const { return dc_; }

  // log of the single-branch factor
  //   phi_plus = (2 r^k / (r+1)) ((1+a)/(r+a))^k exp(-g s0).
  double log_phi_plus(double r) const {
    require_radius(r);
    const double k = dc_.k, a = dc_.a;
    double lg = std::log(2.0) - std::log1p(r) - dc_.g * s0(r);
    if (k > 0.0)
      lg += k * (std::log(r) + std::log1p(a) - std::log(r + a));
    return lg;
  }

  double dlog_phi_plus(double r) const {
    require_radius(r);
    const double k = dc_.k, a = dc_.a;
    return k / r - 1.0 / (r + 1.0) - k / (r + a) - dc_.g * s0_prime(r);
  }

  PhiValue operator()(double r) const {
    require_radius(r);
    if (r == 0.0 && dc_.k > 0.0)
      return {-std::numeric_limits<double>::infinity(),
              std::numeric_limits<double>::infinity()};
    PhiValue v;
    if (r <= 1.0) {
      // phi = phi_plus (g_plus + g_minus exp(-branch_exponent)); the
      // ratio form keeps everything finite for large g.
      const double lam = branch_exponent(dc_.g, r);
      const double t = ratio_ * std::exp(-lam);
      if (1.0 + t <= 0.0)
        throw DomainError("TrialFunction: nonpositive branch combination");
      v.log_mag = log_phi_plus(r) + std::log(dc_.g_plus) + std::log1p(t);
      const double lam_prime = 2.0 * dc_.g * (1.0 - r * r);
      v.dlog = dlog_phi_plus(r) - lam_prime * t / (1.0 + t);
    } else {
      v.log_mag = log_phi_plus(r) + std::log(dc_.g_plus) + std::log1p(tail_);
      v.dlog = dlog_phi_plus(r);
    }
    return v;
  }

  double log_phi(double r) const { return (*this)(r).log_mag; }
  double dlog_phi(double r) const { return (*this)(r).dlog; }

 private:
  static void require_radius(double r) {
    if (!(r >= 0.0)) throw DomainError("TrialFunction: r must be >= 0");
  }
  DerivedConstants dc_;
  double ratio_ = 0.0;  // g_minus / g_plus
  double tail_ = 0.0;   // ratio * exp(-4g/3)
};

// Which side of the matching point r = 1 a sample belongs to. w itself is
// discontinuous there; h1..h5 are the smooth part, g6..g8 the branch part
// supported on r <= 1.
enum class Side { Left, Right };

struct PotentialTerms {
  double r = 0.0;
  Side side = Side::Left;

  // Smooth part, defined for all r > 0. h1 diverges like 1/r at the origin.
  double h1 = 0.0, h2 = 0.0, h3 = 0.0, h4 = 0.0, h5 = 0.0;
  // Branch part, zero on the right side. g8 diverges like -1/r at the
  // origin; the divergence cancels against h1.
  double g6 = 0.0, g7 = 0.0, g8 = 0.0;
  // Regrouped left-side terms, individually finite on [0, 1]:
  //   wI  = h1 + g8, wII + wVI = h2 + g6 + g7, wIII..wV = h3..h5.
  // Zero on the right side.
  double wI = 0.0, wII = 0.0, wIII = 0.0, wIV = 0.0, wV = 0.0, wVI = 0.0;

  double w = 0.0;  // total residual potential
};

inline Side default_side(double r) { return r < 1.0 ? Side::Left : Side::Right; }

inline PotentialTerms eval_w(const DerivedConstants& dc, double r, Side side) {
  if (!(r >= 0.0)) throw DomainError("eval_w: r must be >= 0");
  if (side == Side::Left && r > 1.0)
    throw DomainError("eval_w: left side is limited to r <= 1");
  if (side == Side::Right && r < 1.0)
    throw DomainError("eval_w: right side is limited to r >= 1");

  const double g = dc.g, k = dc.k, a = dc.a;
  const double gp = dc.g_plus, gm = dc.g_minus;
  const double inf = std::numeric_limits<double>::infinity();

  PotentialTerms t;
  t.r = r;
  t.side = side;

  t.h2 = k * a * a * g / (r + a);
  t.h3 = 1.0 / ((r + 1.0) * (r + 1.0));
  t.h4 = 0.5 * k * (k + 1.0) / ((r + a) * (r + a));
  t.h5 = k * a / ((r + a) * (r + 1.0));
  t.h1 = (r > 0.0) ? k * a * gm / (r * (r + a))
                   : (gm == 0.0 ? 0.0 : (gm > 0.0 ? inf : -inf));

  if (side == Side::Right) {
    t.w = t.h1 + t.h2 + t.h3 + t.h4 + t.h5;
    return t;
  }

  // Left side. With u = (g_minus/g_plus) exp(-branch_exponent):
  //   X = g_minus / (g_plus e^L + g_minus) = u / (1 + u)
  //   Y = (g_plus e^L - g_minus) / (g_plus e^L + g_minus) = (1-u)/(1+u)
  //   Z = g_plus g_minus (e^L - 1)/(g_plus e^L + g_minus)
  // computed without forming e^L, which overflows for large g.
  const double lam = branch_exponent(g, r);
  const double u = (gm / gp) * std::exp(-lam);
  if (1.0 + u <= 0.0)
    throw DomainError("eval_w: nonpositive branch combination");
  const double X = u / (1.0 + u);
  const double Y = (1.0 - u) / (1.0 + u);
  const double Z = gm * (-std::expm1(-lam)) / (1.0 + u);

  t.g6 = 2.0 * g * X;
  t.g7 = 2.0 * g * X * k * a * r / (r + a);
  t.g8 = (r > 0.0) ? -2.0 * g * X * k * a / (r * (r + a))
                   : (k > 0.0 ? -inf * (gm > 0 ? 1.0 : (gm < 0 ? -1.0 : 0.0))
                              : 0.0);

  // Z/r stays finite at the origin: -expm1(-L)/r -> 2g as r -> 0.
  const double z_over_r =
      (r > 0.0) ? Z / r : gp * gm;  // limit g_plus g_minus at r = 0
  t.wI = k * a * z_over_r / (r + a);
  t.wII = Y * g * k * a * a / (r + a);
  t.wIII = t.h3;
  t.wIV = t.h4;
  t.wV = t.h5;
  t.wVI = 2.0 * g * (k * a + 1.0) * X;

  t.w = t.wI + t.wII + t.wIII + t.wIV + t.wV + t.wVI;
  return t;
}

inline PotentialTerms eval_w(const DerivedConstants& dc, double r) {
  return eval_w(dc, r, default_side(r));
}

// Closed form of the downward step w(1-) - w(1+); positive whenever
// g_minus > 0.
inline double w_jump(const DerivedConstants& dc) {
  const double c = (dc.g_minus / dc.g_plus) * std::exp(-4.0 * dc.g / 3.0);
  return 2.0 * dc.g * c / (1.0 + c);
}

}  // namespace sombrero
