#pragma once

// Reference computations written independently of the library code paths.

#include "puo/core.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <array>
#include <cmath>
#include <random>

namespace oracle {

using puo::Mat4;
using puo::Vec4;

struct Freq {
  double w1, w2;
  double alpha() const { return w1 * w1 + w2 * w2; }
  double beta() const { return w1 * w1 * w2 * w2; }
};

/// Ostrogradsky energy of L = q''^2/2 - alpha q'^2/2 + beta q^2/2 written out in jet variables.
inline double h1(const Freq& f, const Vec4& z) {
  const double q = z[0], qd = z[1], qdd = z[2], qddd = z[3];
  return 0.5 * qdd * qdd - 0.5 * f.alpha() * qd * qd - 0.5 * f.beta() * q * q - qd * qddd;
}

/// The same energy in canonical variables (x1, x2, p1, p2).
inline double h1_canonical(const Freq& f, const Vec4& s) {
  return s[2] * s[1] + 0.5 * s[3] * s[3] + 0.5 * f.alpha() * s[1] * s[1] - 0.5 * f.beta() * s[0] * s[0];
}

/// x1 = q, x2 = q', p1 = dL/dq' - d/dt dL/dq'', p2 = dL/dq''.
inline Vec4 canonical(const Freq& f, const Vec4& z) {
  return {z[0], z[1], -f.alpha() * z[1] - z[3], z[2]};
}

inline double h2(const Freq& f, const Vec4& z) {
  const double q = z[0], qd = z[1], qdd = z[2], qddd = z[3];
  return q * qdd - 0.5 * qd * qd + (f.alpha() * qdd * qdd + qddd * qddd) / (2.0 * f.beta());
}

/// z' for q'''' = -alpha q'' - beta q + s W'(q) with W = lambda q^4 / 4.
inline Vec4 rhs(const Freq& f, const Vec4& z, double lambda = 0.0, int s = 1) {
  return {z[1], z[2], z[3], -f.alpha() * z[2] - f.beta() * z[0] + s * lambda * z[0] * z[0] * z[0]};
}

inline Mat4 companion(const Freq& f) {
  Mat4 a;
  for (int i = 0; i < 4; ++i) a.col(i) = rhs(f, Vec4::Unit(i));
  return a;
}

/// exp(A t) z0 by the matrix exponential.
inline Vec4 free_solution(const Freq& f, const Vec4& z0, double t) {
  const Mat4 at = companion(f) * t;
  return at.exp() * z0;
}

/// Coefficients on (q, q', q'', q''', q'''') of a_x x'' + b_x x + g y with x = mu0 q + mu2 q'',
/// y = nu0 q + nu2 q'' (swap roles for the second equation).
inline std::array<double, 5> eom_coefficients(double a, double b, double g, double m0, double m2,
                                              double n0, double n2) {
  return {b * m0 + g * n0, 0.0, a * m0 + b * m2 + g * n2, 0.0, a * m2};
}

/// Per-|a_i|^2 weights of c1 H1 + c2 H2 on the two normal modes.
inline std::array<double, 2> blend_mode_weights(const Freq& f, double c1, double c2) {
  const double s1 = f.w1 * f.w1, s2 = f.w2 * f.w2;
  return {2.0 * s1 * (s1 - s2) * (c1 + c2 / s2), 2.0 * s2 * (s2 - s1) * (c1 + c2 / s1)};
}

/// Tb1 dependent parameters solved by hand with phi1 = phi_PU, phi2 = 0.
struct Tb1 {
  double a_y, b_y, mu0, mu2, nu0, nu2;
};
inline Tb1 tb1(const Freq& f, double a_x, double b_x, double g) {
  const double tau = b_x * b_x - a_x * b_x * f.alpha() + a_x * a_x * f.beta();
  return {-a_x * g * g / tau, g * g * (b_x - a_x * f.alpha()) / tau, (f.alpha() - b_x / a_x) / a_x,
          1.0 / a_x, tau / (g * a_x * a_x), 0.0};
}

inline Freq random_freq(std::mt19937_64& rng, double lo = 0.1, double hi = 10.0, double gap = 0.05) {
  std::uniform_real_distribution<double> u(lo, hi);
  for (;;) {
    Freq f{u(rng), u(rng)};
    if (std::abs(f.w1 - f.w2) > gap) return f;
  }
}

inline Vec4 random_state(std::mt19937_64& rng, double r = 1.0) {
  std::uniform_real_distribution<double> u(-r, r);
  return {u(rng), u(rng), u(rng), u(rng)};
}

}  // namespace oracle
