#include "puo/integrator.hpp"

#include "puo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace puo::integrator {

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

struct Dense {
  double t0 = 0.0;
  double h = 0.0;
  Vec4 r1, r2, r3, r4, r5;

  Vec4 operator()(double t) const {
    const double th = (t - t0) / h;
    const double th1 = 1.0 - th;
    return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
  }
};

double scaled_rms(const Vec4& v, const Vec4& ya, const Vec4& yb, double tol) {
  double acc = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double sk = tol + tol * std::max(std::abs(ya[i]), std::abs(yb[i]));
    acc += (v[i] / sk) * (v[i] / sk);
  }
  return std::sqrt(acc / 4.0);
}

double initial_step(const Rhs& f, const Vec4& y0, const Vec4& f0, double tol, double hmax) {
  const double dn0 = scaled_rms(y0, y0, y0, tol);
  const double dn1 = scaled_rms(f0, y0, y0, tol);
  double h = (dn0 < 1e-10 || dn1 < 1e-10) ? 1e-6 : 0.01 * dn0 / dn1;
  h = std::min(h, hmax);
  const Vec4 f1 = f(y0 + h * f0);
  const double dn2 = scaled_rms(f1 - f0, y0, y0, tol) / h;
  const double der = std::max(dn1, dn2);
  const double h1 = der <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der, 0.2);
  return std::min({100.0 * h, h1, hmax});
}

}  // namespace

Result integrate(const Rhs& f, const Vec4& y0, double t_end, const Settings& settings) {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) {
    throw Error(ErrorKind::InvalidArgument, "t_end must be positive and finite");
  }
  if (!(settings.tol >= 1e-13 && settings.tol <= 1e-3)) {
    throw Error(ErrorKind::InvalidArgument, "tol must lie in [1e-13, 1e-3]");
  }
  if (!(settings.sample_rate >= 0.0) || !std::isfinite(settings.sample_rate)) {
    throw Error(ErrorKind::InvalidArgument, "sample_rate must be non-negative");
  }
  const auto norm = settings.norm ? settings.norm : [](const Vec4& v) { return v.norm(); };
  const double tol = settings.tol;

  Result out;
  out.times.push_back(0.0);
  out.states.push_back(y0);
  out.max_norm = norm(y0);
  if (settings.escape_radius && out.max_norm >= *settings.escape_radius) {
    out.escaped = true;
    out.escape_time = 0.0;
    return out;
  }

  const double dt_sample = settings.sample_rate > 0.0 ? 1.0 / settings.sample_rate : 0.0;
  long next_sample = 1;
  auto sample_time = [&](long k) { return static_cast<double>(k) * dt_sample; };

  constexpr double safe = 0.9, beta = 0.04, expo1 = 0.25 - beta * 0.75;
  constexpr double fac_min = 0.2, fac_max = 10.0;
  double facold = 1e-4;
  bool last_rejected = false;

  double t = 0.0;
  Vec4 y = y0;
  Vec4 k1 = f(y);
  double h = initial_step(f, y, k1, tol, t_end);

  while (t < t_end) {
    if (t + h > t_end) h = t_end - t;
    if (h < 1e-14 * std::max(1.0, std::abs(t)) || !std::isfinite(h)) {
      std::ostringstream msg;
      msg << "step size underflow at t = " << t;
      throw StepUnderflowError(msg.str(), t);
    }
    const Vec4 k2 = f(y + h * a21 * k1);
    const Vec4 k3 = f(y + h * (a31 * k1 + a32 * k2));
    const Vec4 k4 = f(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vec4 k5 = f(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vec4 k6 = f(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Vec4 y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const Vec4 k7 = f(y1);
    const Vec4 err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    // error per unit step: the local error target scales with h
    double en = scaled_rms(err, y, y1, tol) / h;
    if (!std::isfinite(en) || !y1.allFinite()) en = 1e10;

    const double fac11 = std::pow(en, expo1);
    if (en <= 1.0) {
      double fac = fac11 / std::pow(facold, beta);
      fac = std::clamp(fac / safe, 1.0 / fac_max, 1.0 / fac_min);
      double hnew = h / fac;
      facold = std::max(en, 1e-4);
      ++out.accepted_steps;

      Dense dense;
      dense.t0 = t;
      dense.h = h;
      dense.r1 = y;
      dense.r2 = y1 - y;
      dense.r3 = h * k1 - dense.r2;
      dense.r4 = dense.r2 - h * k7 - dense.r3;
      dense.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      const double t1 = (t_end - (t + h) <= 1e-12 * std::max(1.0, t_end)) ? t_end : t + h;

      std::optional<double> escape;
      const double n1 = norm(y1);
      if (settings.escape_radius && n1 >= *settings.escape_radius) {
        double lo = t, hi = t1;
        for (int i = 0; i < 60; ++i) {
          const double mid = 0.5 * (lo + hi);
          (norm(dense(mid)) >= *settings.escape_radius ? hi : lo) = mid;
        }
        escape = hi;
      }
      const double horizon = escape ? *escape : t1;

      if (dt_sample > 0.0) {
        while (sample_time(next_sample) < horizon &&
               sample_time(next_sample) <= t_end - 1e-12 * std::max(1.0, t_end)) {
          out.times.push_back(sample_time(next_sample));
          out.states.push_back(dense(sample_time(next_sample)));
          ++next_sample;
        }
      }
      if (escape) {
        const Vec4 ye = dense(*escape);
        out.times.push_back(*escape);
        out.states.push_back(ye);
        out.escaped = true;
        out.escape_time = *escape;
        out.max_norm = std::max({out.max_norm, norm(ye), *settings.escape_radius});
        return out;
      }
      out.max_norm = std::max(out.max_norm, n1);
      if (dt_sample > 0.0 && std::abs(sample_time(next_sample) - t1) <= 1e-12 * std::max(1.0, t_end)) {
        ++next_sample;
      }

      t = t1;
      y = y1;
      k1 = k7;
      if (last_rejected) hnew = std::min(hnew, h);
      last_rejected = false;
      h = hnew;
    } else {
      ++out.rejected_steps;
      h = h / std::min(1.0 / fac_min, fac11 / safe);
      last_rejected = true;
    }
  }
  out.times.push_back(t_end);
  out.states.push_back(y);
  return out;
}

}  // namespace puo::integrator
