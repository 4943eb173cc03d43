#include "puo/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>
#include <thread>

namespace puo::dynamics {

ModeAmplitudes mode_decompose(const PUParams& params, const JetState& z) {
  const double w1 = params.omega1, w2 = params.omega2;
  const double s1 = w1 * w1, s2 = w2 * w2;
  // Real parts from (q, q''), imaginary parts from (q', q''').
  const double re1 = (s2 * z.q + z.qdd) / (2.0 * (s2 - s1));
  const double re2 = (s1 * z.q + z.qdd) / (2.0 * (s1 - s2));
  const double u1 = (s2 * z.qd + z.qddd) / (s2 - s1);
  const double u2 = (s1 * z.qd + z.qddd) / (s1 - s2);
  return {{re1, u1 / (2.0 * w1)}, {re2, u2 / (2.0 * w2)}};
}

JetState reconstruct(const PUParams& params, const ModeAmplitudes& m, double t) {
  const double w1 = params.omega1, w2 = params.omega2;
  const std::complex<double> b1 = m.a1 * std::polar(1.0, -w1 * t);
  const std::complex<double> b2 = m.a2 * std::polar(1.0, -w2 * t);
  JetState z;
  z.q = 2.0 * (b1.real() + b2.real());
  z.qd = 2.0 * (w1 * b1.imag() + w2 * b2.imag());
  z.qdd = -2.0 * (w1 * w1 * b1.real() + w2 * w2 * b2.real());
  z.qddd = -2.0 * (w1 * w1 * w1 * b1.imag() + w2 * w2 * w2 * b2.imag());
  return z;
}

JetState free_solution(const PUParams& params, const JetState& z0, double t) {
  return reconstruct(params, mode_decompose(params, z0), t);
}

ModeEnergy mode_energy(const PUParams& params, const ModeAmplitudes& m) {
  const double s1 = params.omega1 * params.omega1, s2 = params.omega2 * params.omega2;
  const double r1 = s1 * (s1 - s2);
  const double r2 = s2 * (s1 - s2);
  ModeEnergy e;
  e.e1 = 2.0 * r1 * std::norm(m.a1);
  e.e2 = -2.0 * r2 * std::norm(m.a2);
  e.total = e.e1 + e.e2;
  return e;
}

double default_escape_radius(const JetState& z0) { return 1e3 * std::max(1.0, z0.vec().norm()); }

namespace {

Trajectory finish(const PUParams& params, const VectorField& field, Chart chart, double t_end,
                  const RunOptions& options, double radius, const integrator::Result& raw,
                  const Mat4* to_jet) {
  Trajectory tr;
  tr.times = raw.times;
  tr.escaped = raw.escaped;
  tr.escape_time = raw.escape_time;
  tr.max_norm = raw.max_norm;
  const QuadraticObservable f1 = h1(params);
  const QuadraticObservable f2 = h2(params);
  tr.states.reserve(raw.states.size());
  for (const Vec4& s : raw.states) {
    const Vec4 z = to_jet ? Vec4(*to_jet * s) : s;
    tr.states.push_back(JetState::from(z));
    const double e1 = f1(z);
    tr.h1_series.push_back(e1);
    tr.h2_series.push_back(f2(z));
    tr.hint_series.push_back(e1 + (field.potential ? field.potential->value(z[0]) : 0.0));
  }
  auto drift = [](const std::vector<double>& v) {
    double d = 0.0;
    for (double x : v) d = std::max(d, std::abs(x - v.front()));
    return d;
  };
  TrajectoryMeta& m = tr.meta;
  m.params = params;
  if (field.potential) {
    m.potential = field.potential->description;
    m.lambda = field.potential->lambda;
  }
  m.interaction_sign = field.interaction_sign;
  m.chart = chart;
  m.t_end = t_end;
  m.tol = options.tol;
  m.sample_rate = options.sample_rate;
  m.escape_radius = radius;
  m.accepted_steps = raw.accepted_steps;
  m.rejected_steps = raw.rejected_steps;
  m.h1_drift = drift(tr.h1_series);
  m.h2_drift = drift(tr.h2_series);
  m.hint_drift = drift(tr.hint_series);
  const double r2 = tr.states.front().vec().squaredNorm();
  auto reach = [&](const QuadraticObservable& f) {
    Eigen::SelfAdjointEigenSolver<Mat4> eig(f.coeffs(), Eigen::EigenvaluesOnly);
    return std::max(1.0, 0.5 * eig.eigenvalues().cwiseAbs().maxCoeff() * r2);
  };
  m.h1_relative_drift = m.h1_drift / reach(f1);
  m.h2_relative_drift = m.h2_drift / reach(f2);
  m.drift_tolerance = 100.0 * options.tol * std::max(1.0, std::abs(tr.h1_series.front()));
  return tr;
}

}  // namespace

Trajectory integrate(const PUParams& params, const VectorField& field, const JetState& z0,
                     double t_end, const RunOptions& options) {
  integrator::Settings s;
  s.tol = options.tol;
  s.sample_rate = options.sample_rate;
  const double radius = options.escape_radius.value_or(default_escape_radius(z0));
  s.escape_radius = radius;
  const auto raw = integrator::integrate([&](const Vec4& z) { return field.flow(z); }, z0.vec(),
                                         t_end, s);
  return finish(params, field, Chart::jet, t_end, options, radius, raw, nullptr);
}

Trajectory integrate_ostrogradsky(const PUParams& params, const VectorField& field,
                                  const OstroState& s0, double t_end, const RunOptions& options) {
  const Mat4 m = jet_to_ostro_matrix(params);
  const Mat4 t = ostro_to_jet_matrix(params);
  const JetState z0 = ostro_to_jet(params, s0);
  integrator::Settings s;
  s.tol = options.tol;
  s.sample_rate = options.sample_rate;
  const double radius = options.escape_radius.value_or(default_escape_radius(z0));
  s.escape_radius = radius;
  s.norm = [&](const Vec4& v) { return (t * v).norm(); };
  const auto raw = integrator::integrate([&](const Vec4& v) { return Vec4(m * field.flow(t * v)); },
                                         s0.vec(), t_end, s);
  return finish(params, field, Chart::ostrogradsky, t_end, options, radius, raw, &t);
}

RunawayVerdict runaway_scan(const PUParams& params, const Potential& potential, const JetState& z0,
                            double t_end, std::optional<double> escape_radius, double tol) {
  const double radius = escape_radius.value_or(default_escape_radius(z0));
  if (!(radius > z0.vec().norm())) {
    std::ostringstream msg;
    msg << "escape radius " << radius << " must exceed |z0| = " << z0.vec().norm();
    throw Error(ErrorKind::PreconditionViolated, msg.str());
  }
  const VectorField field = interacting_vector_field(params, potential);
  integrator::Settings s;
  s.tol = tol;
  s.sample_rate = 0.0;
  s.escape_radius = radius;
  const auto raw = integrator::integrate([&](const Vec4& z) { return field.flow(z); }, z0.vec(),
                                         t_end, s);
  RunawayVerdict v;
  v.bounded = !raw.escaped;
  v.escape_time = raw.escape_time;
  v.max_norm = raw.max_norm;
  v.escape_radius = radius;
  return v;
}

ThresholdReport threshold_search(const PUParams& params, const JetState& z0, double t_end,
                                 double lambda_min, double lambda_max,
                                 const ThresholdOptions& options) {
  if (!(lambda_min >= 0.0) || !(lambda_max >= lambda_min) || !std::isfinite(lambda_max)) {
    throw Error(ErrorKind::InvalidArgument, "lambda range must satisfy 0 <= min <= max");
  }
  if (options.grid_points < 2 || options.bisection_steps < 0) {
    throw Error(ErrorKind::InvalidArgument, "grid needs at least 2 points");
  }
  ThresholdReport report;
  report.t_end = t_end;
  report.escape_radius = options.escape_radius.value_or(default_escape_radius(z0));
  report.lambda_min = lambda_min;
  report.lambda_max = lambda_max;

  std::vector<double> lambdas{lambda_min};
  if (lambda_max > lambda_min) {
    const int n = options.grid_points - 1;
    const double lo = std::max(lambda_min, lambda_max * 1e-3);
    for (int i = 0; i < n; ++i) {
      const double frac = n == 1 ? 1.0 : static_cast<double>(i) / (n - 1);
      const double l = lo * std::pow(lambda_max / lo, frac);
      if (l > lambdas.back()) lambdas.push_back(l);
    }
  }

  auto classify = [&](double lambda) {
    return runaway_scan(params, Potential::quartic(lambda), z0, t_end, report.escape_radius, options.tol);
  };

  // Grid points are independent runs; results are collected in lambda order.
  const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  report.grid.resize(lambdas.size());
  for (std::size_t start = 0; start < lambdas.size(); start += workers) {
    std::vector<std::future<RunawayVerdict>> batch;
    const std::size_t stop = std::min(lambdas.size(), start + workers);
    for (std::size_t i = start; i < stop; ++i) {
      batch.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred,
                                 classify, lambdas[i]));
    }
    for (std::size_t i = start; i < stop; ++i) report.grid[i] = {lambdas[i], batch[i - start].get()};
  }

  const auto first_escape = std::find_if(report.grid.begin(), report.grid.end(),
                                         [](const GridPoint& g) { return !g.verdict.bounded; });
  if (first_escape == report.grid.end()) {
    std::ostringstream msg;
    msg << "no escape for lambda in [" << lambda_min << ", " << lambda_max
        << "] up to t = " << t_end;
    throw Error(ErrorKind::AllBounded, msg.str());
  }
  if (first_escape == report.grid.begin()) {
    const bool all = std::none_of(report.grid.begin(), report.grid.end(),
                                  [](const GridPoint& g) { return g.verdict.bounded; });
    if (all) {
      std::ostringstream msg;
      msg << "escape for every lambda in [" << lambda_min << ", " << lambda_max << "]";
      throw Error(ErrorKind::AllUnbounded, msg.str());
    }
  }
  for (auto it = first_escape; it != report.grid.end(); ++it) {
    if (it->verdict.bounded) report.non_monotone = true;
  }

  if (first_escape == report.grid.begin()) {
    report.non_monotone = true;
    report.lambda_star = report.lambda_bounded = report.lambda_unbounded = first_escape->lambda;
    return report;
  }
  double lo = std::prev(first_escape)->lambda;
  double hi = first_escape->lambda;
  for (int i = 0; i < options.bisection_steps; ++i) {
    const double mid = 0.5 * (lo + hi);
    (classify(mid).bounded ? lo : hi) = mid;
  }
  report.lambda_bounded = lo;
  report.lambda_unbounded = hi;
  report.lambda_star = 0.5 * (lo + hi);
  return report;
}

}  // namespace puo::dynamics
