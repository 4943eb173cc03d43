#pragma once

// Free and interacting trajectories, normal-mode decomposition of the free motion, and
// runaway detection for the quartic coupling.

#include "puo/core.hpp"
#include "puo/integrator.hpp"

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace puo::dynamics {

/// q(t) = sum_i (a_i e^{-i w_i t} + c.c.).
struct ModeAmplitudes {
  std::complex<double> a1;
  std::complex<double> a2;
};

ModeAmplitudes mode_decompose(const PUParams& params, const JetState& z);

/// Jet state at time t of the free motion with the given amplitudes at t = 0.
JetState reconstruct(const PUParams& params, const ModeAmplitudes& m, double t = 0.0);

/// Closed-form free solution through z0.
JetState free_solution(const PUParams& params, const JetState& z0, double t);

struct ModeEnergy {
  double e1 = 0.0;
  double e2 = 0.0;
  double total = 0.0;
};

/// e1 = 2 R1 |a1|^2, e2 = -2 R2 |a2|^2 with R_i = w_i^2 (w1^2 - w2^2).
ModeEnergy mode_energy(const PUParams& params, const ModeAmplitudes& m);

struct RunOptions {
  double tol = 1e-10;
  double sample_rate = 10.0;
  /// Defaults to 1e3 * max(1, |z0|).
  std::optional<double> escape_radius;
};

double default_escape_radius(const JetState& z0);

struct TrajectoryMeta {
  PUParams params;
  std::string potential = "none";
  double lambda = 0.0;
  int interaction_sign = kInteractionSign;
  Chart chart = Chart::jet;
  double t_end = 0.0;
  double tol = 0.0;
  double sample_rate = 0.0;
  double escape_radius = 0.0;
  long accepted_steps = 0;
  long rejected_steps = 0;
  /// max |H(t) - H(0)| over the samples.
  double h1_drift = 0.0;
  double h2_drift = 0.0;
  double hint_drift = 0.0;
  /// Drifts divided by max(1, |S|_2 |z0|^2 / 2), the size the quadratic can reach at z0.
  double h1_relative_drift = 0.0;
  double h2_relative_drift = 0.0;
  /// 100 tol max(1, |H1(0)|); the free-run bound on h1_drift.
  double drift_tolerance = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<JetState> states;
  std::vector<double> h1_series;
  std::vector<double> h2_series;
  /// H1 + W(q), the conserved energy of the interacting flow.
  std::vector<double> hint_series;
  bool escaped = false;
  std::optional<double> escape_time;
  double max_norm = 0.0;
  TrajectoryMeta meta;
};

/// Integrates in the jet chart. Escape beyond the radius ends the run early (not an error).
Trajectory integrate(const PUParams& params, const VectorField& field, const JetState& z0,
                     double t_end, const RunOptions& options = {});

/// Integrates s' = M V(T s) in the Ostrogradsky chart; states are reported in the jet chart
/// and the escape radius is measured there.
Trajectory integrate_ostrogradsky(const PUParams& params, const VectorField& field,
                                  const OstroState& s0, double t_end, const RunOptions& options = {});

struct RunawayVerdict {
  bool bounded = true;
  std::optional<double> escape_time;
  double max_norm = 0.0;
  double escape_radius = 0.0;
};

/// Throws PreconditionViolated when escape_radius <= |z0|.
RunawayVerdict runaway_scan(const PUParams& params, const Potential& potential, const JetState& z0,
                            double t_end, std::optional<double> escape_radius = std::nullopt,
                            double tol = 1e-10);

struct ThresholdOptions {
  int grid_points = 32;
  int bisection_steps = 40;
  double tol = 1e-10;
  std::optional<double> escape_radius;
};

struct GridPoint {
  double lambda = 0.0;
  RunawayVerdict verdict;
};

struct ThresholdReport {
  double lambda_star = 0.0;
  /// Bracket left after bisection: bounded at lower, escape at upper.
  double lambda_bounded = 0.0;
  double lambda_unbounded = 0.0;
  std::vector<GridPoint> grid;
  bool non_monotone = false;
  double t_end = 0.0;
  double escape_radius = 0.0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

/// Grid {lambda_min} + geometric points up to lambda_max, then bisection on the first
/// bounded -> unbounded transition. Throws AllBounded / AllUnbounded, InvalidArgument for an
/// inverted or negative range.
ThresholdReport threshold_search(const PUParams& params, const JetState& z0, double t_end,
                                 double lambda_min, double lambda_max,
                                 const ThresholdOptions& options = {});

}  // namespace puo::dynamics
