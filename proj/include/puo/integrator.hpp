#pragma once

// Dormand-Prince 5(4) with PI step control and the standard continuous extension.

#include "puo/linalg.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace puo::integrator {

using Rhs = std::function<Vec4(const Vec4&)>;

struct Settings {
  /// Used as both rtol and atol.
  double tol = 1e-10;
  /// Dense samples per unit time; 0 keeps only the initial and final states.
  double sample_rate = 10.0;
  /// Integration stops the first time norm(y) reaches this value.
  std::optional<double> escape_radius;
  /// Escape norm; Euclidean when empty.
  std::function<double(const Vec4&)> norm;
};

struct Result {
  std::vector<double> times;
  std::vector<Vec4> states;
  bool escaped = false;
  std::optional<double> escape_time;
  /// Largest norm seen at step endpoints (and at the escape point).
  double max_norm = 0.0;
  long accepted_steps = 0;
  long rejected_steps = 0;
};

/// Integrates y' = f(y) from t = 0 to t_end. Throws StepUnderflowError when the step
/// size collapses and InvalidArgument for bad settings.
Result integrate(const Rhs& f, const Vec4& y0, double t_end, const Settings& settings);

}  // namespace puo::integrator
