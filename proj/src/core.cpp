#include "puo/core.hpp"

#include <cmath>
#include <sstream>

namespace puo {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateFrequencies: return "degenerate-frequencies";
    case ErrorKind::ChartMismatch: return "chart-mismatch";
    case ErrorKind::SingularBlend: return "singular-blend";
    case ErrorKind::SingularHessian: return "singular-hessian";
    case ErrorKind::NotAntisymmetric: return "not-antisymmetric";
    case ErrorKind::InsufficientSamples: return "insufficient-samples";
    case ErrorKind::ComplexBranch: return "complex-branch";
    case ErrorKind::DegenerateModel: return "degenerate-model";
    case ErrorKind::PreconditionViolated: return "precondition-violated";
    case ErrorKind::NoSolution: return "no-solution";
    case ErrorKind::NonUnique: return "non-unique";
    case ErrorKind::SingularMap: return "singular-map";
    case ErrorKind::NotInSpan: return "not-in-span";
    case ErrorKind::SingularCoefficient: return "singular-coefficient";
    case ErrorKind::StepUnderflow: return "step-underflow";
    case ErrorKind::AllBounded: return "all-bounded";
    case ErrorKind::AllUnbounded: return "all-unbounded";
    case ErrorKind::InvalidArgument: return "invalid-argument";
  }
  return "unknown";
}

const char* to_string(Chart chart) {
  return chart == Chart::jet ? "jet" : "ostrogradsky";
}

PUParams make_params(double omega1, double omega2) {
  if (!(omega1 > 0.0) || !(omega2 > 0.0) || !std::isfinite(omega1) || !std::isfinite(omega2)) {
    std::ostringstream msg;
    msg << "frequencies must be positive and finite, got (" << omega1 << ", " << omega2 << ")";
    throw Error(ErrorKind::DegenerateFrequencies, msg.str());
  }
  if (omega1 == omega2) {
    std::ostringstream msg;
    msg << "frequencies must be distinct, got omega1 = omega2 = " << omega1;
    throw Error(ErrorKind::DegenerateFrequencies, msg.str());
  }
  const double w1sq = omega1 * omega1;
  const double w2sq = omega2 * omega2;
  return PUParams{omega1, omega2, w1sq + w2sq, w1sq * w2sq};
}

Mat4 jet_to_ostro_matrix(const PUParams& params) {
  Mat4 m;
  m << 1, 0, 0, 0,
       0, 1, 0, 0,
       0, -params.alpha, 0, -1,
       0, 0, 1, 0;
  return m;
}

Mat4 ostro_to_jet_matrix(const PUParams& params) {
  Mat4 t;
  t << 1, 0, 0, 0,
       0, 1, 0, 0,
       0, 0, 0, 1,
       0, -params.alpha, -1, 0;
  return t;
}

OstroState jet_to_ostro(const PUParams& params, const JetState& z) {
  return {z.q, z.qd, -params.alpha * z.qd - z.qddd, z.qdd};
}

JetState ostro_to_jet(const PUParams& params, const OstroState& s) {
  return {s.x1, s.x2, s.p2, -s.p1 - params.alpha * s.x2};
}

QuadraticObservable::QuadraticObservable(const Mat4& coeffs, Chart chart) : chart_(chart) {
  const double scale = std::max(1.0, linalg::scale_of(coeffs));
  if (linalg::antisymmetric_part_norm(coeffs) > EPS_ALGEBRA * scale) {
    throw Error(ErrorKind::InvalidArgument, "quadratic observable coefficients are not symmetric");
  }
  s_ = 0.5 * (coeffs + coeffs.transpose());
}

QuadraticObservable QuadraticObservable::operator+(const QuadraticObservable& other) const {
  if (chart_ != other.chart_) throw Error(ErrorKind::ChartMismatch, "adding observables from different charts");
  return QuadraticObservable(s_ + other.s_, chart_);
}

QuadraticObservable QuadraticObservable::operator*(double c) const {
  return QuadraticObservable(c * s_, chart_);
}

PoissonTensor::PoissonTensor(const Mat4& j, Chart chart) : chart_(chart) {
  const double scale = std::max(1.0, linalg::scale_of(j));
  const double sym = linalg::symmetric_part_norm(j);
  if (sym > EPS_ALGEBRA * scale) {
    throw NotAntisymmetricError("candidate Poisson tensor has a symmetric part", sym);
  }
  j_ = 0.5 * (j - j.transpose());
}

Potential Potential::quartic(double lambda) {
  Potential w;
  w.value = [lambda](double q) { return 0.25 * lambda * q * q * q * q; };
  w.first = [lambda](double q) { return lambda * q * q * q; };
  w.second = [lambda](double q) { return 3.0 * lambda * q * q; };
  std::ostringstream d;
  d << "quartic(lambda=" << lambda << ")";
  w.description = d.str();
  w.lambda = lambda;
  return w;
}

Vec4 VectorField::flow(const Vec4& z) const {
  Vec4 f = linear * z;
  if (potential) f[3] += interaction_sign * potential->first(z[0]);
  return f;
}

Mat4 VectorField::jacobian(const Vec4& z) const {
  Mat4 d = linear;
  if (potential) d(3, 0) += interaction_sign * potential->second(z[0]);
  return d;
}

QuadraticObservable h1(const PUParams& params) {
  // -q' q''' + q''^2/2 - beta q^2/2 - alpha q'^2/2
  Mat4 s = Mat4::Zero();
  s(0, 0) = -params.beta;
  s(1, 1) = -params.alpha;
  s(2, 2) = 1.0;
  s(1, 3) = s(3, 1) = -1.0;
  return QuadraticObservable(s);
}

QuadraticObservable h2_with_sign(const PUParams& params, int accel_sign) {
  // q q'' - q'^2/2 + sign (alpha / 2 beta) q''^2 + q'''^2 / (2 beta)
  Mat4 s = Mat4::Zero();
  s(0, 2) = s(2, 0) = 1.0;
  s(1, 1) = -1.0;
  s(2, 2) = accel_sign * params.alpha / params.beta;
  s(3, 3) = 1.0 / params.beta;
  return QuadraticObservable(s);
}

QuadraticObservable h2(const PUParams& params) { return h2_with_sign(params, kH2AccelSign); }

Mat4 flow_matrix(const PUParams& params) {
  Mat4 a;
  a << 0, 1, 0, 0,
       0, 0, 1, 0,
       0, 0, 0, 1,
       -params.beta, 0, -params.alpha, 0;
  return a;
}

PoissonTensor j1(const PUParams& params, Chart chart) {
  Mat4 j = Mat4::Zero();
  if (chart == Chart::ostrogradsky) {
    j(0, 2) = 1.0;
    j(1, 3) = 1.0;
  } else {
    j(0, 3) = -1.0;
    j(1, 2) = 1.0;
    j(2, 3) = params.alpha;
  }
  return PoissonTensor(j - j.transpose(), chart);
}

PoissonTensor j2_with_sign(const PUParams& params, int position_velocity_sign) {
  Mat4 j = Mat4::Zero();
  j(0, 1) = position_velocity_sign;
  j(2, 3) = params.beta;
  return PoissonTensor(j - j.transpose());
}

namespace {

// min|eig| / max|eig| of a symmetric matrix; 0 for the zero matrix.
double inverse_condition(const Mat4& s) {
  Eigen::SelfAdjointEigenSolver<Mat4> eig(s, Eigen::EigenvaluesOnly);
  const Vec4 mags = eig.eigenvalues().cwiseAbs();
  const double hi = mags.maxCoeff();
  return hi == 0.0 ? 0.0 : mags.minCoeff() / hi;
}

}  // namespace

PoissonTensor poisson_for_hamiltonian(const Mat4& flow, const QuadraticObservable& hamiltonian) {
  const Mat4& s = hamiltonian.coeffs();
  if (inverse_condition(s) < EPS_SINGULAR) {
    throw Error(ErrorKind::SingularHessian, "Hamiltonian Hessian is not invertible");
  }
  const Mat4 candidate = flow * s.inverse();
  return PoissonTensor(candidate, hamiltonian.chart());
}

PoissonTensor j2(const PUParams& params) {
  return poisson_for_hamiltonian(flow_matrix(params), h2(params));
}

QuadraticObservable blend_h(const PUParams& params, double c1, double c2) {
  return QuadraticObservable(c1 * h1(params).coeffs() + c2 * h2(params).coeffs());
}

BlendTensor blend_j(const PUParams& params, double c1, double c2) {
  const QuadraticObservable blended = blend_h(params, c1, c2);
  if (inverse_condition(blended.coeffs()) < EPS_SINGULAR) {
    std::ostringstream msg;
    msg << "blend (c1, c2) = (" << c1 << ", " << c2 << ") has a singular Hessian";
    throw Error(ErrorKind::SingularBlend, msg.str());
  }
  BlendTensor out;
  out.tensor = poisson_for_hamiltonian(flow_matrix(params), blended);

  const double w1sq = params.omega1 * params.omega1;
  const double w2sq = params.omega2 * params.omega2;
  const Mat4& t = out.tensor.matrix();
  const Mat4 j1m = j1(params).matrix();
  const Mat4 j2m = j2(params).matrix();

  auto residual = [&](double a1, double a2, const Mat4& second) {
    const double denom = (a1 - a2 * w1sq) * (a1 - a2 * w2sq);
    if (denom == 0.0) return std::numeric_limits<double>::infinity();
    const Mat4 closed = (a1 * j1m + params.beta * a2 * second) / denom;
    return (closed - t).cwiseAbs().maxCoeff();
  };
  out.literal_form_residual = residual(c1, c2, j2m);
  out.charge_normalized_residual = residual(c1, -c2 / params.beta, -j2m / params.beta);

  const Mat4 derived = (params.beta * c1 * j1m + c2 * j2m) / ((c1 * w1sq + c2) * (c1 * w2sq + c2));
  out.derived_form_residual = (derived - t).cwiseAbs().maxCoeff();
  return out;
}

VectorField free_vector_field(const PUParams& params) {
  VectorField v;
  v.linear = flow_matrix(params);
  return v;
}

int resolve_interaction_sign(const PUParams& params, const Potential& potential) {
  const Vec4 probe(0.7, -0.3, 0.4, 0.9);
  const double force = potential.first(probe[0]);
  if (force == 0.0) return kInteractionSign;
  const QuadraticObservable energy = h1(params);
  const Vec4 grad = energy.gradient(probe);
  const Vec4 free_flow = flow_matrix(params) * probe;
  // d/dt (H1 + W) along z' = A z + s W' e4.
  auto rate = [&](int s) {
    return grad.dot(free_flow) + s * force * grad[3] + force * probe[1];
  };
  const double plus = std::abs(rate(+1));
  const double minus = std::abs(rate(-1));
  const double scale = std::abs(force * probe[1]);
  const int s = plus <= minus ? +1 : -1;
  if (std::min(plus, minus) > 1e-12 * std::max(1.0, scale)) {
    throw Error(ErrorKind::InvalidArgument, "no interaction sign conserves H1 + W");
  }
  return s;
}

VectorField interacting_vector_field(const PUParams& params, const Potential& potential) {
  VectorField v = free_vector_field(params);
  v.interaction_sign = resolve_interaction_sign(params, potential);
  v.potential = potential;
  return v;
}

QuadraticObservable poisson_bracket(const QuadraticObservable& f, const QuadraticObservable& g,
                                    const PoissonTensor& j) {
  if (f.chart() != g.chart() || f.chart() != j.chart()) {
    throw Error(ErrorKind::ChartMismatch, "bracket arguments live in different charts");
  }
  const Mat4 m = f.coeffs() * j.matrix() * g.coeffs();
  return QuadraticObservable(m + m.transpose(), f.chart());
}

double linear_bracket(const Vec4& u, const Vec4& v, const PoissonTensor& j) {
  return u.dot(j.matrix() * v);
}

PoissonTensor to_jet(const PUParams& params, const PoissonTensor& j) {
  if (j.chart() == Chart::jet) return j;
  const Mat4 t = ostro_to_jet_matrix(params);
  return PoissonTensor(t * j.matrix() * t.transpose(), Chart::jet);
}

PoissonTensor to_ostrogradsky(const PUParams& params, const PoissonTensor& j) {
  if (j.chart() == Chart::ostrogradsky) return j;
  const Mat4 m = jet_to_ostro_matrix(params);
  return PoissonTensor(m * j.matrix() * m.transpose(), Chart::ostrogradsky);
}

QuadraticObservable to_jet(const PUParams& params, const QuadraticObservable& f) {
  if (f.chart() == Chart::jet) return f;
  // F_jet(z) = F_ostro(M z)
  const Mat4 m = jet_to_ostro_matrix(params);
  return QuadraticObservable(m.transpose() * f.coeffs() * m, Chart::jet);
}

QuadraticObservable to_ostrogradsky(const PUParams& params, const QuadraticObservable& f) {
  if (f.chart() == Chart::ostrogradsky) return f;
  const Mat4 t = ostro_to_jet_matrix(params);
  return QuadraticObservable(t.transpose() * f.coeffs() * t, Chart::ostrogradsky);
}

double jacobi_residual(const std::function<Mat4(const Vec4&)>& field, const Vec4& z, double step) {
  const Mat4 j = field(z);
  std::array<Mat4, 4> dj;
  for (int l = 0; l < 4; ++l) {
    Vec4 e = Vec4::Zero();
    e[l] = step;
    dj[l] = (field(z + e) - field(z - e)) / (2.0 * step);
  }
  double worst = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c) {
        double sum = 0.0;
        for (int l = 0; l < 4; ++l) {
          sum += j(a, l) * dj[l](b, c) + j(b, l) * dj[l](c, a) + j(c, l) * dj[l](a, b);
        }
        worst = std::max(worst, std::abs(sum));
      }
  return worst;
}

}  // namespace puo
