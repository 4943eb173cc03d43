#pragma once

// Model parameters, phase-space charts, the two Hamiltonian structures and the
// (free and interacting) flow of the fourth-order oscillator
//
//     q'''' + alpha q'' + beta q = 0,   alpha = w1^2 + w2^2,  beta = w1^2 w2^2.
//
// The jet chart z = (q, q', q'', q''') is the canonical internal chart; the
// Ostrogradsky chart (x1, x2, p1, p2) is a linear view of it.

#include "puo/config.hpp"
#include "puo/errors.hpp"
#include "puo/linalg.hpp"

#include <functional>
#include <optional>
#include <string>

namespace puo {

struct PUParams {
  double omega1 = 0.0;
  double omega2 = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};

/// Throws ErrorKind::DegenerateFrequencies unless omega1, omega2 > 0 and distinct.
PUParams make_params(double omega1, double omega2);

struct JetState {
  double q = 0.0;
  double qd = 0.0;
  double qdd = 0.0;
  double qddd = 0.0;

  Vec4 vec() const { return {q, qd, qdd, qddd}; }
  static JetState from(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }
};

struct OstroState {
  double x1 = 0.0;
  double x2 = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;

  Vec4 vec() const { return {x1, x2, p1, p2}; }
  static OstroState from(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }
};

enum class Chart { jet, ostrogradsky };
const char* to_string(Chart chart);

// Linear chart maps: s = M z with M = jet_to_ostro_matrix, z = T s with T = its inverse.
Mat4 jet_to_ostro_matrix(const PUParams& params);
Mat4 ostro_to_jet_matrix(const PUParams& params);

OstroState jet_to_ostro(const PUParams& params, const JetState& z);
JetState ostro_to_jet(const PUParams& params, const OstroState& s);

/// F(z) = 1/2 z^T S z with S symmetric.
class QuadraticObservable {
 public:
  QuadraticObservable() = default;
  /// Symmetrizes `coeffs`; throws InvalidArgument if it is not symmetric to EPS_ALGEBRA (relative).
  explicit QuadraticObservable(const Mat4& coeffs, Chart chart = Chart::jet);

  const Mat4& coeffs() const { return s_; }
  const Mat4& hessian() const { return s_; }
  Chart chart() const { return chart_; }

  double operator()(const Vec4& z) const { return 0.5 * z.dot(s_ * z); }
  double operator()(const JetState& z) const { return (*this)(z.vec()); }
  Vec4 gradient(const Vec4& z) const { return s_ * z; }

  QuadraticObservable operator+(const QuadraticObservable& other) const;
  QuadraticObservable operator*(double c) const;

 private:
  Mat4 s_ = Mat4::Zero();
  Chart chart_ = Chart::jet;
};

/// Constant antisymmetric bivector; {F, G} = grad F . J grad G and z' = J grad H.
class PoissonTensor {
 public:
  PoissonTensor() = default;
  /// Throws NotAntisymmetricError if `j` is not antisymmetric to EPS_ALGEBRA (relative);
  /// stores the exactly antisymmetric part.
  explicit PoissonTensor(const Mat4& j, Chart chart = Chart::jet);

  const Mat4& matrix() const { return j_; }
  Chart chart() const { return chart_; }
  double operator()(int i, int k) const { return j_(i, k); }

 private:
  Mat4 j_ = Mat4::Zero();
  Chart chart_ = Chart::jet;
};

/// Interaction potential W(q) with its first two derivatives.
struct Potential {
  std::function<double(double)> value;
  std::function<double(double)> first;
  std::function<double(double)> second;
  std::string description;
  double lambda = 0.0;

  /// W(q) = lambda q^4 / 4.
  static Potential quartic(double lambda);
};

/// z' = A z + s W'(q) e4, with e4 the q''' direction.
struct VectorField {
  Mat4 linear = Mat4::Zero();
  std::optional<Potential> potential;
  int interaction_sign = kInteractionSign;

  Vec4 flow(const Vec4& z) const;
  /// Flow Jacobian DV(z).
  Mat4 jacobian(const Vec4& z) const;
  bool is_linear() const { return !potential.has_value(); }
};

QuadraticObservable h1(const PUParams& params);
/// Alternative Hamiltonian with an explicit sign on the q''^2 term; h2() uses kH2AccelSign.
QuadraticObservable h2_with_sign(const PUParams& params, int accel_sign);
QuadraticObservable h2(const PUParams& params);

/// Free flow matrix (companion form); equals j1 * S1.
Mat4 flow_matrix(const PUParams& params);

PoissonTensor j1(const PUParams& params, Chart chart = Chart::jet);
/// Closed-form candidate  sign * dq^dq' + beta dq''^dq'''.
PoissonTensor j2_with_sign(const PUParams& params, int position_velocity_sign);
/// The shipped second structure: A * S2^{-1} (same construction path as solve_bihamiltonian).
PoissonTensor j2(const PUParams& params);

/// Constant tensor J with J * grad H = A z for all z, i.e. J = A S^{-1}. Throws
/// SingularHessian when |det S| < EPS_SINGULAR and NotAntisymmetricError when A S^{-1}
/// has a symmetric part (no constant Poisson structure pairs with this Hamiltonian).
PoissonTensor poisson_for_hamiltonian(const Mat4& flow, const QuadraticObservable& hamiltonian);

QuadraticObservable blend_h(const PUParams& params, double c1, double c2);

struct BlendTensor {
  PoissonTensor tensor;
  /// Max-abs difference to (c1 J1 + beta c2 J2) / ((c1 - c2 w1^2)(c1 - c2 w2^2)) read
  /// with the shipped J2 (the literal closed form; generally nonzero).
  double literal_form_residual = 0.0;
  /// Same closed form read in the X3-charge normalization (H2 -> -beta H2, J2 -> -J2/beta,
  /// c2 -> -c2/beta); zero when the closed form is correct.
  double charge_normalized_residual = 0.0;
  /// Derived form (beta c1 J1 + c2 J2) / ((c1 w1^2 + c2)(c1 w2^2 + c2)).
  double derived_form_residual = 0.0;
};

/// Unique constant tensor with J * grad(c1 H1 + c2 H2) = A z, built as A (c1 S1 + c2 S2)^{-1}.
/// Throws SingularBlend when the blended Hessian is singular (c1 w_i^2 + c2 = 0).
BlendTensor blend_j(const PUParams& params, double c1, double c2);

VectorField free_vector_field(const PUParams& params);

/// Sign s in z''' += s W'(q) that makes H1 + W a constant of motion, i.e. the flow of
/// the Euler-Lagrange equation of L - W. Evaluated at a generic probe state.
int resolve_interaction_sign(const PUParams& params, const Potential& potential);

VectorField interacting_vector_field(const PUParams& params, const Potential& potential);

/// {F, G}_J as a quadratic: matrix S_F J S_G + (S_F J S_G)^T. Throws ChartMismatch.
QuadraticObservable poisson_bracket(const QuadraticObservable& f, const QuadraticObservable& g,
                                    const PoissonTensor& j);

/// Bracket of the linear functions u.z and v.z: u^T J v.
double linear_bracket(const Vec4& u, const Vec4& v, const PoissonTensor& j);

/// Transport between charts. A tensor maps by congruence T J T^T, an observable by
/// pullback M^T S M, with T = ostro_to_jet_matrix and M = jet_to_ostro_matrix.
PoissonTensor to_jet(const PUParams& params, const PoissonTensor& j);
PoissonTensor to_ostrogradsky(const PUParams& params, const PoissonTensor& j);
QuadraticObservable to_jet(const PUParams& params, const QuadraticObservable& f);
QuadraticObservable to_ostrogradsky(const PUParams& params, const QuadraticObservable& f);

/// Jacobiator of a (possibly position-dependent) bivector field at z by central differences.
double jacobi_residual(const std::function<Mat4(const Vec4&)>& field, const Vec4& z,
                       double step = 1e-5);

}  // namespace puo
