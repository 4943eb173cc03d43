#pragma once

// Linear Lie point symmetries of the flow, the charges they generate, and the
// constant Poisson tensors compatible with a (possibly interacting) flow.

#include "puo/core.hpp"

#include <cstdint>
#include <vector>

namespace puo::symmetry {

/// Generator X = (Xi z) . d/dz of a linear point symmetry.
struct LinearSymmetry {
  Mat4 xi = Mat4::Zero();

  /// ||[Xi, A]||_F for the given flow matrix.
  double commutator_norm(const Mat4& flow) const;
};

struct SymmetryBasis {
  std::vector<LinearSymmetry> generators;
  int dimension = 0;

  /// Largest ||[X_i, X_j]||_F over pairs.
  double max_pairwise_commutator() const;
  /// Smallest singular value of the Gram matrix of vectorized generators, relative to the largest.
  double independence() const;
  /// Relative residual of projecting `m` onto the span of the generators.
  double projection_residual(const Mat4& m) const;
};

/// Null space of Xi -> Xi A - A Xi (the commutant of A), Frobenius-orthonormal.
SymmetryBasis commutant_basis(const Mat4& flow);

/// X1 = A, X2 = I/2, X3 = A^2/2, X4 = -beta A^{-1}, written out entry by entry from the
/// printed generator list (with the q' in the first component of X4).
SymmetryBasis printed_generators(const PUParams& params);

/// X4 as literally printed, with alpha q (not alpha q') in its d/dq component.
LinearSymmetry printed_x4_literal(const PUParams& params);

/// X(F) = (Xi z) . grad F, a quadratic with matrix Xi^T S + S Xi.
QuadraticObservable apply_symmetry(const LinearSymmetry& x, const QuadraticObservable& f);

/// Least-squares c with F ~ c G, plus ||F - c G|| / ||F||.
struct Proportionality {
  double factor = 0.0;
  double relative_residual = 0.0;
};
Proportionality fit_proportional(const QuadraticObservable& f, const QuadraticObservable& g);

/// A generated charge reported raw and against the shipped H2.
struct ChargeReport {
  QuadraticObservable raw;
  Proportionality against_h2;
  /// Max |{charge, H1}_J1| coefficient; zero for a constant of motion.
  double bracket_with_h1 = 0.0;
};
ChargeReport charge_report(const PUParams& params, const LinearSymmetry& x);

/// J = A S^{-1}, verified antisymmetric. See poisson_for_hamiltonian for errors.
PoissonTensor solve_bihamiltonian(const PUParams& params, const QuadraticObservable& target);

struct SignChoice {
  int accel_sign = 0;               // sign of the q''^2 term in H2
  int position_velocity_sign = 0;   // sign of dq^dq' in J2
  double residual = 0.0;            // max |J2 S2 - A|
};
/// All four (H2, J2) sign combinations with their residuals, consistent ones first.
std::vector<SignChoice> sign_search(const PUParams& params);

/// Evaluation of the Lie-derivative residual of a constant tensor over samples.
struct LieDerivativeReport {
  PoissonTensor tensor;
  double residual_norm = 0.0;
  std::vector<JetState> sample_points;
};

/// -(DV(z) J + J DV(z)^T); zero iff the constant tensor is preserved by the flow at z.
Mat4 lie_derivative_residual(const VectorField& field, const PoissonTensor& j, const JetState& z);

LieDerivativeReport lie_derivative_report(const VectorField& field, const PoissonTensor& j,
                                          const std::vector<JetState>& samples);

/// Uniform draws from [-2, 2]^4.
std::vector<JetState> sample_points(std::uint64_t seed, int count);

/// Basis of constant antisymmetric J with L_V J = 0. Linear fields need no samples; for
/// nonlinear fields the condition is imposed at every sample, and fewer than three
/// distinct q values raise InsufficientSamplesError carrying the dimension obtained.
std::vector<PoissonTensor> invariant_tensor_space(const VectorField& field,
                                                  const std::vector<JetState>& samples = {});

}  // namespace puo::symmetry
