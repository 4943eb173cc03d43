#pragma once

// Two-dimensional first-order representations of the oscillator.
//
// A model  L = a_x x'^2/2 + a_y y'^2/2 - b_x x^2/2 - b_y y^2/2 - g x y  is tied to the
// oscillator through  x = mu0 q + mu2 q'',  y = nu0 q + nu2 q''.  Family a maps both
// Euler-Lagrange expressions onto the oscillator equation, family b maps the first onto
// it and the second onto zero. Each family has two solution sets (Ta1/Ta2, Tb1/Tb2) with
// a +/- branch from the square root rho.

#include "puo/core.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace puo::embedding {

struct TwoDimModel {
  double a_x = 0.0;
  double a_y = 0.0;
  double b_x = 0.0;
  double b_y = 0.0;
  double g = 0.0;
};

enum class Family { Ta1, Ta2, Tb1, Tb2 };
enum class Branch { plus, minus };

const char* to_string(Family family);
const char* to_string(Branch branch);
Family family_from_string(const std::string& name);
Branch branch_from_string(const std::string& name);
inline bool is_family_a(Family f) { return f == Family::Ta1 || f == Family::Ta2; }

/// Free parameters: Ta1/Ta2 use (a_x, a_y, g), Tb1 uses (a_x, b_x, g), Tb2 uses (a_x, b_y, g).
struct FreeParameters {
  double a_x = 0.0;
  double a_y = 0.0;
  double b_x = 0.0;
  double b_y = 0.0;
  double g = 0.0;
};

struct DerivedConstants {
  std::optional<double> rho_g_plus;
  std::optional<double> rho_g_minus;
  double rho_0_plus = 0.0;
  double rho_0_minus = 0.0;
  double tau = 0.0;

  /// Throws DegenerateModel when rho_g was not available (a_x a_y = 0).
  double rho_g(Branch b) const;
  double rho_0(Branch b) const { return b == Branch::plus ? rho_0_plus : rho_0_minus; }
};

/// rho_g = +-sqrt(alpha^2 - 4 beta - 4 g^2/(a_x a_y)), rho_0 = rho_g at g = 0,
/// tau = b_x^2 - a_x b_x alpha + a_x^2 beta. rho_g is left empty when a_x a_y = 0;
/// a negative radicand throws ComplexBranch.
DerivedConstants derived_constants(const TwoDimModel& model, const PUParams& params);

struct TransformMap {
  Family family = Family::Ta2;
  Branch branch = Branch::plus;
  double mu0 = 0.0;
  double mu2 = 0.0;
  double nu0 = 0.0;
  double nu2 = 0.0;
  TwoDimModel model;
  PUParams params;
  /// Rows (x, p_x, y, p_y) in terms of (q, q', q'', q''').
  Mat4 jac = Mat4::Zero();
  /// x and y collinear or |det jac| below EPS_SINGULAR.
  bool singular = false;
  /// a_y = 0: the y kinetic term is absent and the Lagrangian is degenerate.
  bool degenerate = false;
  std::string note;
};

TransformMap make_map(Family family, Branch branch, double mu0, double mu2, double nu0, double nu2,
                      const TwoDimModel& model, const PUParams& params);

/// Dependent parameters filled verbatim from the printed solution rows.
TransformMap printed_family(Family family, Branch branch, const FreeParameters& free,
                          const PUParams& params);

/// Coefficients of an expression linear in (q, q', q'', q''', q'''').
using JetForm = Eigen::Matrix<double, 5, 1>;

/// Recovers the linear form of `expr` from its values on a fixed 35-point probe set.
/// `fit_residual` reports how far `expr` is from linear (zero for the EOM expressions).
JetForm expand_on_probes(const std::function<double(const JetForm&)>& expr,
                         double* fit_residual = nullptr);

/// q'''' + alpha q'' + beta q.
JetForm oscillator_form(const PUParams& params);

enum class EomClass { proportional, zero, neither };
const char* to_string(EomClass c);

struct EomCheck {
  EomClass kind = EomClass::neither;
  JetForm coeffs = JetForm::Zero();
  /// Best k in coeffs ~ k * phi_PU.
  double factor = 0.0;
  /// ||coeffs - k phi_PU|| and ||coeffs||, relative to the size of the individual terms.
  double proportional_residual = 0.0;
  double zero_residual = 0.0;
  double linearity_residual = 0.0;
};

struct MapVerification {
  EomCheck phi1;
  EomCheck phi2;
  /// Family contract: a -> (phi_PU, phi_PU) up to nonzero factors, b -> (phi_PU, 0).
  bool meets_contract = false;
  double contract_residual = 0.0;
  bool rank_deficient = false;
  std::string note;
};

/// Off-shell check: substitute the map into both 2D Euler-Lagrange expressions with the
/// jet coordinates treated as independent.
MapVerification verify_map(const TransformMap& map, double tol = 1e-12);

/// Re-derives the dependent parameters by Gauss-Newton on the coefficient identities,
/// normalized so phi1 = 1 * phi_PU. Throws NoSolution, NonUniqueError, ComplexBranch,
/// PreconditionViolated.
TransformMap solve_family(Family family, Branch branch, const FreeParameters& free,
                          const PUParams& params);

struct Pushforward {
  PoissonTensor tensor;
  /// dq ^ dq' component of the pushed tensor and its closed form
  /// (nu2^2/a_x + mu2^2/a_y) / (mu0 nu2 - mu2 nu0)^2.
  double position_velocity = 0.0;
  double position_velocity_closed_form = 0.0;
};

/// T J_fo T^T with T = jac^{-1} and J_fo canonical in (x, p_x, y, p_y). Throws SingularMap.
Pushforward pushforward_poisson(const TransformMap& map);

struct BlendCoefficients {
  double c1 = 0.0;
  double c2 = 0.0;
  Family family = Family::Ta2;
};

/// Least-squares fit F ~ c1 H1 + c2 H2 over the 10 independent Hessian entries.
struct BlendFit {
  double c1 = 0.0;
  double c2 = 0.0;
  double relative_residual = 0.0;
};
BlendFit fit_blend(const PUParams& params, const QuadraticObservable& f);

/// Hessian of H_fo = p_x^2/2a_x + p_y^2/2a_y + b_x x^2/2 + b_y y^2/2 + g x y in
/// (x, p_x, y, p_y); the p_y term is dropped when a_y = 0.
Mat4 first_order_hessian(const TwoDimModel& model);

struct Pullback {
  QuadraticObservable hamiltonian;
  BlendFit fit;
  /// Absent for singular or degenerate maps.
  std::optional<BlendCoefficients> coeffs;
  /// Printed c-table row, written against H2 normalized as the X3 charge (-beta H2).
  std::optional<BlendCoefficients> table_prediction;
  /// Fitted values converted to that normalization: (c1, -c2/beta).
  std::optional<BlendCoefficients> fitted_charge_normalized;
  std::string note;
};

/// H_fo composed with the map and fitted onto c1 H1 + c2 H2. Throws NotInSpan when an
/// invertible map leaves a residual above 1e-10.
Pullback pullback_hamiltonian(const TransformMap& map);

/// c-table row for the given map, charge-normalized.
std::optional<BlendCoefficients> table_coefficients(const TransformMap& map);

/// sum_i  w_i^2 / [2 (c1 w_i^2 - c2)(w_i^2 - w_j^2)] [(q''' + w_j^2 q')^2 + w_i^2 (q'' + w_j^2 q)^2]
/// Throws SingularCoefficient when c1 w_i^2 - c2 vanishes.
QuadraticObservable sum_of_squares(const PUParams& params, double ctilde1, double ctilde2);

/// (c1 w1^2 - c2)(w1^2 - w2^2) > 0 and (c1 w2^2 - c2)(w2^2 - w1^2) > 0.
bool sum_of_squares_positive(const PUParams& params, double ctilde1, double ctilde2);

struct Positivity {
  bool positive_definite = false;
  Vec4 eigenvalues = Vec4::Zero();
};
Positivity positivity(const Mat4& hessian);
Positivity positivity(const QuadraticObservable& f);

struct FieldDelta {
  std::string name;
  double printed = 0.0;
  double derived = 0.0;
  double delta = 0.0;
};

/// Printed row vs re-derived map with every downstream quantity; never throws on a
/// discrepant or failing row, errors are captured as strings.
struct Reconciliation {
  Family family = Family::Ta2;
  Branch branch = Branch::plus;
  FreeParameters free;
  PUParams params;
  std::optional<TransformMap> printed;
  std::string printed_error;
  std::optional<MapVerification> printed_check;
  std::optional<TransformMap> derived;
  std::string derived_error;
  std::optional<MapVerification> derived_check;
  std::vector<FieldDelta> deltas;
  bool printed_discrepant = false;
  std::optional<Pushforward> pushforward;
  std::string pushforward_error;
  std::optional<Pullback> pullback;
  std::string pullback_error;
  std::optional<Positivity> first_order_positivity;
  std::optional<Positivity> pulled_back_positivity;
};

Reconciliation reconcile(Family family, Branch branch, const FreeParameters& free,
                         const PUParams& params);

}  // namespace puo::embedding
