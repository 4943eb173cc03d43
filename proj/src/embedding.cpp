#include "puo/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace puo::embedding {

const char* to_string(Family family) {
  switch (family) {
    case Family::Ta1: return "Ta1";
    case Family::Ta2: return "Ta2";
    case Family::Tb1: return "Tb1";
    case Family::Tb2: return "Tb2";
  }
  return "?";
}

const char* to_string(Branch branch) { return branch == Branch::plus ? "+" : "-"; }

Family family_from_string(const std::string& name) {
  for (Family f : {Family::Ta1, Family::Ta2, Family::Tb1, Family::Tb2}) {
    std::string s = to_string(f);
    std::string lower = s;
    std::transform(lower.begin(), lower.end(), lower.begin(), ::tolower);
    if (name == s || name == lower) return f;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown family '" + name + "' (expected Ta1, Ta2, Tb1, Tb2)");
}

Branch branch_from_string(const std::string& name) {
  if (name == "+" || name == "plus" || name == "p") return Branch::plus;
  if (name == "-" || name == "minus" || name == "m") return Branch::minus;
  throw Error(ErrorKind::InvalidArgument, "unknown branch '" + name + "' (expected + or -)");
}

const char* to_string(EomClass c) {
  switch (c) {
    case EomClass::proportional: return "proportional";
    case EomClass::zero: return "zero";
    case EomClass::neither: return "neither";
  }
  return "?";
}

double DerivedConstants::rho_g(Branch b) const {
  const auto& v = b == Branch::plus ? rho_g_plus : rho_g_minus;
  if (!v) throw Error(ErrorKind::DegenerateModel, "rho_g needs a_x a_y != 0");
  return *v;
}

DerivedConstants derived_constants(const TwoDimModel& model, const PUParams& params) {
  DerivedConstants out;
  const double a = params.alpha;
  const double b = params.beta;
  const double r0 = a * a - 4.0 * b;
  if (r0 < 0.0) throw Error(ErrorKind::ComplexBranch, "alpha^2 - 4 beta < 0");
  out.rho_0_plus = std::sqrt(r0);
  out.rho_0_minus = -out.rho_0_plus;
  out.tau = model.b_x * model.b_x - model.a_x * model.b_x * a + model.a_x * model.a_x * b;
  if (model.a_x * model.a_y != 0.0) {
    const double rg = r0 - 4.0 * model.g * model.g / (model.a_x * model.a_y);
    if (rg < 0.0) {
      std::ostringstream msg;
      msg << "rho_g radicand " << rg << " < 0";
      throw Error(ErrorKind::ComplexBranch, msg.str());
    }
    out.rho_g_plus = std::sqrt(rg);
    out.rho_g_minus = -*out.rho_g_plus;
  }
  return out;
}

TransformMap make_map(Family family, Branch branch, double mu0, double mu2, double nu0, double nu2,
                      const TwoDimModel& model, const PUParams& params) {
  TransformMap m;
  m.family = family;
  m.branch = branch;
  m.mu0 = mu0;
  m.mu2 = mu2;
  m.nu0 = nu0;
  m.nu2 = nu2;
  m.model = model;
  m.params = params;
  m.jac << mu0, 0, mu2, 0,
           0, model.a_x * mu0, 0, model.a_x * mu2,
           nu0, 0, nu2, 0,
           0, model.a_y * nu0, 0, model.a_y * nu2;
  const double cross = mu0 * nu2 - mu2 * nu0;
  const double cross_scale = std::abs(mu0 * nu2) + std::abs(mu2 * nu0);
  const bool collinear = cross_scale == 0.0 || std::abs(cross) <= 1e-10 * cross_scale;
  m.degenerate = model.a_y == 0.0;
  const double det = m.jac.determinant();
  // Hadamard bound: |det| <= product of row norms.
  const double det_scale = m.jac.rowwise().norm().prod();
  m.singular = collinear || m.degenerate || det_scale == 0.0 || std::abs(det) <= EPS_SINGULAR * det_scale;
  if (collinear) m.note = "x and y are collinear: transform is singular";
  else if (m.degenerate) m.note = "a_y = 0: degenerate two-dimensional Lagrangian";
  else if (m.singular) m.note = "transform Jacobian is numerically singular";
  return m;
}

TransformMap printed_family(Family family, Branch branch, const FreeParameters& free,
                          const PUParams& params) {
  const double a = params.alpha;
  const double b = params.beta;
  const double ax = free.a_x;
  const double g = free.g;
  if (ax == 0.0) throw Error(ErrorKind::PreconditionViolated, "a_x must be nonzero");
  TwoDimModel model;
  model.a_x = ax;
  model.g = g;
  switch (family) {
    case Family::Ta1: {
      const double ay = free.a_y;
      if (ay == 0.0) throw Error(ErrorKind::PreconditionViolated, "Ta1 needs a_y != 0");
      model.a_y = ay;
      const double rho0 = derived_constants(model, params).rho_0(branch);
      model.b_x = 0.5 * ax * (a - 2.0 * g / ay + rho0);
      model.b_y = 0.5 * ay * (a - 2.0 * g / ax + rho0);
      return make_map(family, branch, (a + rho0) / (2.0 * ax), 1.0 / (2.0 * ax),
                      (a + rho0) / (2.0 * ay), 1.0 / (2.0 * ay), model, params);
    }
    case Family::Ta2: {
      const double ay = free.a_y;
      if (ay == 0.0) throw Error(ErrorKind::PreconditionViolated, "Ta2 needs a_y != 0");
      model.a_y = ay;
      const double rhog = derived_constants(model, params).rho_g(branch);
      model.b_x = (a + rhog) / (2.0 * ax);
      model.b_y = (a + rhog) / (2.0 * ay);
      return make_map(family, branch, (a - 2.0 * g / ay + rhog) / (2.0 * ax), 1.0 / (2.0 * ax),
                      (a - 2.0 * g / ax + rhog) / (2.0 * ay), 1.0 / (2.0 * ay), model, params);
    }
    case Family::Tb1: {
      model.b_x = free.b_x;
      const double tau = derived_constants(model, params).tau;
      if (tau == 0.0) throw Error(ErrorKind::PreconditionViolated, "Tb1 needs tau != 0, i.e. b_x != a_x (alpha + rho_0)/2");
      if (g == 0.0) throw Error(ErrorKind::PreconditionViolated, "Tb1 needs g != 0");
      model.a_y = -ax * g / (tau * tau);
      model.b_y = (g / tau) * (free.b_x - ax * a);
      return make_map(family, branch, (a - free.b_x / ax) / ax, 1.0 / ax, tau / (g * ax * ax), 0.0,
                      model, params);
    }
    case Family::Tb2: {
      const double by = free.b_y;
      if (by == 0.0) throw Error(ErrorKind::PreconditionViolated, "Tb2 needs b_y != 0");
      model.a_y = 0.0;
      model.b_y = by;
      const double rho0 = derived_constants(model, params).rho_0(branch);
      model.b_x = g * g / by + 0.5 * ax * (a + rho0);
      return make_map(family, branch, 2.0 * b / (ax * (a + rho0)), 1.0 / ax,
                      2.0 * b * g / (ax * by * (a + rho0)), -g / (ax * by), model, params);
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown family");
}

namespace {

constexpr int kProbeCount = 35;

struct ProbeSet {
  Eigen::Matrix<double, kProbeCount, 5> points;
  Eigen::Matrix<double, 5, kProbeCount> pinv;
};

const ProbeSet& probes() {
  static const ProbeSet set = [] {
    ProbeSet s;
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < kProbeCount; ++i)
      for (int k = 0; k < 5; ++k) s.points(i, k) = u(rng);
    const Eigen::Matrix<double, 5, 5> normal = s.points.transpose() * s.points;
    s.pinv = normal.inverse() * s.points.transpose();
    return s;
  }();
  return set;
}

// phi1 = a_x x'' + b_x x + g y,  phi2 = a_y y'' + b_y y + g x, with x, y from the map.
double phi(int which, const TwoDimModel& m, double mu0, double mu2, double nu0, double nu2,
           const JetForm& jet) {
  const double q = jet[0], qdd = jet[2], q4 = jet[4];
  const double x = mu0 * q + mu2 * qdd;
  const double xdd = mu0 * qdd + mu2 * q4;
  const double y = nu0 * q + nu2 * qdd;
  const double ydd = nu0 * qdd + nu2 * q4;
  return which == 1 ? m.a_x * xdd + m.b_x * x + m.g * y : m.a_y * ydd + m.b_y * y + m.g * x;
}

double term_scale(int which, const TwoDimModel& m, double mu0, double mu2, double nu0, double nu2) {
  const double sx = std::abs(mu0) + std::abs(mu2);
  const double sy = std::abs(nu0) + std::abs(nu2);
  const double s = which == 1 ? (std::abs(m.a_x) + std::abs(m.b_x)) * sx + std::abs(m.g) * sy
                              : (std::abs(m.a_y) + std::abs(m.b_y)) * sy + std::abs(m.g) * sx;
  return s > 0.0 ? s : 1.0;
}

EomCheck classify(const JetForm& coeffs, const JetForm& target, double scale, double linearity,
                  double tol) {
  EomCheck c;
  c.coeffs = coeffs;
  c.linearity_residual = linearity;
  c.factor = coeffs.dot(target) / target.squaredNorm();
  c.proportional_residual = (coeffs - c.factor * target).norm() / scale;
  c.zero_residual = coeffs.norm() / scale;
  if (c.zero_residual <= tol) {
    c.kind = EomClass::zero;
  } else if (c.proportional_residual <= tol) {
    c.kind = EomClass::proportional;
  } else {
    c.kind = EomClass::neither;
  }
  return c;
}

}  // namespace

JetForm expand_on_probes(const std::function<double(const JetForm&)>& expr, double* fit_residual) {
  const ProbeSet& p = probes();
  Eigen::Matrix<double, kProbeCount, 1> values;
  for (int i = 0; i < kProbeCount; ++i) values[i] = expr(p.points.row(i).transpose());
  const JetForm coeffs = p.pinv * values;
  if (fit_residual) {
    const double vn = values.norm();
    *fit_residual = vn == 0.0 ? 0.0 : (p.points * coeffs - values).norm() / vn;
  }
  return coeffs;
}

JetForm oscillator_form(const PUParams& params) {
  JetForm f;
  f << params.beta, 0.0, params.alpha, 0.0, 1.0;
  return f;
}

MapVerification verify_map(const TransformMap& map, double tol) {
  MapVerification v;
  const JetForm target = oscillator_form(map.params);
  const auto& m = map.model;
  for (int which : {1, 2}) {
    double lin = 0.0;
    const JetForm coeffs = expand_on_probes(
        [&](const JetForm& jet) { return phi(which, m, map.mu0, map.mu2, map.nu0, map.nu2, jet); }, &lin);
    EomCheck c = classify(coeffs, target, term_scale(which, m, map.mu0, map.mu2, map.nu0, map.nu2), lin, tol);
    (which == 1 ? v.phi1 : v.phi2) = c;
  }
  const double cross_scale = std::abs(map.mu0 * map.nu2) + std::abs(map.mu2 * map.nu0);
  v.rank_deficient = cross_scale == 0.0 ||
                     std::abs(map.mu0 * map.nu2 - map.mu2 * map.nu0) <= 1e-10 * cross_scale;
  if (is_family_a(map.family)) {
    v.contract_residual = std::max(v.phi1.proportional_residual, v.phi2.proportional_residual);
    v.meets_contract = v.phi1.kind == EomClass::proportional && v.phi2.kind == EomClass::proportional;
  } else {
    v.contract_residual = std::max(v.phi1.proportional_residual, v.phi2.zero_residual);
    v.meets_contract = v.phi1.kind == EomClass::proportional && v.phi2.kind == EomClass::zero;
  }
  if (v.rank_deficient) {
    v.note = "rank-deficient transform: x and y are proportional and cannot carry fourth-order dynamics";
  }
  if (!v.meets_contract) {
    std::ostringstream msg;
    if (!v.note.empty()) msg << v.note << "; ";
    msg << "phi1 " << to_string(v.phi1.kind) << ", phi2 " << to_string(v.phi2.kind)
        << " (expected " << (is_family_a(map.family) ? "proportional, proportional" : "proportional, zero") << ")";
    v.note = msg.str();
  }
  return v;
}

namespace {

// Unknowns per family (with phi1 normalized to 1 * phi_PU):
//   Ta1/Ta2: (b_x, b_y, mu0, nu0), mu2 = 1/a_x, nu2 = 1/a_y
//   Tb1:     (a_y, b_y, mu0, nu0), mu2 = 1/a_x, nu2 = 0
//   Tb2:     (b_x, mu0, nu0, nu2), mu2 = 1/a_x, a_y = 0
struct Candidate {
  TwoDimModel model;
  double mu0 = 0.0, mu2 = 0.0, nu0 = 0.0, nu2 = 0.0;
};

Candidate unpack(Family family, const FreeParameters& free, const Vec4& u) {
  Candidate c;
  c.model.a_x = free.a_x;
  c.model.g = free.g;
  c.mu2 = 1.0 / free.a_x;
  if (is_family_a(family)) {
    c.model.a_y = free.a_y;
    c.model.b_x = u[0];
    c.model.b_y = u[1];
    c.mu0 = u[2];
    c.nu0 = u[3];
    c.nu2 = 1.0 / free.a_y;
  } else if (family == Family::Tb1) {
    c.model.b_x = free.b_x;
    c.model.a_y = u[0];
    c.model.b_y = u[1];
    c.mu0 = u[2];
    c.nu0 = u[3];
    c.nu2 = 0.0;
  } else {
    c.model.a_y = 0.0;
    c.model.b_y = free.b_y;
    c.model.b_x = u[0];
    c.mu0 = u[1];
    c.nu0 = u[2];
    c.nu2 = u[3];
  }
  return c;
}

Vec4 pack(Family family, const TransformMap& m) {
  if (is_family_a(family)) return {m.model.b_x, m.model.b_y, m.mu0, m.nu0};
  if (family == Family::Tb1) return {m.model.a_y, m.model.b_y, m.mu0, m.nu0};
  return {m.model.b_x, m.mu0, m.nu0, m.nu2};
}

using Residual = Eigen::Matrix<double, 10, 1>;

Residual identity_residual(Family family, const FreeParameters& free, const PUParams& params,
                           const Vec4& u) {
  const Candidate c = unpack(family, free, u);
  const JetForm target = oscillator_form(params);
  Residual r;
  for (int which : {1, 2}) {
    const JetForm coeffs = expand_on_probes(
        [&](const JetForm& jet) { return phi(which, c.model, c.mu0, c.mu2, c.nu0, c.nu2, jet); });
    const bool maps_to_zero = which == 2 && !is_family_a(family);
    r.segment<5>(which == 1 ? 0 : 5) = maps_to_zero ? coeffs : JetForm(coeffs - target);
  }
  return r;
}

// Central differences are exact here: the residual is at most quadratic in u.
Eigen::Matrix<double, 10, 4> identity_jacobian(Family family, const FreeParameters& free,
                                               const PUParams& params, const Vec4& u) {
  Eigen::Matrix<double, 10, 4> jac;
  for (int k = 0; k < 4; ++k) {
    const double h = 1e-3 * std::max(1.0, std::abs(u[k]));
    Vec4 up = u, dn = u;
    up[k] += h;
    dn[k] -= h;
    jac.col(k) = (identity_residual(family, free, params, up) -
                  identity_residual(family, free, params, dn)) / (2.0 * h);
  }
  return jac;
}

struct Root {
  Vec4 u;
  int rank = 0;
};

std::optional<Root> gauss_newton(Family family, const FreeParameters& free, const PUParams& params,
                                 Vec4 u, double tol) {
  Residual r = identity_residual(family, free, params, u);
  double rn = r.norm();
  for (int iter = 0; iter < 80 && std::isfinite(rn); ++iter) {
    if (rn <= tol) break;
    const auto jac = identity_jacobian(family, free, params, u);
    const Vec4 step = jac.completeOrthogonalDecomposition().solve(-r);
    double t = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 30; ++ls) {
      const Vec4 trial = u + t * step;
      const Residual rt = identity_residual(family, free, params, trial);
      if (std::isfinite(rt.norm()) && rt.norm() < rn) {
        u = trial;
        r = rt;
        rn = rt.norm();
        improved = true;
        break;
      }
      t *= 0.5;
    }
    if (!improved) break;
  }
  if (!(rn <= tol) || !u.allFinite()) return std::nullopt;
  const auto jac = identity_jacobian(family, free, params, u);
  return Root{u, linalg::rank(jac, 1e-9)};
}

}  // namespace

TransformMap solve_family(Family family, Branch branch, const FreeParameters& free,
                          const PUParams& params) {
  if (free.a_x == 0.0 || !std::isfinite(free.a_x)) {
    throw Error(ErrorKind::NoSolution, "a_x = 0 leaves no non-degenerate x kinetic term");
  }
  TwoDimModel probe_model{free.a_x, is_family_a(family) ? free.a_y : 0.0, free.b_x, free.b_y, free.g};
  if (is_family_a(family)) {
    if (free.a_y == 0.0) throw Error(ErrorKind::PreconditionViolated, "family a needs a_y != 0");
    if (family == Family::Ta2) (void)derived_constants(probe_model, params).rho_g(branch);
  } else if (family == Family::Tb1) {
    if (free.g == 0.0) throw Error(ErrorKind::NoSolution, "Tb1 with g = 0 cannot map phi2 to zero with a_y != 0");
    if (derived_constants(probe_model, params).tau == 0.0) {
      throw Error(ErrorKind::PreconditionViolated, "Tb1 needs tau != 0");
    }
  } else {
    if (free.b_y == 0.0) throw Error(ErrorKind::PreconditionViolated, "Tb2 needs b_y != 0");
  }

  const double tol = 1e-12 * (1.0 + params.alpha + params.beta);

  std::vector<Vec4> seeds;
  try {
    seeds.push_back(pack(family, printed_family(family, branch, free, params)));
    const Branch other = branch == Branch::plus ? Branch::minus : Branch::plus;
    seeds.push_back(pack(family, printed_family(family, other, free, params)));
  } catch (const Error&) {
  }
  std::mt19937_64 rng(0xfa111e5ULL);
  std::uniform_real_distribution<double> expo(-1.5, 1.5);
  std::bernoulli_distribution flip(0.5);
  const double base = std::max({1.0, params.alpha, std::abs(free.a_x), std::abs(free.g)});
  for (int i = 0; i < 96; ++i) {
    Vec4 s;
    const double scale = (i % 2 == 0) ? base : 1.0;
    for (int k = 0; k < 4; ++k) s[k] = (flip(rng) ? -1.0 : 1.0) * scale * std::pow(10.0, expo(rng));
    seeds.push_back(s);
  }

  std::vector<Root> roots;
  for (const Vec4& seed : seeds) {
    auto root = gauss_newton(family, free, params, seed, tol);
    if (!root) continue;
    const bool seen = std::any_of(roots.begin(), roots.end(), [&](const Root& r) {
      return (r.u - root->u).norm() <= 1e-7 * (1.0 + r.u.norm());
    });
    if (!seen) roots.push_back(*root);
  }

  std::vector<std::pair<TransformMap, Root>> matching;
  for (const Root& r : roots) {
    const Candidate c = unpack(family, free, r.u);
    TransformMap m = make_map(family, branch, c.mu0, c.mu2, c.nu0, c.nu2, c.model, params);
    const bool collinear = m.note.rfind("x and y are collinear", 0) == 0;
    if (family == Family::Ta1 && !collinear) continue;
    if (family == Family::Ta2 && collinear) continue;
    matching.emplace_back(std::move(m), r);
  }
  if (matching.empty()) {
    std::ostringstream msg;
    msg << "no " << to_string(family) << " solution found (" << roots.size() << " roots of the family system)";
    throw Error(ErrorKind::NoSolution, msg.str());
  }
  // Branch order: Ta1/Ta2 '+' has the larger a_x mu0; Tb2 '+' the smaller (mu0 ~ 1/(alpha + rho)).
  const double ax = free.a_x;
  std::sort(matching.begin(), matching.end(), [&](const auto& l, const auto& r) {
    const double lv = ax * l.first.mu0, rv = ax * r.first.mu0;
    return family == Family::Tb2 ? lv < rv : lv > rv;
  });
  std::size_t pick = 0;
  if (family != Family::Tb1 && branch == Branch::minus && matching.size() > 1) pick = 1;
  auto& [map, root] = matching[pick];
  if (root.rank < 4) {
    std::ostringstream msg;
    msg << to_string(family) << " solution set has dimension " << 4 - root.rank;
    throw NonUniqueError(msg.str(), 4 - root.rank);
  }
  if (family == Family::Tb1 && matching.size() > 1) {
    throw NonUniqueError("Tb1 produced several isolated roots", 0);
  }
  if (family != Family::Tb1 && matching.size() == 1) {
    map.note += std::string(map.note.empty() ? "" : "; ") + "only one root found: branches coincide";
  }
  map.branch = branch;
  return map;
}

Pushforward pushforward_poisson(const TransformMap& map) {
  if (map.singular) {
    throw Error(ErrorKind::SingularMap, std::string(to_string(map.family)) + ": " + map.note);
  }
  Mat4 jfo = Mat4::Zero();
  jfo(0, 1) = 1.0;
  jfo(1, 0) = -1.0;
  jfo(2, 3) = 1.0;
  jfo(3, 2) = -1.0;
  const Mat4 t = map.jac.inverse();
  Pushforward out;
  out.tensor = PoissonTensor(t * jfo * t.transpose());
  out.position_velocity = out.tensor(0, 1);
  const double cross = map.mu0 * map.nu2 - map.mu2 * map.nu0;
  out.position_velocity_closed_form =
      (map.nu2 * map.nu2 / map.model.a_x + map.mu2 * map.mu2 / map.model.a_y) / (cross * cross);
  return out;
}

BlendFit fit_blend(const PUParams& params, const QuadraticObservable& f) {
  const Mat4 s1 = h1(params).coeffs();
  const Mat4 s2 = h2(params).coeffs();
  Eigen::Matrix<double, 10, 2> a;
  Eigen::Matrix<double, 10, 1> b;
  int row = 0;
  for (int i = 0; i < 4; ++i)
    for (int k = i; k < 4; ++k, ++row) {
      a(row, 0) = s1(i, k);
      a(row, 1) = s2(i, k);
      b[row] = f.coeffs()(i, k);
    }
  const Eigen::Vector2d c = a.colPivHouseholderQr().solve(b);
  BlendFit fit{c[0], c[1], 0.0};
  const double bn = b.norm();
  fit.relative_residual = bn == 0.0 ? 0.0 : (a * c - b).norm() / bn;
  return fit;
}

Mat4 first_order_hessian(const TwoDimModel& model) {
  Mat4 s = Mat4::Zero();
  s(0, 0) = model.b_x;
  s(1, 1) = 1.0 / model.a_x;
  s(2, 2) = model.b_y;
  s(3, 3) = model.a_y == 0.0 ? 0.0 : 1.0 / model.a_y;
  s(0, 2) = s(2, 0) = model.g;
  return s;
}

std::optional<BlendCoefficients> table_coefficients(const TransformMap& map) {
  const auto& m = map.model;
  const auto& p = map.params;
  const double w1sq = p.omega1 * p.omega1;
  const double w2sq = p.omega2 * p.omega2;
  const double big = map.branch == Branch::plus ? std::max(w1sq, w2sq) : std::min(w1sq, w2sq);
  BlendCoefficients c;
  c.family = map.family;
  switch (map.family) {
    case Family::Ta1:
      c.c2 = -(m.a_x + m.a_y) / (m.a_x * m.a_y);
      c.c1 = c.c2 * big;
      return c;
    case Family::Ta2: {
      c.c2 = -(m.a_x + m.a_y) / (m.a_x * m.a_y);
      double rhog = 0.0;
      try {
        rhog = derived_constants(m, p).rho_g(map.branch);
      } catch (const Error&) {
        return std::nullopt;
      }
      c.c1 = (4.0 * m.g - rhog) / (2.0 * m.a_x * m.a_y) + 0.5 * p.alpha * c.c2;
      return c;
    }
    case Family::Tb1:
      c.c1 = (m.b_x / m.a_x - p.alpha) / m.a_x;
      c.c2 = -1.0 / m.a_x;
      return c;
    case Family::Tb2:
      c.c1 = -big / m.a_x;
      c.c2 = -1.0 / m.a_x;
      return c;
  }
  return std::nullopt;
}

Pullback pullback_hamiltonian(const TransformMap& map) {
  Pullback out;
  const Mat4 s = map.jac.transpose() * first_order_hessian(map.model) * map.jac;
  out.hamiltonian = QuadraticObservable(0.5 * (s + s.transpose()));
  out.fit = fit_blend(map.params, out.hamiltonian);
  out.table_prediction = table_coefficients(map);
  if (map.singular) {
    out.note = "singular or degenerate map: coefficients undefined (" + map.note + ")";
    return out;
  }
  if (out.fit.relative_residual > 1e-10) {
    std::ostringstream msg;
    msg << "pulled-back Hamiltonian leaves residual " << out.fit.relative_residual
        << " against span{H1, H2}: map does not preserve the dynamics";
    throw Error(ErrorKind::NotInSpan, msg.str());
  }
  out.coeffs = BlendCoefficients{out.fit.c1, out.fit.c2, map.family};
  out.fitted_charge_normalized =
      BlendCoefficients{out.fit.c1, -out.fit.c2 / map.params.beta, map.family};
  return out;
}

QuadraticObservable sum_of_squares(const PUParams& params, double ctilde1, double ctilde2) {
  const double wsq[2] = {params.omega1 * params.omega1, params.omega2 * params.omega2};
  Mat4 s = Mat4::Zero();
  for (int i = 0; i < 2; ++i) {
    const int j = 1 - i;
    const double lever = ctilde1 * wsq[i] - ctilde2;
    if (std::abs(lever) < EPS_SINGULAR) {
      std::ostringstream msg;
      msg << "c1 w" << i + 1 << "^2 - c2 = " << lever << " vanishes";
      throw Error(ErrorKind::SingularCoefficient, msg.str());
    }
    const double k = wsq[i] / (2.0 * lever * (wsq[i] - wsq[j]));
    const Vec4 u(0.0, wsq[j], 0.0, 1.0);  // q''' + w_j^2 q'
    const Vec4 v(wsq[j], 0.0, 1.0, 0.0);  // q'' + w_j^2 q
    // F = 1/2 z^T S z, so a square (u.z)^2 contributes 2 u u^T.
    s += 2.0 * k * (u * u.transpose() + wsq[i] * v * v.transpose());
  }
  return QuadraticObservable(s);
}

bool sum_of_squares_positive(const PUParams& params, double ctilde1, double ctilde2) {
  const double w1sq = params.omega1 * params.omega1;
  const double w2sq = params.omega2 * params.omega2;
  return (ctilde1 * w1sq - ctilde2) * (w1sq - w2sq) > 0.0 &&
         (ctilde1 * w2sq - ctilde2) * (w2sq - w1sq) > 0.0;
}

Positivity positivity(const Mat4& hessian) {
  Eigen::SelfAdjointEigenSolver<Mat4> eig(0.5 * (hessian + hessian.transpose()), Eigen::EigenvaluesOnly);
  Positivity p;
  p.eigenvalues = eig.eigenvalues();
  const double hi = p.eigenvalues.cwiseAbs().maxCoeff();
  p.positive_definite = hi > 0.0 && p.eigenvalues.minCoeff() > 1e-12 * hi;
  return p;
}

Positivity positivity(const QuadraticObservable& f) { return positivity(f.coeffs()); }

Reconciliation reconcile(Family family, Branch branch, const FreeParameters& free,
                         const PUParams& params) {
  Reconciliation r;
  r.family = family;
  r.branch = branch;
  r.free = free;
  r.params = params;
  try {
    r.printed = printed_family(family, branch, free, params);
    r.printed_check = verify_map(*r.printed);
  } catch (const Error& e) {
    r.printed_error = e.what();
  }
  try {
    r.derived = solve_family(family, branch, free, params);
    r.derived_check = verify_map(*r.derived);
  } catch (const Error& e) {
    r.derived_error = e.what();
  }
  if (r.printed && r.derived) {
    const auto& p = *r.printed;
    const auto& d = *r.derived;
    auto add = [&](const char* name, double pv, double dv) {
      r.deltas.push_back({name, pv, dv, dv - pv});
      if (std::abs(dv - pv) > 1e-9 * std::max(1.0, std::abs(dv))) r.printed_discrepant = true;
    };
    add("a_y", p.model.a_y, d.model.a_y);
    add("b_x", p.model.b_x, d.model.b_x);
    add("b_y", p.model.b_y, d.model.b_y);
    add("mu0", p.mu0, d.mu0);
    add("mu2", p.mu2, d.mu2);
    add("nu0", p.nu0, d.nu0);
    add("nu2", p.nu2, d.nu2);
  }
  if (r.printed_check && !r.printed_check->meets_contract) r.printed_discrepant = true;
  if (r.derived) {
    r.first_order_positivity = positivity(first_order_hessian(r.derived->model));
    try {
      r.pushforward = pushforward_poisson(*r.derived);
    } catch (const Error& e) {
      r.pushforward_error = e.what();
    }
    try {
      r.pullback = pullback_hamiltonian(*r.derived);
      r.pulled_back_positivity = positivity(r.pullback->hamiltonian);
    } catch (const Error& e) {
      r.pullback_error = e.what();
    }
  }
  return r;
}

}  // namespace puo::embedding
