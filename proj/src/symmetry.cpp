#include "puo/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace puo::symmetry {

double LinearSymmetry::commutator_norm(const Mat4& flow) const {
  return (xi * flow - flow * xi).norm();
}

double SymmetryBasis::max_pairwise_commutator() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < generators.size(); ++i)
    for (std::size_t j = i + 1; j < generators.size(); ++j) {
      const Mat4& a = generators[i].xi;
      const Mat4& b = generators[j].xi;
      worst = std::max(worst, (a * b - b * a).norm());
    }
  return worst;
}

double SymmetryBasis::independence() const {
  if (generators.empty()) return 0.0;
  MatX g(16, static_cast<Eigen::Index>(generators.size()));
  for (std::size_t k = 0; k < generators.size(); ++k)
    g.col(static_cast<Eigen::Index>(k)) = linalg::vec(generators[k].xi);
  Eigen::JacobiSVD<MatX> svd(g.transpose() * g);
  const VecX& s = svd.singularValues();
  return s.maxCoeff() == 0.0 ? 0.0 : s.minCoeff() / s.maxCoeff();
}

double SymmetryBasis::projection_residual(const Mat4& m) const {
  std::vector<Mat4> basis;
  basis.reserve(generators.size());
  for (const auto& x : generators) basis.push_back(x.xi);
  return linalg::projection_residual(basis, m);
}

namespace {

// Powers of two equalizing row and column norms, so D^{-1} A D is exact.
Vec4 balance_scaling(const Mat4& a) {
  Vec4 d = Vec4::Ones();
  Mat4 m = a;
  for (bool changed = true; changed;) {
    changed = false;
    for (int i = 0; i < 4; ++i) {
      double c = 0.0, r = 0.0;
      for (int k = 0; k < 4; ++k) {
        if (k == i) continue;
        c += std::abs(m(k, i));
        r += std::abs(m(i, k));
      }
      if (c == 0.0 || r == 0.0) continue;
      double f = 1.0;
      const double s = c + r;
      while (c < r / 2.0) {
        c *= 2.0;
        r /= 2.0;
        f *= 2.0;
      }
      while (c >= r * 2.0) {
        c /= 2.0;
        r *= 2.0;
        f /= 2.0;
      }
      if (c + r < 0.95 * s) {
        changed = true;
        d[i] *= f;
        m.col(i) *= f;
        m.row(i) /= f;
      }
    }
  }
  return d;
}

}  // namespace

SymmetryBasis commutant_basis(const Mat4& flow) {
  // commutant of the balanced B = D^{-1} A D, mapped back with D
  const Vec4 d = balance_scaling(flow);
  const Mat4 b = d.cwiseInverse().asDiagonal() * flow * d.asDiagonal();
  // Column k holds vec(E_k B - B E_k) for the k-th unit matrix.
  Eigen::Matrix<double, 16, 16> op;
  for (int k = 0; k < 16; ++k) {
    Eigen::Matrix<double, 16, 1> unit = Eigen::Matrix<double, 16, 1>::Zero();
    unit[k] = 1.0;
    const Mat4 e = linalg::unvec(unit);
    op.col(k) = linalg::vec(e * b - b * e);
  }
  const MatX kernel = linalg::null_space(op, EPS_RANK);
  MatX mapped(16, kernel.cols());
  for (Eigen::Index c = 0; c < kernel.cols(); ++c) {
    mapped.col(c) = linalg::vec(d.asDiagonal() * linalg::unvec(kernel.col(c)) * d.cwiseInverse().asDiagonal());
  }
  const MatX q = Eigen::HouseholderQR<MatX>(mapped).householderQ() * MatX::Identity(16, kernel.cols());
  SymmetryBasis basis;
  basis.dimension = static_cast<int>(kernel.cols());
  for (Eigen::Index c = 0; c < q.cols(); ++c) {
    basis.generators.push_back({linalg::unvec(q.col(c))});
  }
  return basis;
}

SymmetryBasis printed_generators(const PUParams& params) {
  const double a = params.alpha;
  const double b = params.beta;
  Mat4 x1, x2, x3, x4;
  // q' dq + q'' dq' + q''' dq'' - (alpha q'' + beta q) dq'''
  x1 << 0, 1, 0, 0,
        0, 0, 1, 0,
        0, 0, 0, 1,
        -b, 0, -a, 0;
  x2 = 0.5 * Mat4::Identity();
  // 1/2 [q'' dq + q''' dq' - (alpha q'' + beta q) dq'' - (alpha q''' + beta q') dq''']
  x3 << 0, 0, 1, 0,
        0, 0, 0, 1,
        -b, 0, -a, 0,
        0, -b, 0, -a;
  x3 *= 0.5;
  // (alpha q' + q''') dq - beta (q dq' + q' dq'' + q'' dq''')
  x4 << 0, a, 0, 1,
        -b, 0, 0, 0,
        0, -b, 0, 0,
        0, 0, -b, 0;
  SymmetryBasis basis;
  basis.generators = {{x1}, {x2}, {x3}, {x4}};
  basis.dimension = 4;
  return basis;
}

LinearSymmetry printed_x4_literal(const PUParams& params) {
  Mat4 x4;
  x4 << params.alpha, 0, 0, 1,
        -params.beta, 0, 0, 0,
        0, -params.beta, 0, 0,
        0, 0, -params.beta, 0;
  return {x4};
}

QuadraticObservable apply_symmetry(const LinearSymmetry& x, const QuadraticObservable& f) {
  const Mat4& s = f.coeffs();
  return QuadraticObservable(x.xi.transpose() * s + s * x.xi, f.chart());
}

Proportionality fit_proportional(const QuadraticObservable& f, const QuadraticObservable& g) {
  const Mat4& a = f.coeffs();
  const Mat4& b = g.coeffs();
  const double bb = (b.array() * b.array()).sum();
  Proportionality out;
  if (bb == 0.0) {
    out.relative_residual = a.norm() == 0.0 ? 0.0 : 1.0;
    return out;
  }
  out.factor = (a.array() * b.array()).sum() / bb;
  const double an = a.norm();
  out.relative_residual = an == 0.0 ? 0.0 : (a - out.factor * b).norm() / an;
  return out;
}

ChargeReport charge_report(const PUParams& params, const LinearSymmetry& x) {
  ChargeReport report;
  report.raw = apply_symmetry(x, h1(params));
  report.against_h2 = fit_proportional(report.raw, h2(params));
  report.bracket_with_h1 =
      linalg::scale_of(poisson_bracket(report.raw, h1(params), j1(params)).coeffs());
  return report;
}

PoissonTensor solve_bihamiltonian(const PUParams& params, const QuadraticObservable& target) {
  return poisson_for_hamiltonian(flow_matrix(params), target);
}

std::vector<SignChoice> sign_search(const PUParams& params) {
  const Mat4 a = flow_matrix(params);
  std::vector<SignChoice> out;
  for (int accel : {+1, -1})
    for (int pv : {+1, -1}) {
      const Mat4 lhs = j2_with_sign(params, pv).matrix() * h2_with_sign(params, accel).coeffs();
      out.push_back({accel, pv, (lhs - a).cwiseAbs().maxCoeff()});
    }
  std::stable_sort(out.begin(), out.end(),
                   [](const SignChoice& l, const SignChoice& r) { return l.residual < r.residual; });
  return out;
}

Mat4 lie_derivative_residual(const VectorField& field, const PoissonTensor& j, const JetState& z) {
  const Mat4 dv = field.jacobian(z.vec());
  return -(dv * j.matrix() + j.matrix() * dv.transpose());
}

LieDerivativeReport lie_derivative_report(const VectorField& field, const PoissonTensor& j,
                                          const std::vector<JetState>& samples) {
  LieDerivativeReport report{j, 0.0, samples};
  for (const auto& z : samples) {
    report.residual_norm = std::max(report.residual_norm, lie_derivative_residual(field, j, z).norm());
  }
  return report;
}

std::vector<JetState> sample_points(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<JetState> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    const double q = u(rng), qd = u(rng), qdd = u(rng), qddd = u(rng);
    out.push_back({q, qd, qdd, qddd});
  }
  return out;
}

namespace {

// Rows: vec(M E_p + E_p M^T) for the six antisymmetric unit tensors E_p.
Eigen::Matrix<double, 16, 6> invariance_block(const Mat4& m) {
  Eigen::Matrix<double, 16, 6> block;
  for (int p = 0; p < 6; ++p) {
    Eigen::Matrix<double, 6, 1> unit = Eigen::Matrix<double, 6, 1>::Zero();
    unit[p] = 1.0;
    const Mat4 e = linalg::antisymmetric_from(unit);
    block.col(p) = linalg::vec(m * e + e * m.transpose());
  }
  return block;
}

}  // namespace

std::vector<PoissonTensor> invariant_tensor_space(const VectorField& field,
                                                  const std::vector<JetState>& samples) {
  MatX system;
  if (field.is_linear()) {
    system = invariance_block(field.linear);
  } else {
    if (samples.empty()) {
      throw InsufficientSamplesError("nonlinear field needs sample points", 6);
    }
    system.resize(16 * static_cast<Eigen::Index>(samples.size()), 6);
    for (std::size_t k = 0; k < samples.size(); ++k) {
      system.middleRows(16 * static_cast<Eigen::Index>(k), 16) =
          invariance_block(field.jacobian(samples[k].vec()));
    }
  }
  const MatX kernel = linalg::null_space(system, EPS_RANK);
  std::vector<PoissonTensor> out;
  for (Eigen::Index c = 0; c < kernel.cols(); ++c) {
    out.emplace_back(linalg::antisymmetric_from(kernel.col(c)));
  }
  if (!field.is_linear()) {
    std::set<double> distinct_q;
    for (const auto& z : samples) distinct_q.insert(z.q);
    if (distinct_q.size() < 3) {
      throw InsufficientSamplesError("fewer than 3 sample points with distinct q",
                                     static_cast<int>(out.size()));
    }
  }
  return out;
}

}  // namespace puo::symmetry
