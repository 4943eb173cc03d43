#include "puo/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace puo::linalg {

namespace {

int rank_from(const VecX& sigma, double rel_tol) {
  if (sigma.size() == 0) return 0;
  const double sigma_max = sigma.maxCoeff();
  if (sigma_max <= 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma[i] > rel_tol * sigma_max) ++r;
  }
  return r;
}

}  // namespace

MatX null_space(const MatX& m, double rel_tol) {
  // Pad short-and-wide systems so V is square and carries the full null space.
  MatX a = m;
  if (a.rows() < a.cols()) {
    a.conservativeResize(a.cols(), Eigen::NoChange);
    a.bottomRows(m.cols() - m.rows()).setZero();
  }
  Eigen::JacobiSVD<MatX> svd(a, Eigen::ComputeFullV);
  const int r = rank_from(svd.singularValues(), rel_tol);
  return svd.matrixV().rightCols(a.cols() - r);
}

int rank(const MatX& m, double rel_tol) {
  Eigen::JacobiSVD<MatX> svd(m);
  return rank_from(svd.singularValues(), rel_tol);
}

Eigen::Matrix<double, 16, 1> vec(const Mat4& m) {
  return Eigen::Map<const Eigen::Matrix<double, 16, 1>>(m.data());
}

Mat4 unvec(const Eigen::Matrix<double, 16, 1>& v) {
  return Eigen::Map<const Mat4>(v.data());
}

const std::array<std::pair<int, int>, 6>& antisymmetric_pairs() {
  static const std::array<std::pair<int, int>, 6> pairs{
      {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
  return pairs;
}

Mat4 antisymmetric_from(const Eigen::Matrix<double, 6, 1>& coeffs) {
  Mat4 j = Mat4::Zero();
  const auto& pairs = antisymmetric_pairs();
  for (int k = 0; k < 6; ++k) {
    j(pairs[k].first, pairs[k].second) = coeffs[k];
    j(pairs[k].second, pairs[k].first) = -coeffs[k];
  }
  return j;
}

Eigen::Matrix<double, 6, 1> antisymmetric_coeffs(const Mat4& j) {
  Eigen::Matrix<double, 6, 1> c;
  const auto& pairs = antisymmetric_pairs();
  for (int k = 0; k < 6; ++k) c[k] = j(pairs[k].first, pairs[k].second);
  return c;
}

double projection_residual(const std::vector<Mat4>& basis, const Mat4& m) {
  const double norm = m.norm();
  if (norm == 0.0) return 0.0;
  if (basis.empty()) return 1.0;
  MatX b(16, static_cast<Eigen::Index>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k) b.col(static_cast<Eigen::Index>(k)) = vec(basis[k]);
  const VecX target = vec(m);
  const VecX coeffs = b.colPivHouseholderQr().solve(target);
  return (b * coeffs - target).norm() / norm;
}

double symmetric_part_norm(const Mat4& m) { return (0.5 * (m + m.transpose())).norm(); }

double antisymmetric_part_norm(const Mat4& m) { return (0.5 * (m - m.transpose())).norm(); }

double scale_of(const MatX& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace puo::linalg
