#pragma once

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace puo {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

namespace linalg {

/// Orthonormal basis (columns) of the null space of `m`. Singular values below
/// `rel_tol * sigma_max` count as zero; an all-zero matrix has a full null space.
MatX null_space(const MatX& m, double rel_tol);

/// Numerical rank with the same cutoff rule as null_space.
int rank(const MatX& m, double rel_tol);

/// Column-major flattening of a 4x4 matrix.
Eigen::Matrix<double, 16, 1> vec(const Mat4& m);
Mat4 unvec(const Eigen::Matrix<double, 16, 1>& v);

/// Index pairs (i, j), i < j, of the six independent entries of an antisymmetric 4x4.
const std::array<std::pair<int, int>, 6>& antisymmetric_pairs();
Mat4 antisymmetric_from(const Eigen::Matrix<double, 6, 1>& coeffs);
Eigen::Matrix<double, 6, 1> antisymmetric_coeffs(const Mat4& j);

/// Residual of projecting `m` onto span(basis), relative to ||m||_F. Basis entries
/// need not be orthonormal.
double projection_residual(const std::vector<Mat4>& basis, const Mat4& m);

double symmetric_part_norm(const Mat4& m);
double antisymmetric_part_norm(const Mat4& m);

/// Max-abs entry, used for relative tolerances.
double scale_of(const MatX& m);

}  // namespace linalg
}  // namespace puo
