#include "oracles.hpp"
#include "puo/symmetry.hpp"

#include <doctest.h>

using namespace puo;
using namespace puo::symmetry;

namespace {

double maxabs(const Mat4& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("commutant of the flow is four-dimensional and abelian") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 100; ++i) {
    const oracle::Freq f = oracle::random_freq(rng);
    const PUParams p = make_params(f.w1, f.w2);
    const Mat4 a = flow_matrix(p);
    const SymmetryBasis basis = commutant_basis(a);
    REQUIRE(basis.dimension == 4);
    CHECK(basis.max_pairwise_commutator() <= 1e-12);
    for (const auto& x : basis.generators) CHECK(x.commutator_norm(a) <= 1e-10 * std::max(1.0, maxabs(a)));
    const SymmetryBasis printed = printed_generators(p);
    const double scale = std::max(1.0, f.beta() * f.beta());
    CHECK(printed.max_pairwise_commutator() / scale <= 1e-12);
    for (const auto& x : printed.generators) CHECK(basis.projection_residual(x.xi) <= 1e-12);
    CHECK(printed.independence() > 1e-12);
  }
}

TEST_CASE("generators are polynomials in the flow matrix") {
  const PUParams p = make_params(0.8, 1.7);
  const Mat4 a = flow_matrix(p);
  const auto g = printed_generators(p).generators;
  CHECK(maxabs(g[0].xi - a) == 0.0);
  CHECK(maxabs(g[1].xi - 0.5 * Mat4::Identity()) == 0.0);
  CHECK(maxabs(g[2].xi - 0.5 * a * a) <= 1e-14);
  CHECK(maxabs(g[3].xi + p.beta * a.inverse()) <= 1e-12);
}

TEST_CASE("printed X4 literal is not a symmetry") {
  const PUParams p = make_params(1.0, 2.0);
  const LinearSymmetry x4 = printed_x4_literal(p);
  CHECK(x4.commutator_norm(flow_matrix(p)) > 1.0);
  CHECK(maxabs(apply_symmetry(x4, h1(p)).coeffs()) > 1.0);
}

TEST_CASE("symmetry actions on H1") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 50; ++i) {
    const oracle::Freq f = oracle::random_freq(rng);
    const PUParams p = make_params(f.w1, f.w2);
    const auto g = printed_generators(p).generators;
    const QuadraticObservable e = h1(p);
    const double scale = std::max(1.0, maxabs(e.coeffs()));
    CHECK(maxabs(apply_symmetry(g[0], e).coeffs()) / scale <= 1e-12);
    CHECK(maxabs(apply_symmetry(g[1], e).coeffs() - e.coeffs()) / scale <= 1e-12);
    CHECK(maxabs(apply_symmetry(g[3], e).coeffs()) / scale <= 1e-12);
    const ChargeReport c = charge_report(p, g[2]);
    CHECK(std::abs(c.against_h2.factor + f.beta()) / f.beta() <= 1e-10);
    CHECK(c.against_h2.relative_residual <= 1e-10);
    CHECK(c.bracket_with_h1 <= 1e-10 * std::max(1.0, f.beta() * f.beta()));
  }
}

TEST_CASE("bi-Hamiltonian solve and sign search") {
  const PUParams p = make_params(1.0, 2.0);
  CHECK(maxabs(solve_bihamiltonian(p, h2(p)).matrix() - j2(p).matrix()) <= 1e-12);
  CHECK(maxabs(solve_bihamiltonian(p, h1(p)).matrix() - j1(p).matrix()) <= 1e-12);
  const auto signs = sign_search(p);
  REQUIRE(signs.size() == 4);
  CHECK(signs[0].residual <= 1e-12);
  CHECK(signs[1].residual > 1e-3);
  CHECK(signs[0].accel_sign == 1);
  CHECK(signs[0].position_velocity_sign == -1);
  // the alternative sign of the q''^2 term has no constant Poisson partner
  CHECK_THROWS_AS(solve_bihamiltonian(p, h2_with_sign(p, -1)), NotAntisymmetricError);
}

TEST_CASE("free flow preserves a two-dimensional family of constant tensors") {
  const PUParams p = make_params(1.0, 2.0);
  const auto space = invariant_tensor_space(free_vector_field(p));
  REQUIRE(space.size() == 2);
  std::vector<Mat4> m{space[0].matrix(), space[1].matrix()};
  CHECK(linalg::projection_residual(m, j1(p).matrix()) <= 1e-10);
  CHECK(linalg::projection_residual(m, j2(p).matrix()) <= 1e-10);
}

TEST_CASE("interacting flow leaves only J1") {
  for (double lambda : {0.01, 0.1, 1.0}) {
    const PUParams p = make_params(1.0, 2.0);
    const VectorField field = interacting_vector_field(p, Potential::quartic(lambda));
    const auto samples = sample_points(kDefaultSeed, 12);
    const auto space = invariant_tensor_space(field, samples);
    REQUIRE(space.size() == 1);
    std::vector<Mat4> m{space[0].matrix()};
    CHECK(linalg::projection_residual(m, j1(p).matrix()) <= 1e-10);
    CHECK(linalg::projection_residual(m, j2(p).matrix()) > 1e-3);
    CHECK(lie_derivative_report(field, j1(p), samples).residual_norm <= 1e-12);
    CHECK(lie_derivative_report(field, j2(p), samples).residual_norm > 1e-3);
  }
}

TEST_CASE("too few distinct positions cannot pin the interacting tensor") {
  const PUParams p = make_params(1.0, 2.0);
  const VectorField field = interacting_vector_field(p, Potential::quartic(0.1));
  std::vector<JetState> at_origin{{0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
  try {
    (void)invariant_tensor_space(field, at_origin);
    FAIL("expected InsufficientSamplesError");
  } catch (const InsufficientSamplesError& e) {
    CHECK(e.dimension() == 2);
  }
  CHECK_THROWS_AS(invariant_tensor_space(field, {}), InsufficientSamplesError);
}

TEST_CASE("sample points are reproducible") {
  const auto a = sample_points(42, 5);
  const auto b = sample_points(42, 5);
  for (int i = 0; i < 5; ++i) CHECK(a[i].vec() == b[i].vec());
  for (const auto& z : a) CHECK(z.vec().cwiseAbs().maxCoeff() <= 2.0);
}
