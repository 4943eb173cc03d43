#include "oracles.hpp"
#include "puo/embedding.hpp"

#include <doctest.h>

using namespace puo;
using namespace puo::embedding;

namespace {

struct Draws {
  std::mt19937_64 rng{314159};
  std::uniform_real_distribution<double> mag{0.5, 2.0};
  std::uniform_real_distribution<double> gd{-0.8, 0.8};
  std::uniform_real_distribution<double> bxd{0.2, 4.0};
  std::bernoulli_distribution coin{0.5};

  double signed_mag() { return (coin(rng) ? -1.0 : 1.0) * mag(rng); }
  FreeParameters next() { return {signed_mag(), signed_mag(), bxd(rng), signed_mag(), gd(rng)}; }
};

void check_oracle_coefficients(const TransformMap& m) {
  const auto& d = m.model;
  const auto c1 = oracle::eom_coefficients(d.a_x, d.b_x, d.g, m.mu0, m.mu2, m.nu0, m.nu2);
  const auto c2 = oracle::eom_coefficients(d.a_y, d.b_y, d.g, m.nu0, m.nu2, m.mu0, m.mu2);
  const JetForm target = oscillator_form(m.params);
  const double scale = 1.0 + target.cwiseAbs().maxCoeff();
  for (int i = 0; i < 5; ++i) {
    CHECK(std::abs(c1[i] - target[i]) <= 1e-9 * scale);
    if (is_family_a(m.family)) CHECK(std::abs(c2[i] - target[i]) <= 1e-9 * scale);
    else CHECK(std::abs(c2[i]) <= 1e-9 * scale);
  }
}

}  // namespace

TEST_CASE("probe expansion recovers linear forms exactly") {
  JetForm truth;
  truth << 0.3, -1.2, 2.5, 0.0, 7.0;
  double residual = 1.0;
  const JetForm got = expand_on_probes([&](const JetForm& j) { return truth.dot(j); }, &residual);
  CHECK((got - truth).norm() <= 1e-13);
  CHECK(residual <= 1e-14);
  expand_on_probes([](const JetForm& j) { return j[0] * j[1]; }, &residual);
  CHECK(residual > 1e-2);
}

TEST_CASE("solved maps satisfy the family contracts on random draws") {
  Draws draws;
  for (Family fam : {Family::Ta1, Family::Ta2, Family::Tb1, Family::Tb2}) {
    int solved = 0;
    for (int i = 0; i < 50; ++i) {
      const oracle::Freq f = oracle::random_freq(draws.rng, 0.3, 3.0, 0.2);
      const PUParams p = make_params(f.w1, f.w2);
      FreeParameters free = draws.next();
      const Branch br = i % 2 == 0 ? Branch::plus : Branch::minus;
      try {
        const TransformMap m = solve_family(fam, br, free, p);
        const MapVerification v = verify_map(m);
        CHECK_MESSAGE(v.meets_contract, to_string(fam), " draw ", i, ": ", v.note);
        CHECK(v.contract_residual <= 1e-12);
        check_oracle_coefficients(m);
        CHECK(m.singular == (fam == Family::Ta1 || fam == Family::Tb2));
        CHECK(m.degenerate == (fam == Family::Tb2));
        ++solved;
      } catch (const Error& e) {
        // Ta2 needs a real rho_g; everything else must solve.
        CHECK_MESSAGE(fam == Family::Ta2, to_string(fam), " draw ", i, ": ", e.what());
        CHECK(e.kind() == ErrorKind::ComplexBranch);
      }
    }
    CHECK(solved >= 25);
  }
}

TEST_CASE("Tb1 matches the hand-derived solution") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  for (int i = 0; i < 20; ++i) {
    const oracle::Freq f = oracle::random_freq(rng, 0.3, 3.0, 0.2);
    const PUParams p = make_params(f.w1, f.w2);
    const double ax = u(rng), bx = 3.0 * u(rng), g = u(rng) - 1.25;
    const TransformMap m = solve_family(Family::Tb1, Branch::plus, {ax, 0, bx, 0, g}, p);
    const oracle::Tb1 o = oracle::tb1(f, ax, bx, g);
    const double s = 1e-8;
    CHECK(m.model.a_y == doctest::Approx(o.a_y).epsilon(s));
    CHECK(m.model.b_y == doctest::Approx(o.b_y).epsilon(s));
    CHECK(m.mu0 == doctest::Approx(o.mu0).epsilon(s));
    CHECK(m.mu2 == doctest::Approx(o.mu2).epsilon(s));
    CHECK(m.nu0 == doctest::Approx(o.nu0).epsilon(s));
    CHECK(m.nu2 == 0.0);
  }
}

TEST_CASE("printed Tb1 row fails its contract; the solved one passes") {
  const PUParams p = make_params(1.0, 2.0);
  const FreeParameters free{1.0, 0.0, 3.0, 0.0, 0.5};
  const TransformMap printed = printed_family(Family::Tb1, Branch::plus, free, p);
  CHECK_FALSE(verify_map(printed).meets_contract);
  CHECK(verify_map(solve_family(Family::Tb1, Branch::plus, free, p)).meets_contract);
  const Reconciliation r = reconcile(Family::Tb1, Branch::plus, free, p);
  CHECK(r.printed_discrepant);
  CHECK_FALSE(r.deltas.empty());
}

TEST_CASE("reconciliation never throws on bad rows") {
  const PUParams p = make_params(1.0, 2.0);
  for (Family fam : {Family::Ta1, Family::Ta2, Family::Tb1, Family::Tb2})
    for (Branch br : {Branch::plus, Branch::minus}) {
      CHECK_NOTHROW(reconcile(fam, br, {1.0, 1.0, 2.0, 1.5, 0.3}, p));
      CHECK_NOTHROW(reconcile(fam, br, {0.0, 0.0, 0.0, 0.0, 0.0}, p));
      CHECK_NOTHROW(reconcile(fam, br, {1.0, 0.05, 2.0, 1.5, 3.0}, p));
    }
}

TEST_CASE("verify_map classification examples") {
  const PUParams p = make_params(1.0, 2.0);
  const TransformMap collinear = make_map(Family::Ta2, Branch::plus, 1.0, 0.0, 1.0, 0.0, {1, 1, 1, 1, 0}, p);
  const MapVerification v = verify_map(collinear);
  CHECK(v.rank_deficient);
  CHECK(v.phi1.kind == EomClass::neither);
  CHECK_FALSE(v.meets_contract);
  CHECK_FALSE(v.note.empty());
  const TransformMap zero = make_map(Family::Tb1, Branch::plus, 0.0, 0.0, 0.0, 0.0, {1, 1, 1, 1, 0}, p);
  CHECK(verify_map(zero).phi2.kind == EomClass::zero);
}

TEST_CASE("family preconditions") {
  const PUParams p = make_params(1.0, 2.0);
  auto kind_of = [&](Family fam, FreeParameters free) {
    try {
      (void)solve_family(fam, Branch::plus, free, p);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::InvalidArgument;
  };
  CHECK(kind_of(Family::Ta2, {0.0, 1.0, 0, 0, 0.1}) == ErrorKind::NoSolution);
  CHECK(kind_of(Family::Ta1, {1.0, 0.0, 0, 0, 0.1}) == ErrorKind::PreconditionViolated);
  CHECK(kind_of(Family::Tb2, {1.0, 0.0, 0, 0.0, 0.1}) == ErrorKind::PreconditionViolated);
  // tau = (b_x - a_x w1^2)(b_x - a_x w2^2) vanishes at b_x = a_x
  CHECK(kind_of(Family::Tb1, {1.0, 0.0, 1.0, 0, 0.1}) == ErrorKind::PreconditionViolated);
  CHECK(kind_of(Family::Ta2, {1.0, 0.1, 0, 0, 3.0}) == ErrorKind::ComplexBranch);
}

TEST_CASE("pushforward of the canonical structure") {
  Draws draws;
  int opposite_zero = 0;
  for (int i = 0; i < 50; ++i) {
    const oracle::Freq f = oracle::random_freq(draws.rng, 0.3, 3.0, 0.2);
    const PUParams p = make_params(f.w1, f.w2);
    for (Family fam : {Family::Ta2, Family::Tb1}) {
      FreeParameters free = draws.next();
      if (i % 5 == 0 && fam == Family::Ta2) free.a_y = -free.a_x;
      TransformMap m;
      try {
        m = solve_family(fam, i % 2 ? Branch::plus : Branch::minus, free, p);
      } catch (const Error&) {
        continue;
      }
      const Pushforward pf = pushforward_poisson(m);
      const double scale = std::max(1.0, pf.tensor.matrix().cwiseAbs().maxCoeff());
      CHECK(std::abs(pf.position_velocity - pf.position_velocity_closed_form) <= 1e-9 * scale);
      const bool vanishes = std::abs(pf.position_velocity) <= 1e-10 * scale;
      if (m.model.a_x * m.model.a_y > 0.0) CHECK_FALSE(vanishes);
      if (vanishes) {
        CHECK(m.model.a_x * m.model.a_y < 0.0);
        ++opposite_zero;
      }
      // Whenever the pushed structure is J1 itself, the 2D energy is indefinite.
      std::vector<Mat4> basis{j1(p).matrix()};
      if (linalg::projection_residual(basis, pf.tensor.matrix()) <= 1e-9) {
        CHECK_FALSE(positivity(first_order_hessian(m.model)).positive_definite);
      }
    }
  }
  CHECK(opposite_zero > 0);
  const PUParams p = make_params(1.0, 2.0);
  CHECK_THROWS_AS(pushforward_poisson(solve_family(Family::Ta1, Branch::plus, {1, 1, 0, 0, 0.2}, p)), Error);
  CHECK_THROWS_AS(pushforward_poisson(solve_family(Family::Tb2, Branch::plus, {1, 0, 0, 1.5, 0.2}, p)), Error);
}

TEST_CASE("pulled-back Hamiltonians lie in the blend span") {
  const PUParams p = make_params(1.0, 2.0);
  const TransformMap tb1 = solve_family(Family::Tb1, Branch::plus, {1.0, 0.0, 2.0, 0.0, 1.0}, p);
  const Pullback pb = pullback_hamiltonian(tb1);
  REQUIRE(pb.coeffs);
  CHECK(pb.fit.relative_residual <= 1e-10);
  CHECK(pb.fitted_charge_normalized->c1 == doctest::Approx(-3.0).epsilon(1e-10));
  CHECK(pb.fitted_charge_normalized->c2 == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(pb.table_prediction->c1 == doctest::Approx(-3.0));
  CHECK(pb.table_prediction->c2 == doctest::Approx(-1.0));

  Draws draws;
  for (int i = 0; i < 30; ++i) {
    FreeParameters free = draws.next();
    free.a_y = std::copysign(free.a_y, free.a_x);
    try {
      const TransformMap m = solve_family(Family::Ta2, Branch::plus, free, p);
      const Pullback q = pullback_hamiltonian(m);
      CHECK(q.fit.relative_residual <= 1e-10);
      CHECK(q.fitted_charge_normalized->c2 == doctest::Approx(q.table_prediction->c2).epsilon(1e-9));
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ComplexBranch);
    }
  }
  const Pullback degenerate = pullback_hamiltonian(solve_family(Family::Tb2, Branch::plus, {1, 0, 0, 1.5, 0.2}, p));
  CHECK_FALSE(degenerate.coeffs);
  CHECK_FALSE(degenerate.note.empty());
}

TEST_CASE("a map that breaks the dynamics is not in the blend span") {
  const PUParams p = make_params(1.0, 2.0);
  const TransformMap m = make_map(Family::Ta2, Branch::plus, 1.0, 0.3, -0.2, 1.1, {1, 1, 2, 3, 0.4}, p);
  CHECK_THROWS_AS(pullback_hamiltonian(m), Error);
}

TEST_CASE("sum-of-squares positivity agrees with the eigenvalue test") {
  std::mt19937_64 rng(271);
  int agree = 0, total = 0;
  for (int s = 0; s < 5; ++s) {
    const oracle::Freq f = oracle::random_freq(rng, 0.3, 3.0, 0.2);
    const PUParams p = make_params(f.w1, f.w2);
    for (int i = 0; i < 50; ++i)
      for (int k = 0; k < 50; ++k) {
        const double c1 = -5.0 + 10.0 * (i + 0.5) / 50.0;
        const double c2 = -5.0 + 10.0 * (k + 0.5) / 50.0;
        QuadraticObservable form;
        try {
          form = sum_of_squares(p, c1, c2);
        } catch (const Error& e) {
          CHECK(e.kind() == ErrorKind::SingularCoefficient);
          continue;
        }
        ++total;
        agree += positivity(form).positive_definite == sum_of_squares_positive(p, c1, c2);
        CHECK(fit_blend(p, form).relative_residual <= 1e-10);
      }
  }
  CHECK(agree == total);
}

TEST_CASE("blend positivity spot checks") {
  const PUParams p = make_params(1.0, 2.0);
  const oracle::Freq f{1.0, 2.0};
  const auto w = oracle::blend_mode_weights(f, -1.0, 2.0);
  CHECK(w[0] == doctest::Approx(3.0));
  CHECK(w[1] == doctest::Approx(24.0));
  CHECK(positivity(blend_h(p, -1.0, 2.0)).positive_definite);
  CHECK_FALSE(positivity(blend_h(p, 1.0, 0.0)).positive_definite);
  CHECK_FALSE(positivity(blend_h(p, 0.0, 1.0)).positive_definite);
  CHECK_FALSE(positivity(Mat4::Zero()).positive_definite);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> c(-4, 4);
  for (int i = 0; i < 200; ++i) {
    const double c1 = c(rng), c2 = c(rng);
    const auto wt = oracle::blend_mode_weights(f, c1, c2);
    if (std::min(std::abs(wt[0]), std::abs(wt[1])) < 1e-6) continue;
    CHECK(positivity(blend_h(p, c1, c2)).positive_definite == (wt[0] > 0 && wt[1] > 0));
  }
}
