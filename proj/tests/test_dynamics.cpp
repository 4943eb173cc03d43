#include "oracles.hpp"
#include "puo/dynamics.hpp"

#include <doctest.h>

using namespace puo;
using namespace puo::dynamics;

TEST_CASE("mode decomposition examples") {
  const PUParams p = make_params(1.0, 2.0);
  auto m = mode_decompose(p, {1, 0, -1, 0});
  CHECK(std::abs(m.a1 - std::complex<double>(0.5, 0.0)) <= 1e-15);
  CHECK(std::abs(m.a2) <= 1e-15);
  CHECK(mode_energy(p, m).total == doctest::Approx(-1.5).epsilon(1e-14));
  m = mode_decompose(p, {1, 0, -4, 0});
  CHECK(std::abs(m.a1) <= 1e-15);
  CHECK(std::abs(m.a2 - std::complex<double>(0.5, 0.0)) <= 1e-15);
  CHECK(mode_energy(p, m).total == doctest::Approx(6.0).epsilon(1e-14));
  m = mode_decompose(p, {0, 0, 0, 0});
  CHECK(mode_energy(p, m).total == 0.0);
}

TEST_CASE("mode round trip, energy identity and no cross terms") {
  std::mt19937_64 rng(1000);
  for (int i = 0; i < 1000; ++i) {
    const oracle::Freq f = oracle::random_freq(rng, 0.2, 5.0, 0.05);
    const PUParams p = make_params(f.w1, f.w2);
    const Vec4 z = oracle::random_state(rng);
    const ModeAmplitudes m = mode_decompose(p, JetState::from(z));
    CHECK((reconstruct(p, m).vec() - z).norm() <= 1e-12 * std::max(1.0, z.norm()));
    const double scale = std::max(1.0, (f.alpha() + f.beta() + 1.0) * z.squaredNorm());
    CHECK(std::abs(mode_energy(p, m).total - oracle::h1(f, z)) <= 1e-10 * scale);
    const Vec4 only1 = reconstruct(p, {m.a1, 0.0}).vec();
    const Vec4 only2 = reconstruct(p, {0.0, m.a2}).vec();
    CHECK(std::abs(oracle::h1(f, z) - oracle::h1(f, only1) - oracle::h1(f, only2)) <= 1e-12 * scale);
    CHECK(std::abs(oracle::h2(f, z) - oracle::h2(f, only1) - oracle::h2(f, only2)) <= 1e-12 * scale);
  }
}

TEST_CASE("free trajectory follows the closed form") {
  const PUParams p = make_params(1.0, 2.0);
  const oracle::Freq f{1.0, 2.0};
  const Trajectory tr = integrate(p, free_vector_field(p), {1, 0, -1, 0}, 100.0, {1e-10, 10.0, {}});
  CHECK_FALSE(tr.escaped);
  CHECK(tr.times.front() == 0.0);
  CHECK(tr.times.back() == 100.0);
  CHECK(tr.times.size() == 1001);
  double err = 0.0, cos_err = 0.0;
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    err = std::max(err, (tr.states[i].vec() - oracle::free_solution(f, {1, 0, -1, 0}, tr.times[i])).norm());
    cos_err = std::max(cos_err, std::abs(tr.states[i].q - std::cos(tr.times[i])));
  }
  CHECK(err < 1e-6);
  CHECK(cos_err < 1e-7);
  CHECK(tr.meta.h1_drift < 1e-8);
  CHECK(tr.meta.h2_drift < 1e-8);
  CHECK(tr.meta.h1_drift <= tr.meta.drift_tolerance);
  for (std::size_t i = 1; i < tr.times.size(); ++i) CHECK(tr.times[i] > tr.times[i - 1]);
  CHECK(tr.h1_series.size() == tr.times.size());
  CHECK(tr.h2_series.size() == tr.times.size());
}

TEST_CASE("free conservation over random states and parameters") {
  std::mt19937_64 rng(55);
  for (int s = 0; s < 5; ++s) {
    const oracle::Freq f = oracle::random_freq(rng, 0.5, 2.5, 0.2);
    const PUParams p = make_params(f.w1, f.w2);
    for (int i = 0; i < 20; ++i) {
      const Vec4 z0 = oracle::random_state(rng);
      const Trajectory tr = integrate(p, free_vector_field(p), JetState::from(z0), 100.0, {1e-10, 2.0, {}});
      CHECK(tr.meta.h1_drift < 1e-8);
      CHECK(tr.meta.h2_drift < 1e-8);
      double err = 0.0;
      for (std::size_t k = 0; k < tr.times.size(); ++k) {
        err = std::max(err, (tr.states[k].vec() - free_solution(p, JetState::from(z0), tr.times[k]).vec()).norm());
      }
      CHECK(err < 1e-6);
    }
  }
}

TEST_CASE("closed form agrees with the matrix exponential") {
  std::mt19937_64 rng(56);
  for (int i = 0; i < 50; ++i) {
    const oracle::Freq f = oracle::random_freq(rng, 0.3, 3.0, 0.1);
    const PUParams p = make_params(f.w1, f.w2);
    const Vec4 z0 = oracle::random_state(rng);
    const double t = 10.0 * i / 50.0;
    CHECK((free_solution(p, JetState::from(z0), t).vec() - oracle::free_solution(f, z0, t)).norm() <= 1e-9);
  }
}

TEST_CASE("zero state is a fixed point") {
  const PUParams p = make_params(1.0, 2.0);
  const Trajectory tr = integrate(p, free_vector_field(p), {0, 0, 0, 0}, 10.0);
  for (const auto& z : tr.states) CHECK(z.vec().norm() == 0.0);
}

TEST_CASE("chart equivalence") {
  const PUParams p = make_params(1.0, 2.0);
  const OstroState s0{0.0, 0.0, 0.5, -0.5};
  for (double lambda : {0.0, 2.0}) {
    const VectorField field = lambda > 0 ? interacting_vector_field(p, Potential::quartic(lambda)) : free_vector_field(p);
    const Trajectory a = integrate(p, field, ostro_to_jet(p, s0), 50.0, {1e-11, 4.0, {}});
    const Trajectory b = integrate_ostrogradsky(p, field, s0, 50.0, {1e-11, 4.0, {}});
    REQUIRE(a.times.size() == b.times.size());
    double err = 0.0;
    for (std::size_t i = 0; i < a.times.size(); ++i) err = std::max(err, (a.states[i].vec() - b.states[i].vec()).norm());
    CHECK(err < 1e-7);
    CHECK(b.meta.chart == Chart::ostrogradsky);
  }
}

TEST_CASE("interacting runs conserve H1 + W and break H2") {
  const PUParams p = make_params(1.0, 2.0);
  const JetState z0 = ostro_to_jet(p, {0.0, 0.0, 0.5, -0.5});
  double worst_h2 = 0.0;
  for (double lambda : {0.5, 2.0, 5.0}) {
    const Trajectory tr = integrate(p, interacting_vector_field(p, Potential::quartic(lambda)), z0, 200.0, {1e-10, 5.0, {}});
    REQUIRE_FALSE(tr.escaped);
    CHECK(tr.meta.hint_drift < 1e-7);
    worst_h2 = std::max(worst_h2, tr.meta.h2_drift);
  }
  CHECK(worst_h2 > 1e-2);
}

TEST_CASE("runaway verdicts") {
  const PUParams p = make_params(1.0, 2.0);
  const JetState z0 = ostro_to_jet(p, {0.0, 0.0, 0.5, -0.5});
  const RunawayVerdict free = runaway_scan(p, Potential::quartic(0.0), z0, 200.0);
  CHECK(free.bounded);
  CHECK_FALSE(free.escape_time);
  CHECK(free.max_norm < free.escape_radius);
  const RunawayVerdict strong = runaway_scan(p, Potential::quartic(100.0), z0, 200.0);
  CHECK_FALSE(strong.bounded);
  REQUIRE(strong.escape_time);
  CHECK(*strong.escape_time < 200.0);
  CHECK(strong.max_norm >= strong.escape_radius);
  CHECK(strong.escape_radius == doctest::Approx(1e3));
  CHECK_THROWS_AS(runaway_scan(p, Potential::quartic(1.0), z0, 200.0, 0.1), Error);

  const Trajectory tr = integrate(p, interacting_vector_field(p, Potential::quartic(100.0)), z0, 200.0);
  CHECK(tr.escaped);
  CHECK(tr.times.back() == doctest::Approx(*strong.escape_time).epsilon(1e-9));
  CHECK(tr.states.back().vec().norm() == doctest::Approx(1e3).epsilon(1e-6));
}

TEST_CASE("integrator settings are validated") {
  const PUParams p = make_params(1.0, 2.0);
  CHECK_THROWS_AS(integrate(p, free_vector_field(p), {1, 0, 0, 0}, 1.0, {1e-14, 1.0, {}}), Error);
  CHECK_THROWS_AS(integrate(p, free_vector_field(p), {1, 0, 0, 0}, 1.0, {1e-2, 1.0, {}}), Error);
  CHECK_THROWS_AS(integrate(p, free_vector_field(p), {1, 0, 0, 0}, -1.0), Error);
}

TEST_CASE("step underflow reports the last good time") {
  // q''' += q^3 with a huge coefficient blows up in finite time; without an escape radius
  // the step size collapses.
  integrator::Settings s;
  s.tol = 1e-10;
  s.sample_rate = 0.0;
  try {
    (void)integrator::integrate([](const Vec4& z) { return Vec4(z[0] * z[0], 0, 0, 0); }, Vec4(1, 0, 0, 0), 2.0, s);
    FAIL("expected StepUnderflowError");
  } catch (const StepUnderflowError& e) {
    CHECK(e.last_good_time() == doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("threshold search degenerate ranges") {
  const PUParams p = make_params(1.0, 2.0);
  const JetState z0 = ostro_to_jet(p, {0.0, 0.0, 0.5, -0.5});
  try {
    (void)threshold_search(p, z0, 200.0, 0.0, 0.0);
    FAIL("expected all-bounded");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AllBounded);
  }
  try {
    (void)threshold_search(p, z0, 200.0, 100.0, 200.0, {8, 0, 1e-8, {}});
    FAIL("expected all-unbounded");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AllUnbounded);
  }
  CHECK_THROWS_AS(threshold_search(p, z0, 200.0, 5.0, 1.0), Error);
}

TEST_CASE("threshold search brackets a transition") {
  const PUParams p = make_params(1.0, 2.0);
  const JetState z0 = ostro_to_jet(p, {0.0, 0.0, 0.5, -0.5});
  const ThresholdReport r = threshold_search(p, z0, 200.0, 0.0, 30.0, {32, 20, 1e-10, {}});
  CHECK(r.grid.size() == 32);
  CHECK(r.grid.front().lambda == 0.0);
  CHECK(r.grid.front().verdict.bounded);
  CHECK(r.lambda_bounded < r.lambda_unbounded);
  CHECK(r.lambda_unbounded - r.lambda_bounded < 1e-3);
  CHECK(runaway_scan(p, Potential::quartic(r.lambda_bounded), z0, 200.0).bounded);
  CHECK_FALSE(runaway_scan(p, Potential::quartic(r.lambda_unbounded), z0, 200.0).bounded);
  for (std::size_t i = 1; i < r.grid.size(); ++i) CHECK(r.grid[i].lambda > r.grid[i - 1].lambda);
}

TEST_CASE("mode energy under time evolution") {
  const PUParams p = make_params(0.9, 1.6);
  const ModeAmplitudes m{{0.2, -0.1}, {0.05, 0.3}};
  const double e0 = mode_energy(p, m).total;
  for (double t : {0.5, 3.0, 17.0}) {
    const JetState z = reconstruct(p, m, t);
    CHECK(h1(p)(z) == doctest::Approx(e0).epsilon(1e-12));
  }
}
