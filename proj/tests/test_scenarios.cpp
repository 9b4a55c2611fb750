#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "hyperqsd/scenarios.hpp"
#include "test_support.hpp"

using namespace hyperqsd;
using hyperqsd::testing::Gen;
using hyperqsd::testing::mat2;
using hyperqsd::testing::max_diff;

namespace {

CounterexampleParams headline() {
  CounterexampleParams p;
  p.beta = 0.01;
  p.ell = 3000.0;
  p.gamma = 1.0;
  return p;
}

}  // namespace

TEST_CASE("spin observable and initial state") {
  const ComplexMatrix a = spin_observable();
  CHECK(expectation(a, initial_state()) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(expectation(a, validate_density(mat2(0.5, 0, 0, 0.5))) == 0.0);
  CHECK(max_diff(a * a, pauli::identity()) == 0.0);
  CHECK(is_hermitian(a, 0.0));

  CHECK(initial_state().purity() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(max_diff(initial_state().matrix(), density_from_state(initial_spin_state()).matrix()) < 1e-15);
}

TEST_CASE("run_counterexample headline") {
  const CounterexampleReport r = run_counterexample(headline());
  CHECK(r.a0 == doctest::Approx(30.0).epsilon(1e-15));
  CHECK(r.expectation_M == 1.0);
  CHECK(std::abs(r.expectation_R) <= 1e-6);
  // <A>_R = 2 Re rho_updown = e^{-15}
  CHECK(r.expectation_R == doctest::Approx(std::exp(-15.0)).epsilon(1e-8));
  CHECK(std::abs(r.discrepancy - 1.0) <= 1e-6);
  CHECK(r.offdiag_final == doctest::Approx(0.5 * std::exp(-15.0)).epsilon(1e-8));
  CHECK(r.boost_state_distance == 0.0);
  CHECK(r.warnings.empty());
}

TEST_CASE("run_counterexample degenerate cases") {
  CounterexampleParams p = headline();
  p.gamma = 0.0;
  CounterexampleReport r = run_counterexample(p);
  CHECK(r.expectation_R == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.expectation_M == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(r.discrepancy) <= 1e-9);
  CHECK_FALSE(r.warnings.empty());  // gamma a0 = 0 < 10

  p = headline();
  p.beta = 0.0;
  r = run_counterexample(p);
  CHECK(r.a0 == 0.0);
  CHECK(r.discrepancy == 0.0);

  p = headline();
  p.beta = 1.0;
  CHECK_THROWS_AS(run_counterexample(p), Error);
  p = headline();
  p.beta = -0.1;
  CHECK_THROWS_AS(run_counterexample(p), Error);
}

TEST_CASE("discrepancy follows the closed form and grows with reduction") {
  // oracle: <A>_R = e^{-gamma a0 / 2}, <A>_M = 1
  double previous = -1.0;
  for (double ga0 : {0.0, 1.0, 5.0, 10.0, 30.0}) {
    for (auto method : {LindbladMethod::Exact, LindbladMethod::Rk4}) {
      CounterexampleParams p = headline();
      p.gamma = ga0 / 30.0;
      p.method = method;
      const CounterexampleReport r = run_counterexample(p);
      CHECK(std::abs(r.discrepancy - (1.0 - std::exp(-0.5 * ga0))) <= 1e-6);
      if (method == LindbladMethod::Exact) {
        CHECK(r.discrepancy >= previous);
        previous = r.discrepancy;
      }
    }
  }
}

TEST_CASE("purity does not increase along the reduction") {
  double previous = 1.0 + 1e-15;
  for (double ell : {100.0, 500.0, 1000.0, 2000.0, 3000.0}) {
    CounterexampleParams p = headline();
    p.ell = ell;
    const double purity = run_counterexample(p).rho_R.purity();
    CHECK(purity <= previous);
    previous = purity;
  }
}

TEST_CASE("counterexample with the QSD unraveling") {
  CounterexampleParams p = headline();
  p.ell = 500.0;  // gamma a0 = 5
  p.qsd = QsdOptions{800, 11, 1e-2, 1};
  const CounterexampleReport r = run_counterexample(p);
  REQUIRE(r.qsd.has_value());
  CHECK(r.qsd->steps == 500);
  CHECK(r.qsd->step == doctest::Approx(1e-2));
  CHECK(std::abs(r.qsd->expectation_R - r.expectation_R) <= 5.0 / std::sqrt(800.0));
  CHECK(r.qsd->trace_distance <= 5.0 / std::sqrt(800.0));
}

TEST_CASE("check_unitary_consistency") {
  Gen g(17);
  const StateVector psi = g.state(2);

  // H = 0, K arbitrary, A commuting with K
  const ComplexMatrix k = 0.7 * pauli::x() + 0.2 * pauli::identity();
  const ConsistencyReport r1 = check_unitary_consistency(
      GeneratorSet::make(ComplexMatrix::Zero(2, 2), {k}), 0.3, 50.0, psi, pauli::x());
  CHECK(r1.deviation <= 1e-9);
  CHECK(r1.path_order_difference <= 1e-9);
  CHECK_FALSE(r1.dissipative);
  CHECK(contains_event(r1.rest_plane, r1.event, event_tolerance(r1.event)));
  CHECK(contains_event(r1.moving_plane, r1.event, event_tolerance(r1.event)));

  // H = sigma_z, K = 0, A = sigma_z
  const ConsistencyReport r2 = check_unitary_consistency(
      GeneratorSet::make(pauli::z(), {ComplexMatrix::Zero(2, 2)}), 0.01, 3000.0, psi, pauli::z());
  CHECK(r2.deviation <= 1e-9);
  CHECK(r2.event.t == doctest::Approx(30.0));

  try {
    check_unitary_consistency(GeneratorSet::make(pauli::z(), {pauli::x()}), 0.1, 1.0, psi, pauli::z());
    FAIL("expected NonCommutingGenerators");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonCommutingGenerators);
    CHECK(e.magnitude() == doctest::Approx(2.0));
  }
  CHECK_THROWS_AS(check_unitary_consistency(
                      GeneratorSet::make(pauli::z(), {}, {two_level_dephasing(1.0)}), 0.1, 1.0,
                      psi, pauli::z()),
                  Error);
}

TEST_CASE("dissipation breaks observer consistency") {
  const ConsistencyReport r = check_dissipative_consistency(headline());
  CHECK(r.dissipative);
  CHECK(std::abs(r.deviation - (1.0 - std::exp(-15.0))) <= 1e-6);
  CHECK(contains_event(r.rest_plane, r.event, event_tolerance(r.event)));
  CHECK(contains_event(r.moving_plane, r.event, event_tolerance(r.event)));
}

TEST_CASE("sweep_velocity at constant a0") {
  const auto rows = sweep_velocity(headline(), {0.02, 0.01, 0.005});
  REQUIRE(rows.size() == 3);
  for (const auto& row : rows) {
    CHECK(row.a0 == doctest::Approx(30.0).epsilon(1e-12));
    CHECK(row.ell * row.beta == doctest::Approx(30.0).epsilon(1e-12));
    CHECK(std::abs(row.discrepancy - 1.0) <= 1e-6);
  }

  const auto zero = sweep_velocity(headline(), {0.0});
  REQUIRE(zero.size() == 1);
  CHECK(zero[0].discrepancy == 0.0);
  CHECK_THROWS_AS(sweep_velocity(headline(), {}), Error);
}

TEST_CASE("sweep_velocity with a toy boost generator") {
  // Oracle: exp(-i eta sigma_y / 2) rotates the +x state about y by eta, so
  // <A>_M = cos(eta) and the state moves by trace distance sin(eta / 2).
  const ComplexMatrix k = 0.5 * pauli::y();
  const auto rows = sweep_velocity(headline(), {0.02, 0.01, 0.005}, k);
  for (const auto& row : rows) {
    const double eta = std::atanh(row.beta);
    CHECK(row.expectation_M == doctest::Approx(std::cos(eta)).epsilon(1e-12));
    CHECK(std::abs(row.discrepancy - (std::cos(eta) - std::exp(-15.0))) <= 1e-12);
    CHECK(row.boost_state_distance == doctest::Approx(std::sin(0.5 * eta)).epsilon(1e-9));
  }
  // the state deviation is first order in beta
  CHECK(rows[0].boost_state_distance / rows[1].boost_state_distance == doctest::Approx(2.0).epsilon(0.05));
  CHECK(rows[1].boost_state_distance / rows[2].boost_state_distance == doctest::Approx(2.0).epsilon(0.05));
  // <A> sits at an extremum on the initial state, so |discrepancy - 1| is second order
  const double r01 = std::abs(rows[0].discrepancy - 1.0) / std::abs(rows[1].discrepancy - 1.0);
  CHECK(r01 == doctest::Approx(4.0).epsilon(0.02));
}
