#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numbers>

#include "hyperqsd/linalg.hpp"
#include "test_support.hpp"

using namespace hyperqsd;
using hyperqsd::testing::Gen;
using hyperqsd::testing::mat2;
using hyperqsd::testing::max_diff;

namespace {
const Complex I(0.0, 1.0);

ComplexMatrix superposition() { return ComplexMatrix::Constant(2, 2, 0.5); }
}  // namespace

TEST_CASE("dagger") {
  CHECK(dagger(pauli::identity()) == pauli::identity());
  CHECK(dagger(mat2(0, 1, 0, 0)) == mat2(0, 0, 1, 0));
  CHECK(dagger(mat2(0, I, 0, 0)) == mat2(0, 0, -I, 0));
  Gen g(7);
  const ComplexMatrix m = g.matrix(4);
  CHECK(dagger(dagger(m)) == m);
}

TEST_CASE("expm_generator closed forms") {
  Gen g(11);
  CHECK(max_diff(expm_generator(g.hermitian(3), 0.0), pauli::identity(3)) == 0.0);

  // exp(-i pi sigma_z) = diag(e^{-i pi}, e^{i pi}) = -I
  CHECK(max_diff(expm_generator(pauli::z(), std::numbers::pi), -pauli::identity()) < 1e-14);
  // exp(-i (pi/2) sigma_x) = cos(pi/2) I - i sin(pi/2) sigma_x
  CHECK(max_diff(expm_generator(pauli::x(), std::numbers::pi / 2), -I * pauli::x()) < 1e-14);
}

TEST_CASE("expm_generator rejects non-Hermitian generators") {
  try {
    expm_generator(mat2(0, 1, 0, 0), 1.0);
    FAIL("expected NonHermitianInput");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonHermitianInput);
    CHECK(e.magnitude() == doctest::Approx(1.0));
  }
}

TEST_CASE("expectation") {
  const DensityMatrix eq10 = validate_density(superposition());
  const DensityMatrix mixed = validate_density(mat2(0.5, 0, 0, 0.5));
  CHECK(expectation(pauli::x(), eq10) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(expectation(pauli::x(), mixed) == 0.0);
  Gen g(3);
  CHECK(expectation(pauli::identity(3), g.density(3)) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(expectation(pauli::identity(3), eq10), Error);
  try {
    expectation(pauli::identity(3), eq10);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimMismatch);
  }
}

TEST_CASE("density_from_state") {
  ComplexVector up(2);
  up << 1.0, 0.0;
  CHECK(density_from_state(StateVector::normalized(up)).matrix() == mat2(1, 0, 0, 0));

  ComplexVector plus(2);
  plus << 1.0, 1.0;
  const DensityMatrix rho = density_from_state(StateVector::normalized(plus));
  CHECK(max_diff(rho.matrix(), superposition()) < 1e-15);
  CHECK(rho.purity() == doctest::Approx(1.0).epsilon(1e-12));

  Gen g(5);
  const DensityMatrix r = density_from_state(StateVector::raw(3.0 * g.vector(5)));
  CHECK(std::abs(r.matrix().trace() - 1.0) < 1e-12);
  CHECK(hermiticity_error(r.matrix()) < 1e-15);

  try {
    StateVector::normalized(ComplexVector::Zero(2));
    FAIL("expected ZeroNorm");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroNorm);
  }
  CHECK_THROWS_AS(density_from_state(StateVector::raw(ComplexVector::Constant(2, 1e-14))), Error);
}

TEST_CASE("trace_distance") {
  Gen g(9);
  const DensityMatrix rho = g.density(3);
  CHECK(trace_distance(rho, rho) == 0.0);
  const DensityMatrix up = validate_density(mat2(1, 0, 0, 0));
  const DensityMatrix down = validate_density(mat2(0, 0, 0, 1));
  CHECK(trace_distance(up, down) == doctest::Approx(1.0).epsilon(1e-15));
  // difference [[0, 1/2], [1/2, 0]] has eigenvalues +-1/2
  CHECK(trace_distance(validate_density(superposition()), validate_density(mat2(0.5, 0, 0, 0.5))) ==
        doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(trace_distance(rho, up), Error);
}

TEST_CASE("validate_density") {
  CHECK_NOTHROW(validate_density(superposition()));

  // trace of diag(2, -1) is 1, so only positivity fails
  try {
    validate_density(mat2(2, 0, 0, -1));
    FAIL("expected NotPositive");
  } catch (const Error& e) {
    CHECK(e.has(ErrorCode::NotPositive));
    CHECK_FALSE(e.has(ErrorCode::BadTrace));
    CHECK(e.magnitude() == doctest::Approx(1.0));
  }

  try {
    validate_density(mat2(2, 0, 0, -0.5));
    FAIL("expected BadTrace and NotPositive");
  } catch (const Error& e) {
    REQUIRE(e.violations().size() == 2);
    CHECK(e.violations()[0].code == ErrorCode::BadTrace);
    CHECK(e.violations()[0].magnitude == doctest::Approx(0.5));
    CHECK(e.violations()[1].code == ErrorCode::NotPositive);
    CHECK(e.violations()[1].magnitude == doctest::Approx(0.5));
    CHECK(std::string(e.what()).find("BadTrace") != std::string::npos);
  }

  // eigenvalues 0.5 +- 0.6
  try {
    validate_density(mat2(0.5, 0.6, 0.6, 0.5));
    FAIL("expected NotPositive");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotPositive);
    CHECK(e.magnitude() == doctest::Approx(0.1).epsilon(1e-12));
  }

  try {
    validate_density(mat2(0.5, 0.1, 0.2, 0.5));
    FAIL("expected NotHermitian");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotHermitian);
    CHECK(e.magnitude() == doctest::Approx(0.1));
  }

  // configured tolerances are honoured
  const ComplexMatrix slightly_off = mat2(0.5 + 1e-7, 0, 0, 0.5);
  CHECK_THROWS_AS(validate_density(slightly_off), Error);
  CHECK_NOTHROW(validate_density(slightly_off, {1e-9, 1e-6, 1e-9}));

  ComplexMatrix rect(2, 3);
  rect.setZero();
  CHECK_THROWS_AS(validate_density(rect), Error);
  CHECK_THROWS_AS(validate_density(mat2(std::nan(""), 0, 0, 1)), Error);
}

TEST_CASE("operator_norm and commutator") {
  CHECK(operator_norm(pauli::x()) == doctest::Approx(1.0));
  CHECK(operator_norm(mat2(0, 3, 0, 0)) == doctest::Approx(3.0));
  CHECK(max_diff(commutator(pauli::x(), pauli::y()), 2.0 * I * pauli::z()) < 1e-15);
}
