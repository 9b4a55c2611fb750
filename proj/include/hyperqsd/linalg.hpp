#pragma once

// Dense complex linear algebra for small Hilbert spaces (dim 2..64) and the
// validated state types built on it. Everything here is a pure function of its
// arguments and safe to call from any thread.

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

#include "hyperqsd/error.hpp"

namespace hyperqsd {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr double kDefaultHermitianTol = 1e-9;
inline constexpr double kDefaultTraceTol = 1e-9;
inline constexpr double kDefaultPositiveTol = 1e-9;

struct Tolerances {
  double hermitian = kDefaultHermitianTol;
  double trace = kDefaultTraceTol;
  double positive = kDefaultPositiveTol;

  friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

// Throws DimMismatch if M is not square, NonFinite on NaN/Inf entries.
void require_square_finite(const ComplexMatrix& m, const char* what = "matrix");

ComplexMatrix dagger(const ComplexMatrix& m);
ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);

// Largest |M - M^dagger| entry.
double hermiticity_error(const ComplexMatrix& m);
bool is_hermitian(const ComplexMatrix& m, double tol = kDefaultHermitianTol);

// Largest absolute entry.
double max_abs(const ComplexMatrix& m);
// Spectral norm, i.e. the largest singular value.
double operator_norm(const ComplexMatrix& m);

namespace pauli {
ComplexMatrix identity(std::ptrdiff_t dim = 2);
ComplexMatrix x();
ComplexMatrix y();
ComplexMatrix z();
}  // namespace pauli

/// A pure state. `normalized` enforces unit norm; `raw` keeps whatever norm the
/// amplitudes have (used for unnormalized QSD runs) but still requires finite
/// entries.
class StateVector {
 public:
  static StateVector normalized(ComplexVector amplitudes);
  static StateVector raw(ComplexVector amplitudes);

  const ComplexVector& amplitudes() const noexcept { return amplitudes_; }
  std::ptrdiff_t dim() const noexcept { return amplitudes_.size(); }
  double norm() const { return amplitudes_.norm(); }
  Complex operator[](std::ptrdiff_t i) const { return amplitudes_(i); }

 private:
  explicit StateVector(ComplexVector a) : amplitudes_(std::move(a)) {}
  ComplexVector amplitudes_;
};

/// Hermitian, unit-trace, positive semidefinite matrix. Only obtainable
/// through validate_density (or the library's own propagators, which validate).
class DensityMatrix {
 public:
  const ComplexMatrix& matrix() const noexcept { return m_; }
  std::ptrdiff_t dim() const noexcept { return m_.rows(); }
  Complex operator()(std::ptrdiff_t i, std::ptrdiff_t j) const { return m_(i, j); }
  double purity() const;

 private:
  friend DensityMatrix validate_density(const ComplexMatrix&, const Tolerances&);
  explicit DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {}
  ComplexMatrix m_;
};

/// Checks Hermiticity, unit trace and positivity. All violations found are
/// reported together in a single Error (NotHermitian, BadTrace, NotPositive),
/// each with its magnitude.
DensityMatrix validate_density(const ComplexMatrix& rho, const Tolerances& tol = {});

/// U = exp(-i s G) for Hermitian G, via the Hermitian eigendecomposition.
/// Throws NonHermitianInput if G fails the Hermiticity check.
ComplexMatrix expm_generator(const ComplexMatrix& g, double s,
                             double hermitian_tol = kDefaultHermitianTol);

/// Re tr{A rho}. Throws DimMismatch, NonHermitianInput for a non-Hermitian A,
/// and NotHermitian if the imaginary part of the trace exceeds 1e-10.
double expectation(const ComplexMatrix& a, const DensityMatrix& rho);
/// <psi|A|psi> / <psi|psi>.
double expectation(const ComplexMatrix& a, const StateVector& psi);

/// |psi><psi| of the normalized state. ZeroNorm if |psi| < 1e-12.
DensityMatrix density_from_state(const StateVector& psi);

/// Half the sum of absolute eigenvalues of rho1 - rho2.
double trace_distance(const DensityMatrix& rho1, const DensityMatrix& rho2);

}  // namespace hyperqsd
