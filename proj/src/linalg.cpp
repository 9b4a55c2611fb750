#include "hyperqsd/linalg.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

namespace hyperqsd {

namespace {

constexpr double kZeroNorm = 1e-12;
constexpr double kImagTraceTol = 1e-10;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

void require_same_dim(std::ptrdiff_t a, std::ptrdiff_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::DimMismatch,
                std::string(what) + ": " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace

void require_square_finite(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorCode::DimMismatch, std::string(what) + " is not a non-empty square matrix (" +
                                            std::to_string(m.rows()) + "x" +
                                            std::to_string(m.cols()) + ")");
  }
  if (!m.allFinite()) throw Error(ErrorCode::NonFinite, std::string(what) + " has non-finite entries");
}

ComplexMatrix dagger(const ComplexMatrix& m) { return m.adjoint(); }

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dim(a.rows(), b.rows(), "commutator");
  return a * b - b * a;
}

double hermiticity_error(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

bool is_hermitian(const ComplexMatrix& m, double tol) {
  return m.rows() == m.cols() && hermiticity_error(m) <= tol;
}

double max_abs(const ComplexMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double operator_norm(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m.adjoint() * m, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

namespace pauli {
ComplexMatrix identity(std::ptrdiff_t dim) { return ComplexMatrix::Identity(dim, dim); }
ComplexMatrix x() {
  ComplexMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}
ComplexMatrix y() {
  ComplexMatrix m(2, 2);
  m << 0.0, Complex(0, -1), Complex(0, 1), 0.0;
  return m;
}
ComplexMatrix z() {
  ComplexMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}
}  // namespace pauli

StateVector StateVector::normalized(ComplexVector amplitudes) {
  if (!amplitudes.allFinite()) throw Error(ErrorCode::NonFinite, "state has non-finite amplitudes");
  const double n = amplitudes.norm();
  if (n < kZeroNorm) throw Error(ErrorCode::ZeroNorm, "state norm " + num(n), n);
  amplitudes /= n;
  return StateVector(std::move(amplitudes));
}

StateVector StateVector::raw(ComplexVector amplitudes) {
  if (amplitudes.size() == 0) throw Error(ErrorCode::DimMismatch, "empty state");
  if (!amplitudes.allFinite()) throw Error(ErrorCode::NonFinite, "state has non-finite amplitudes");
  return StateVector(std::move(amplitudes));
}

double DensityMatrix::purity() const { return (m_ * m_).trace().real(); }

DensityMatrix validate_density(const ComplexMatrix& rho, const Tolerances& tol) {
  require_square_finite(rho, "density matrix");
  std::vector<Violation> found;
  std::string msg;

  const double herm = hermiticity_error(rho);
  if (herm > tol.hermitian) {
    found.push_back({ErrorCode::NotHermitian, herm});
    msg += "NotHermitian: |rho - rho^dagger|max = " + num(herm) + "; ";
  }
  const Complex tr = rho.trace();
  const double trace_err = std::abs(tr - 1.0);
  if (trace_err > tol.trace) {
    found.push_back({ErrorCode::BadTrace, trace_err});
    msg += "BadTrace: |tr - 1| = " + num(trace_err) + "; ";
  }
  // Positivity is judged on the Hermitian part so a tiny anti-Hermitian
  // residue cannot mask or fake a negative eigenvalue.
  const ComplexMatrix h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -tol.positive) {
    found.push_back({ErrorCode::NotPositive, -min_eig});
    msg += "NotPositive: smallest eigenvalue " + num(min_eig) + "; ";
  }
  if (!found.empty()) {
    msg.resize(msg.size() - 2);
    throw Error(std::move(found), msg);
  }
  return DensityMatrix(rho);
}

ComplexMatrix expm_generator(const ComplexMatrix& g, double s, double hermitian_tol) {
  require_square_finite(g, "generator");
  const double herm = hermiticity_error(g);
  if (herm > hermitian_tol) {
    throw Error(ErrorCode::NonHermitianInput, "generator Hermiticity error " + num(herm), herm);
  }
  if (s == 0.0) return ComplexMatrix::Identity(g.rows(), g.cols());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (g + g.adjoint()));
  const auto& v = es.eigenvectors();
  ComplexVector phases(g.rows());
  for (Eigen::Index k = 0; k < phases.size(); ++k) {
    const double theta = -s * es.eigenvalues()(k);
    phases(k) = Complex(std::cos(theta), std::sin(theta));
  }
  return v * phases.asDiagonal() * v.adjoint();
}

double expectation(const ComplexMatrix& a, const DensityMatrix& rho) {
  require_square_finite(a, "observable");
  require_same_dim(a.rows(), rho.dim(), "expectation");
  const double herm = hermiticity_error(a);
  if (herm > kDefaultHermitianTol) {
    throw Error(ErrorCode::NonHermitianInput, "observable Hermiticity error " + num(herm), herm);
  }
  const Complex tr = (a * rho.matrix()).trace();
  if (std::abs(tr.imag()) > kImagTraceTol) {
    throw Error(ErrorCode::NotHermitian, "Im tr{A rho} = " + num(tr.imag()), std::abs(tr.imag()));
  }
  return tr.real();
}

double expectation(const ComplexMatrix& a, const StateVector& psi) {
  require_same_dim(a.rows(), psi.dim(), "expectation");
  const auto& v = psi.amplitudes();
  return (v.dot(a * v)).real() / v.squaredNorm();
}

DensityMatrix density_from_state(const StateVector& psi) {
  const double n = psi.norm();
  if (n < kZeroNorm) throw Error(ErrorCode::ZeroNorm, "state norm " + num(n), n);
  const ComplexVector v = psi.amplitudes() / n;
  return validate_density(v * v.adjoint());
}

double trace_distance(const DensityMatrix& rho1, const DensityMatrix& rho2) {
  require_same_dim(rho1.dim(), rho2.dim(), "trace_distance");
  const ComplexMatrix d = rho1.matrix() - rho2.matrix();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace hyperqsd
