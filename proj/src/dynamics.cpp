#include "hyperqsd/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "hyperqsd/rng.hpp"

namespace hyperqsd {

namespace {

constexpr double kZeroNorm = 1e-12;

void require_dim(std::ptrdiff_t got, std::ptrdiff_t want, const char* what) {
  if (got != want) {
    throw Error(ErrorCode::DimMismatch, std::string(what) + ": dim " + std::to_string(got) +
                                            ", generators have dim " + std::to_string(want));
  }
}

// Active (non-zero) Lindblad operators only.
std::vector<ComplexMatrix> active_lindblads(const GeneratorSet& gen) {
  std::vector<ComplexMatrix> out;
  for (const auto& l : gen.lindblads()) {
    if (max_abs(l) > 0.0) out.push_back(l);
  }
  return out;
}

DensityMatrix unitary_evolve(const DensityMatrix& rho, const ComplexMatrix& u) {
  return validate_density(u * rho.matrix() * u.adjoint());
}

ComplexMatrix liouvillian(const GeneratorSet& gen) {
  const auto d = gen.dim();
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);
  const ComplexMatrix& h = gen.hamiltonian();
  // Column-major vec: vec(A X B) = (B^T kron A) vec(X).
  ComplexMatrix lv = Complex(0, -1) * (Eigen::kroneckerProduct(id, h).eval() -
                                       Eigen::kroneckerProduct(h.transpose(), id).eval());
  for (const auto& l : gen.lindblads()) {
    const ComplexMatrix ldl = l.adjoint() * l;
    lv += Eigen::kroneckerProduct(l.conjugate(), l).eval();
    lv -= 0.5 * Eigen::kroneckerProduct(id, ldl).eval();
    lv -= 0.5 * Eigen::kroneckerProduct(ldl.transpose(), id).eval();
  }
  return lv;
}

ComplexMatrix propagate_exact(const ComplexMatrix& rho0, const GeneratorSet& gen, double span) {
  const auto d = gen.dim();
  const ComplexMatrix prop = (liouvillian(gen) * Complex(span, 0.0)).exp();
  const ComplexVector v = prop * Eigen::Map<const ComplexVector>(rho0.data(), d * d);
  return Eigen::Map<const ComplexMatrix>(v.data(), d, d);
}

ComplexMatrix propagate_rk4(const ComplexMatrix& rho0, const GeneratorSet& gen, double span,
                            double step) {
  const auto ls = active_lindblads(gen);
  ComplexMatrix g = Complex(0, -1) * gen.hamiltonian();
  for (const auto& l : ls) g -= 0.5 * l.adjoint() * l;
  const ComplexMatrix gd = g.adjoint();

  auto rhs = [&](const ComplexMatrix& r) {
    ComplexMatrix out = g * r + r * gd;
    for (const auto& l : ls) out.noalias() += l * r * l.adjoint();
    return out;
  };

  const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(span / step - 1e-9)));
  const double h = span / static_cast<double>(n);
  if (h * liouvillian_norm_bound(gen) > 1.0) {
    throw Error(ErrorCode::StepTooLarge,
                "step * generator bound = " + std::to_string(h * liouvillian_norm_bound(gen)) +
                    " > 1",
                h * liouvillian_norm_bound(gen));
  }
  ComplexMatrix r = rho0;
  for (std::size_t i = 0; i < n; ++i) {
    const ComplexMatrix k1 = rhs(r);
    const ComplexMatrix k2 = rhs(r + 0.5 * h * k1);
    const ComplexMatrix k3 = rhs(r + 0.5 * h * k2);
    const ComplexMatrix k4 = rhs(r + h * k3);
    r += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return r;
}

// Reusable QSD stepper: precomputes the deterministic part of the drift and
// keeps work buffers so that a trajectory allocates nothing per step. `Dim` is
// a compile-time dimension for the common two-level case, or Eigen::Dynamic.
template <int Dim>
class QsdStepper {
 public:
  using Vec = Eigen::Matrix<Complex, Dim, 1>;
  using Mat = Eigen::Matrix<Complex, Dim, Dim>;

  explicit QsdStepper(const GeneratorSet& gen) : lpsi_(gen.lindblads().size()) {
    Mat base = Complex(0, -1) * gen.hamiltonian();
    for (const auto& l : gen.lindblads()) {
      base -= 0.5 * l.adjoint() * l;
      ls_.push_back(l);
    }
    base_ = base;
    for (auto& v : lpsi_) v.resize(gen.dim());
    dpsi_.resize(gen.dim());
  }

  std::size_t noise_channels() const noexcept { return ls_.size(); }

  // psi is updated in place. `dxi` has noise_channels() entries or is null.
  void step(Vec& psi, const Complex* dxi, double da, bool renormalize) {
    const double norm2 = psi.squaredNorm();
    dpsi_.noalias() = da * (base_ * psi);
    for (std::size_t k = 0; k < ls_.size(); ++k) {
      lpsi_[k].noalias() = ls_[k] * psi;
      const Complex mean = psi.dot(lpsi_[k]) / norm2;
      Complex coef_l = std::conj(mean) * da;
      Complex coef_psi = -0.5 * std::norm(mean) * da;
      if (dxi != nullptr) {
        coef_l += dxi[k];
        coef_psi -= mean * dxi[k];
      }
      dpsi_ += coef_l * lpsi_[k] + coef_psi * psi;
    }
    psi += dpsi_;
    const double n = psi.norm();
    if (!(n >= kZeroNorm)) {
      throw Error(ErrorCode::ZeroNorm, "QSD state norm collapsed to " + std::to_string(n), n);
    }
    if (renormalize) psi /= n;
  }

 private:
  std::vector<Mat> ls_;
  Mat base_;
  std::vector<Vec> lpsi_;
  Vec dpsi_;
};

void require_trajectory_config(const TrajectoryConfig& cfg) {
  if (!(cfg.step > 0.0) || !std::isfinite(cfg.step)) {
    throw Error(ErrorCode::InvalidArgument, "trajectory step must be positive");
  }
}

template <int Dim, class OnStep>
ComplexVector run_trajectory_dim(const StateVector& psi0, const GeneratorSet& gen,
                                 const TrajectoryConfig& cfg, std::uint64_t stream,
                                 OnStep& on_step) {
  QsdStepper<Dim> stepper(gen);
  CounterRng rng(cfg.seed, stream);
  std::vector<Complex> dxi(stepper.noise_channels());
  typename QsdStepper<Dim>::Vec psi = psi0.amplitudes();
  if (cfg.renormalize) psi.normalize();
  for (std::size_t i = 0; i < cfg.steps; ++i) {
    for (auto& x : dxi) x = rng.next_wiener(cfg.step);
    stepper.step(psi, dxi.data(), cfg.step, cfg.renormalize);
    on_step(psi);
  }
  return psi;
}

template <class OnStep>
ComplexVector run_trajectory(const StateVector& psi0, const GeneratorSet& gen,
                             const TrajectoryConfig& cfg, std::uint64_t stream, OnStep on_step) {
  require_dim(psi0.dim(), gen.dim(), "initial state");
  require_trajectory_config(cfg);
  if (gen.dim() == 2) return run_trajectory_dim<2>(psi0, gen, cfg, stream, on_step);
  return run_trajectory_dim<Eigen::Dynamic>(psi0, gen, cfg, stream, on_step);
}

template <int Dim>
ComplexVector single_step(const StateVector& psi, const GeneratorSet& gen, const Complex* dxi,
                          double step, bool renormalize) {
  QsdStepper<Dim> stepper(gen);
  typename QsdStepper<Dim>::Vec v = psi.amplitudes();
  stepper.step(v, dxi, step, renormalize);
  return v;
}

}  // namespace

GeneratorSet GeneratorSet::make(ComplexMatrix hamiltonian, std::vector<ComplexMatrix> boosts,
                                std::vector<ComplexMatrix> lindblads, double hermitian_tol) {
  require_square_finite(hamiltonian, "Hamiltonian");
  if (hermiticity_error(hamiltonian) > hermitian_tol) {
    throw Error(ErrorCode::NonHermitianInput, "Hamiltonian is not Hermitian",
                hermiticity_error(hamiltonian));
  }
  if (boosts.size() > 3) {
    throw Error(ErrorCode::InvalidArgument, "at most three boost generators (x, y, z)");
  }
  const auto d = hamiltonian.rows();
  for (const auto& k : boosts) {
    require_square_finite(k, "boost generator");
    require_dim(k.rows(), d, "boost generator");
    if (hermiticity_error(k) > hermitian_tol) {
      throw Error(ErrorCode::NonHermitianInput, "boost generator is not Hermitian",
                  hermiticity_error(k));
    }
  }
  for (const auto& l : lindblads) {
    require_square_finite(l, "Lindblad operator");
    require_dim(l.rows(), d, "Lindblad operator");
  }
  GeneratorSet g;
  g.h_ = std::move(hamiltonian);
  g.ks_ = std::move(boosts);
  g.ls_ = std::move(lindblads);
  return g;
}

bool GeneratorSet::dissipationless() const {
  return std::all_of(ls_.begin(), ls_.end(), [](const ComplexMatrix& l) { return max_abs(l) == 0.0; });
}

ComplexMatrix two_level_dephasing(double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw Error(ErrorCode::InvalidArgument, "gamma must be finite and non-negative");
  }
  ComplexMatrix l = ComplexMatrix::Zero(2, 2);
  l(0, 0) = std::sqrt(gamma);
  return l;
}

double liouvillian_norm_bound(const GeneratorSet& gen) {
  double b = 2.0 * operator_norm(gen.hamiltonian());
  for (const auto& l : gen.lindblads()) {
    const double n = operator_norm(l);
    b += 2.0 * n * n;
  }
  return b;
}

DensityMatrix lindblad_propagate(const DensityMatrix& rho0, const GeneratorSet& gen, double span,
                                 LindbladMethod method, double step) {
  require_dim(rho0.dim(), gen.dim(), "density matrix");
  if (!(span >= 0.0) || !std::isfinite(span)) {
    throw Error(ErrorCode::InvalidArgument, "span must be finite and non-negative");
  }
  if (span == 0.0) return rho0;
  if (gen.dissipationless()) return unitary_evolve(rho0, expm_generator(gen.hamiltonian(), span));

  if (method == LindbladMethod::Exact) {
    return validate_density(propagate_exact(rho0.matrix(), gen, span),
                            {kExactOutputTol, kExactOutputTol, kExactOutputTol});
  }
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw Error(ErrorCode::InvalidArgument, "rk4 step must be positive");
  }
  return validate_density(propagate_rk4(rho0.matrix(), gen, span, step),
                          {kRk4OutputTol, kRk4OutputTol, kRk4OutputTol});
}

DensityMatrix lindblad_exact_twolevel(const DensityMatrix& rho0, double gamma, double span) {
  if (rho0.dim() != 2) {
    throw Error(ErrorCode::DimMismatch, "two-level solution needs dim 2, got " +
                                            std::to_string(rho0.dim()));
  }
  if (!(gamma >= 0.0) || !(span >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "gamma and span must be non-negative");
  }
  ComplexMatrix r = rho0.matrix();
  const double decay = std::exp(-0.5 * gamma * span);
  r(0, 1) *= decay;
  r(1, 0) *= decay;
  return validate_density(r);
}

std::optional<std::string> TrajectoryConfig::stiffness_warning(const GeneratorSet& gen) const {
  double worst = 0.0;
  for (const auto& l : gen.lindblads()) worst = std::max(worst, operator_norm(l.adjoint() * l));
  if (step * worst > 0.1) {
    return "QSD step * max||L^dag L|| = " + std::to_string(step * worst) +
           " exceeds 0.1; Euler-Maruyama error may be large";
  }
  return std::nullopt;
}

StateVector qsd_step(const StateVector& psi, const GeneratorSet& gen, const NoiseIncrement& noise,
                     double step, bool renormalize) {
  require_dim(psi.dim(), gen.dim(), "state");
  if (!noise.dxi.empty() && noise.dxi.size() != gen.lindblads().size()) {
    throw Error(ErrorCode::DimMismatch, "noise increment has " + std::to_string(noise.dxi.size()) +
                                            " entries for " +
                                            std::to_string(gen.lindblads().size()) +
                                            " Lindblad operators");
  }
  const Complex* dxi = noise.dxi.empty() ? nullptr : noise.dxi.data();
  ComplexVector v = gen.dim() == 2 ? single_step<2>(psi, gen, dxi, step, renormalize)
                                   : single_step<Eigen::Dynamic>(psi, gen, dxi, step, renormalize);
  return StateVector::raw(std::move(v));
}

std::vector<StateVector> qsd_trajectory(const StateVector& psi0, const GeneratorSet& gen,
                                        const TrajectoryConfig& cfg, std::uint64_t stream) {
  std::vector<StateVector> path;
  path.reserve(cfg.steps + 1);
  path.push_back(cfg.renormalize ? StateVector::normalized(psi0.amplitudes()) : psi0);
  run_trajectory(psi0, gen, cfg, stream,
                 [&](const auto& psi) { path.push_back(StateVector::raw(psi)); });
  return path;
}

StateVector qsd_final_state(const StateVector& psi0, const GeneratorSet& gen,
                            const TrajectoryConfig& cfg, std::uint64_t stream) {
  return StateVector::raw(run_trajectory(psi0, gen, cfg, stream, [](const auto&) {}));
}

EnsembleResult ensemble_run(const StateVector& psi0, const GeneratorSet& gen,
                            const TrajectoryConfig& cfg, std::size_t m, unsigned threads) {
  if (m == 0) throw Error(ErrorCode::InvalidArgument, "ensemble needs at least one trajectory");
  require_dim(psi0.dim(), gen.dim(), "initial state");
  require_trajectory_config(cfg);

  std::vector<ComplexVector> finals(m);
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(m)));
  std::vector<std::exception_ptr> errors(workers);
  auto work = [&](unsigned w) {
    try {
      for (std::size_t i = w; i < m; i += workers) {
        finals[i] = run_trajectory(psi0, gen, cfg, i, [](const auto&) {});
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  // Fixed index order keeps the sum independent of the schedule.
  const auto d = gen.dim();
  ComplexMatrix sum = ComplexMatrix::Zero(d, d);
  double norm2_sum = 0.0;
  for (const auto& v : finals) {
    const double n2 = v.squaredNorm();
    norm2_sum += n2;
    sum.noalias() += (v / std::sqrt(n2)) * (v / std::sqrt(n2)).adjoint();
  }
  const double inv_m = 1.0 / static_cast<double>(m);
  return {validate_density(sum * inv_m), norm2_sum * inv_m, m};
}

DensityMatrix ensemble_density(const StateVector& psi0, const GeneratorSet& gen,
                               const TrajectoryConfig& cfg, std::size_t m, unsigned threads) {
  return ensemble_run(psi0, gen, cfg, m, threads).density;
}

ComplexMatrix boost_unitary(const GeneratorSet& gen, double beta) {
  if (!std::isfinite(beta) || std::abs(beta) >= 1.0) {
    throw Error(ErrorCode::SuperluminalBeta, "|beta| >= 1", std::abs(beta));
  }
  if (beta == 0.0) return ComplexMatrix::Identity(gen.dim(), gen.dim());
  if (gen.boosts().empty()) {
    throw Error(ErrorCode::MissingBoostGenerator, "beta != 0 but no boost generator configured");
  }
  return expm_generator(gen.boosts().front(), std::atanh(beta));
}

StateVector boost_transport(const StateVector& psi, const GeneratorSet& gen, double beta) {
  require_dim(psi.dim(), gen.dim(), "state");
  return StateVector::raw(boost_unitary(gen, beta) * psi.amplitudes());
}

DensityMatrix boost_transport(const DensityMatrix& rho, const GeneratorSet& gen, double beta) {
  require_dim(rho.dim(), gen.dim(), "density matrix");
  if (beta == 0.0) return rho;
  return unitary_evolve(rho, boost_unitary(gen, beta));
}

}  // namespace hyperqsd
