#pragma once

// Propagators along a hyperplane family:
//   - deterministic Lindblad evolution in the offset a,
//   - quantum state diffusion (Gisin-Percival Ito form) trajectories in a,
//   - unitary boost transport in the normal n,
// plus Monte-Carlo averaging of trajectories into a density matrix.
//
// Generators are constant (they do not depend on the hyperplane).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hyperqsd/linalg.hpp"

namespace hyperqsd {

/// Hamiltonian, boost generators K_x, K_y, K_z (at most three) and Lindblad
/// operators of a model. H and every K must be Hermitian; all share one dim.
class GeneratorSet {
 public:
  static GeneratorSet make(ComplexMatrix hamiltonian, std::vector<ComplexMatrix> boosts = {},
                           std::vector<ComplexMatrix> lindblads = {},
                           double hermitian_tol = kDefaultHermitianTol);

  const ComplexMatrix& hamiltonian() const noexcept { return h_; }
  const std::vector<ComplexMatrix>& boosts() const noexcept { return ks_; }
  const std::vector<ComplexMatrix>& lindblads() const noexcept { return ls_; }
  std::ptrdiff_t dim() const noexcept { return h_.rows(); }

  /// True when every Lindblad operator is exactly zero (or there are none).
  bool dissipationless() const;

 private:
  GeneratorSet() = default;
  ComplexMatrix h_;
  std::vector<ComplexMatrix> ks_;
  std::vector<ComplexMatrix> ls_;
};

/// sqrt(gamma) |up><up| on a two-level system, with |up> = basis state 0.
ComplexMatrix two_level_dephasing(double gamma);

enum class LindbladMethod { Exact, Rk4 };

inline constexpr double kExactOutputTol = 1e-9;
inline constexpr double kRk4OutputTol = 1e-6;

/// rho(span) for drho/da = -i[H, rho] + sum_k (L rho L^dag - 1/2 {L^dag L, rho}).
///
/// `Exact` exponentiates the Liouvillian on the dim^2 vectorized space; `Rk4`
/// takes fixed steps of at most `step` (rounded so they tile `span`) and throws
/// StepTooLarge when step * ||Liouvillian|| bound exceeds 1. The result is
/// validated at 1e-9 (exact) or 1e-6 (rk4). Dissipationless generators and
/// span = 0 take exact fast paths.
DensityMatrix lindblad_propagate(const DensityMatrix& rho0, const GeneratorSet& gen, double span,
                                 LindbladMethod method = LindbladMethod::Exact, double step = 1e-3);

/// Closed-form H = 0, L = sqrt(gamma)|up><up| solution: populations stay, the
/// coherence decays as exp(-gamma span / 2).
DensityMatrix lindblad_exact_twolevel(const DensityMatrix& rho0, double gamma, double span);

/// Upper bound on ||Liouvillian||: 2||H|| + 2 sum ||L||^2.
double liouvillian_norm_bound(const GeneratorSet& gen);

/// One complex Wiener increment per Lindblad operator. Empty means "no noise".
struct NoiseIncrement {
  std::vector<Complex> dxi;
};

struct TrajectoryConfig {
  double step = 1e-3;
  std::size_t steps = 0;
  std::uint64_t seed = 0;
  bool renormalize = true;

  double span() const noexcept { return step * static_cast<double>(steps); }
  /// Non-empty when step * max ||L^dag L|| > 0.1.
  std::optional<std::string> stiffness_warning(const GeneratorSet& gen) const;
};

/// One Euler-Maruyama step of
///   dpsi = -iH psi da + sum_k (<L^dag> L - 1/2 L^dag L - 1/2 <L^dag><L>) psi da
///        + sum_k (L - <L>) psi dxi_k
/// with <X> = psi^dag X psi / psi^dag psi. Renormalizes when asked; throws
/// ZeroNorm if the norm collapses below 1e-12.
StateVector qsd_step(const StateVector& psi, const GeneratorSet& gen, const NoiseIncrement& noise,
                     double step, bool renormalize = true);

/// psi(0), psi(step), ..., psi(steps * step). The noise comes from the
/// counter stream (cfg.seed, stream), so the path is a pure function of its
/// arguments.
std::vector<StateVector> qsd_trajectory(const StateVector& psi0, const GeneratorSet& gen,
                                        const TrajectoryConfig& cfg, std::uint64_t stream = 0);

/// Final state only; same stream convention as qsd_trajectory.
StateVector qsd_final_state(const StateVector& psi0, const GeneratorSet& gen,
                            const TrajectoryConfig& cfg, std::uint64_t stream = 0);

struct EnsembleResult {
  DensityMatrix density;
  double mean_norm_squared;  // E[<psi|psi>] of the final states
  std::size_t trajectories;
};

/// Runs trajectories 0..m-1 (stream = index) on `threads` workers and averages
/// the normalized final projectors in index order, so the result does not
/// depend on the thread count.
EnsembleResult ensemble_run(const StateVector& psi0, const GeneratorSet& gen,
                            const TrajectoryConfig& cfg, std::size_t m, unsigned threads = 1);

DensityMatrix ensemble_density(const StateVector& psi0, const GeneratorSet& gen,
                               const TrajectoryConfig& cfg, std::size_t m, unsigned threads = 1);

/// exp(-i atanh(beta) K_x). Identity for beta = 0; MissingBoostGenerator if
/// beta != 0 and no boost generator is configured.
ComplexMatrix boost_unitary(const GeneratorSet& gen, double beta);

StateVector boost_transport(const StateVector& psi, const GeneratorSet& gen, double beta);
DensityMatrix boost_transport(const DensityMatrix& rho, const GeneratorSet& gen, double beta);

}  // namespace hyperqsd
