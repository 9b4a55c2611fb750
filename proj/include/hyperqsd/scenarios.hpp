#pragma once

// The two-observer counter-example and the observer-consistency check.
//
// Setting: a spin localized near x = ell, an observer R at rest (normal n0) and
// an observer M moving with beta along +x (normal n_beta). M's a = 0 plane and
// R's a = a0 = ell beta / c plane cross at the event (a0, ell, 0, 0). Both
// measure A = sigma_x there. Unitary transport keeps <A> equal on the two
// planes; Lindblad dephasing on R's side does not.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hyperqsd/dynamics.hpp"
#include "hyperqsd/foliation.hpp"
#include "hyperqsd/linalg.hpp"

namespace hyperqsd {

/// A = |up><down| + |down><up|, i.e. sigma_x.
ComplexMatrix spin_observable();

/// (|up> + |down>)(<up| + <down|) / 2: every entry 1/2.
DensityMatrix initial_state();
StateVector initial_spin_state();

struct QsdOptions {
  std::size_t trajectories = 1000;
  std::uint64_t seed = 0;
  double step = 0.0;  // 0 selects 1e-3 / gamma
  unsigned threads = 1;

  friend bool operator==(const QsdOptions&, const QsdOptions&) = default;
};

struct CounterexampleParams {
  double beta = 0.01;
  double ell = 3000.0;
  double gamma = 1.0;
  LindbladMethod method = LindbladMethod::Exact;
  double step = 0.0;  // rk4 step, 0 selects 1e-3 / gamma
  double c = kDefaultLightSpeed;
  std::optional<ComplexMatrix> k_x;  // toy boost generator, default 0
  std::optional<QsdOptions> qsd;
};

/// 1e-3 / gamma, or 1e-3 when gamma = 0.
double default_step(double gamma);

struct QsdSummary {
  std::size_t trajectories;
  std::uint64_t seed;
  double step;
  std::size_t steps;
  DensityMatrix density;
  double trace_distance;  // to the Lindblad R-branch state
  double expectation_R;
  double mean_norm_squared;
};

struct CounterexampleReport {
  CounterexampleParams params;
  double a0;
  double expectation_R;  // <A> on (n0, a0)
  double expectation_M;  // <A> on (n_beta, 0)
  double discrepancy;    // expectation_M - expectation_R
  double offdiag_final;  // |rho_R(up, down)|
  double boost_state_distance;  // trace distance between rho(n_beta, 0) and rho(n0, 0)
  DensityMatrix rho_initial;
  DensityMatrix rho_R;
  DensityMatrix rho_M;
  std::optional<QsdSummary> qsd;
  std::vector<std::string> warnings;
};

CounterexampleReport run_counterexample(const CounterexampleParams& p);

struct ConsistencyReport {
  double deviation;              // |<A>_sigma1 - <A>_sigma2|
  double path_order_difference;  // 1 - |<a-then-n | n-then-a>| at (n_beta, a0)
  double expectation_rest;       // on sigma1 = (n0, a0)
  double expectation_moving;     // on sigma2 = (n_beta, 0)
  FourVector event;
  Hyperplane rest_plane;
  Hyperplane moving_plane;
  bool dissipative;
};

inline constexpr double kCommutatorTol = 1e-9;

/// Unitary transport of psi0 to (n0, a0) through H and to (n_beta, 0) through
/// K_x, compared on the observable A. Requires no dissipation and
/// [H, K_x] = 0 (NonCommutingGenerators otherwise).
ConsistencyReport check_unitary_consistency(const GeneratorSet& gen, double beta, double ell,
                                            const StateVector& psi0, const ComplexMatrix& a,
                                            double c = kDefaultLightSpeed);

/// The same comparison with Lindblad dephasing on the rest-frame leg, i.e. the
/// counter-example packaged as a consistency report.
ConsistencyReport check_dissipative_consistency(const CounterexampleParams& p);

struct SweepRow {
  double beta;
  double ell;
  double a0;
  double expectation_R;
  double expectation_M;
  double discrepancy;
  double boost_state_distance;
};

/// Runs the counter-example for each beta with ell = a0 c / beta, holding a0 at
/// coincidence_offset(p.ell, p.beta). beta = 0 rows use a0 = 0.
/// `k_correction`, when given, replaces p.k_x.
std::vector<SweepRow> sweep_velocity(const CounterexampleParams& p, const std::vector<double>& betas,
                                     const std::optional<ComplexMatrix>& k_correction = std::nullopt);

}  // namespace hyperqsd
