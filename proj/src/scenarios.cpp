#include "hyperqsd/scenarios.hpp"

#include <cmath>

namespace hyperqsd {

namespace {

constexpr double kReductionRatioWarn = 10.0;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, what);
}

void check_params(const CounterexampleParams& p) {
  require(std::isfinite(p.beta), "beta must be finite");
  if (std::abs(p.beta) >= 1.0) {
    throw Error(ErrorCode::SuperluminalBeta, "|beta| >= 1", std::abs(p.beta));
  }
  require(p.beta >= 0.0, "beta must be non-negative (the moving observer recedes along +x)");
  require(p.ell > 0.0 && std::isfinite(p.ell), "ell must be positive and finite");
  require(p.gamma >= 0.0 && std::isfinite(p.gamma), "gamma must be non-negative and finite");
  require(p.c > 0.0 && std::isfinite(p.c), "c must be positive and finite");
  require(p.step >= 0.0 && std::isfinite(p.step), "step must be non-negative");
  if (p.qsd) {
    require(p.qsd->trajectories >= 1, "qsd.trajectories must be at least 1");
    require(p.qsd->step >= 0.0 && std::isfinite(p.qsd->step), "qsd.step must be non-negative");
  }
}

GeneratorSet counterexample_generators(const CounterexampleParams& p) {
  ComplexMatrix k = p.k_x ? *p.k_x : ComplexMatrix::Zero(2, 2);
  return GeneratorSet::make(ComplexMatrix::Zero(2, 2), {std::move(k)},
                            {two_level_dephasing(p.gamma)});
}

}  // namespace

ComplexMatrix spin_observable() { return pauli::x(); }

DensityMatrix initial_state() { return validate_density(ComplexMatrix::Constant(2, 2, 0.5)); }

StateVector initial_spin_state() {
  return StateVector::normalized(ComplexVector::Constant(2, Complex(1.0, 0.0)));
}

double default_step(double gamma) { return gamma > 0.0 ? 1e-3 / gamma : 1e-3; }

CounterexampleReport run_counterexample(const CounterexampleParams& p) {
  check_params(p);
  const GeneratorSet gen = counterexample_generators(p);
  const double a0 = p.beta == 0.0 ? 0.0 : coincidence_offset(p.ell, p.beta, p.c);
  const ComplexMatrix a = spin_observable();
  const DensityMatrix rho0 = initial_state();

  std::vector<std::string> warnings;
  if (p.gamma * a0 < kReductionRatioWarn) {
    warnings.push_back("gamma * a0 = " + std::to_string(p.gamma * a0) +
                       " < 10: reduction is incomplete at the coincidence event");
  }

  const double step = p.step > 0.0 ? p.step : default_step(p.gamma);
  DensityMatrix rho_r = lindblad_propagate(rho0, gen, a0, p.method, step);
  DensityMatrix rho_m = boost_transport(rho0, gen, p.beta);

  const double exp_r = expectation(a, rho_r);
  const double exp_m = expectation(a, rho_m);

  std::optional<QsdSummary> qsd;
  if (p.qsd) {
    const double requested = p.qsd->step > 0.0 ? p.qsd->step : default_step(p.gamma);
    const auto steps =
        a0 > 0.0 ? static_cast<std::size_t>(std::ceil(a0 / requested - 1e-9)) : std::size_t{0};
    TrajectoryConfig cfg;
    cfg.step = steps > 0 ? a0 / static_cast<double>(steps) : requested;
    cfg.steps = steps;
    cfg.seed = p.qsd->seed;
    if (auto w = cfg.stiffness_warning(gen)) warnings.push_back(*w);
    EnsembleResult ens =
        ensemble_run(initial_spin_state(), gen, cfg, p.qsd->trajectories, p.qsd->threads);
    const double td = trace_distance(ens.density, rho_r);
    const double e = expectation(a, ens.density);
    qsd = QsdSummary{p.qsd->trajectories, p.qsd->seed, cfg.step, cfg.steps,
                     std::move(ens.density), td, e, ens.mean_norm_squared};
  }

  const double offdiag = std::abs(rho_r(0, 1));
  const double boost_dist = trace_distance(rho_m, rho0);
  return CounterexampleReport{p,
                              a0,
                              exp_r,
                              exp_m,
                              exp_m - exp_r,
                              offdiag,
                              boost_dist,
                              rho0,
                              std::move(rho_r),
                              std::move(rho_m),
                              std::move(qsd),
                              std::move(warnings)};
}

ConsistencyReport check_unitary_consistency(const GeneratorSet& gen, double beta, double ell,
                                            const StateVector& psi0, const ComplexMatrix& a,
                                            double c) {
  if (!gen.dissipationless()) {
    throw Error(ErrorCode::InvalidArgument,
                "unitary consistency check needs an empty Lindblad set");
  }
  if (psi0.dim() != gen.dim() || a.rows() != gen.dim()) {
    throw Error(ErrorCode::DimMismatch, "state, observable and generators must share one dim");
  }
  const ComplexMatrix k =
      gen.boosts().empty() ? ComplexMatrix::Zero(gen.dim(), gen.dim()) : gen.boosts().front();
  const double comm = max_abs(commutator(gen.hamiltonian(), k));
  if (comm > kCommutatorTol) {
    throw Error(ErrorCode::NonCommutingGenerators,
                "|[H, K_x]|max = " + std::to_string(comm) +
                    "; transport would be path dependent",
                comm);
  }
  if (std::abs(beta) >= 1.0 || !std::isfinite(beta)) {
    throw Error(ErrorCode::SuperluminalBeta, "|beta| >= 1", std::abs(beta));
  }
  if (!(ell > 0.0)) throw Error(ErrorCode::InvalidArgument, "ell must be positive");

  const double a0 = ell * beta / c;
  const FourVector event{a0, ell, 0.0, 0.0};
  const ObserverFrame rest(0.0);
  const ObserverFrame moving(beta);
  Hyperplane rest_plane = rest.hyperplane(a0);
  Hyperplane moving_plane = moving.hyperplane(0.0);

  const double eta = std::atanh(beta);
  const ComplexMatrix u_a = expm_generator(gen.hamiltonian(), a0);
  const ComplexMatrix u_n = expm_generator(k, eta);
  const StateVector psi0n = StateVector::normalized(psi0.amplitudes());

  const StateVector on_rest = StateVector::raw(u_a * psi0n.amplitudes());
  const StateVector on_moving = StateVector::raw(u_n * psi0n.amplitudes());
  const double e_rest = expectation(a, on_rest);
  const double e_moving = expectation(a, on_moving);

  const ComplexVector a_then_n = u_n * (u_a * psi0n.amplitudes());
  const ComplexVector n_then_a = u_a * (u_n * psi0n.amplitudes());
  const double path_diff = 1.0 - std::abs(a_then_n.dot(n_then_a));

  return ConsistencyReport{std::abs(e_rest - e_moving),
                           std::max(0.0, path_diff),
                           e_rest,
                           e_moving,
                           event,
                           rest_plane,
                           moving_plane,
                           false};
}

ConsistencyReport check_dissipative_consistency(const CounterexampleParams& p) {
  const CounterexampleReport r = run_counterexample(p);
  const FourVector event{r.a0, p.ell, 0.0, 0.0};
  return ConsistencyReport{std::abs(r.discrepancy),
                           0.0,
                           r.expectation_R,
                           r.expectation_M,
                           event,
                           ObserverFrame(0.0).hyperplane(r.a0),
                           ObserverFrame(p.beta).hyperplane(0.0),
                           p.gamma > 0.0};
}

std::vector<SweepRow> sweep_velocity(const CounterexampleParams& p, const std::vector<double>& betas,
                                     const std::optional<ComplexMatrix>& k_correction) {
  if (betas.empty()) throw Error(ErrorCode::InvalidArgument, "sweep needs at least one beta");
  check_params(p);
  const double a0 = p.beta == 0.0 ? 0.0 : coincidence_offset(p.ell, p.beta, p.c);

  std::vector<SweepRow> rows;
  rows.reserve(betas.size());
  for (double beta : betas) {
    CounterexampleParams q = p;
    q.beta = beta;
    q.qsd.reset();
    if (k_correction) q.k_x = k_correction;
    if (beta != 0.0) {
      if (a0 <= 0.0) {
        throw Error(ErrorCode::InvalidArgument, "constant-a0 sweep needs a positive base a0");
      }
      require(beta > 0.0, "sweep betas must be non-negative");
      q.ell = a0 * p.c / beta;
    }
    const CounterexampleReport r = run_counterexample(q);
    rows.push_back({beta, q.ell, r.a0, r.expectation_R, r.expectation_M, r.discrepancy,
                    r.boost_state_distance});
  }
  return rows;
}

}  // namespace hyperqsd
