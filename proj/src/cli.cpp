#include "hyperqsd/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "hyperqsd/foliation.hpp"
#include "hyperqsd/scenarios.hpp"

namespace hyperqsd::cli {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& msg) {
  throw ConfigError(ConfigError::Kind::Validation, field, field + ": " + msg);
}

const std::set<std::string>& common_keys() {
  static const std::set<std::string> k{"command", "seed", "output", "format",
                                       "log_level", "tolerances", "c"};
  return k;
}

const std::set<std::string>& command_keys(Command c) {
  static const std::set<std::string> counterexample{"beta", "ell", "gamma", "method",
                                                    "step", "k_x", "qsd"};
  static const std::set<std::string> sweep{"beta", "ell", "gamma", "method", "step", "k_x", "betas"};
  static const std::set<std::string> consistency{"beta",        "ell",        "gamma", "method",
                                                 "step",        "hamiltonian", "k_x",  "observable",
                                                 "psi0"};
  static const std::set<std::string> lindblad{"beta", "ell", "gamma", "method", "step", "span"};
  static const std::set<std::string> qsd_ensemble{"beta", "ell", "gamma", "span", "psi0", "qsd"};
  switch (c) {
    case Command::Counterexample: return counterexample;
    case Command::Sweep: return sweep;
    case Command::Consistency: return consistency;
    case Command::Lindblad: return lindblad;
    case Command::QsdEnsemble: return qsd_ensemble;
  }
  return counterexample;
}

double get_number(const json& j, const std::string& field) {
  if (!j.is_number()) invalid(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) invalid(field, "must be finite");
  return v;
}

std::uint64_t get_unsigned(const json& j, const std::string& field) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer()) {
    if (j.get<std::int64_t>() < 0) invalid(field, "must be non-negative");
    return static_cast<std::uint64_t>(j.get<std::int64_t>());
  }
  invalid(field, "expected a non-negative integer");
}

bool get_bool(const json& j, const std::string& field) {
  if (!j.is_boolean()) invalid(field, "expected true or false");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& field) {
  if (!j.is_string()) invalid(field, "expected a string");
  return j.get<std::string>();
}

Complex get_complex(const json& j, const std::string& field) {
  if (j.is_number()) return {get_number(j, field), 0.0};
  if (j.is_array() && j.size() == 2) return {get_number(j[0], field), get_number(j[1], field)};
  invalid(field, "expected a number or a [re, im] pair");
}

ComplexMatrix get_matrix(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) invalid(field, "expected a non-empty array of rows");
  const auto n = static_cast<Eigen::Index>(j.size());
  ComplexMatrix m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
      invalid(field, "matrix must be square");
    }
    for (Eigen::Index c = 0; c < n; ++c) m(r, c) = get_complex(row[static_cast<std::size_t>(c)], field);
  }
  return m;
}

ComplexVector get_vector(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) invalid(field, "expected a non-empty array");
  ComplexVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = get_complex(j[i], field);
  return v;
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

json matrix_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const ComplexVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_json(v(i)));
  return out;
}

// Row-major, interleaved real/imaginary.
json density_json(const DensityMatrix& rho) {
  json flat = json::array();
  for (Eigen::Index r = 0; r < rho.dim(); ++r) {
    for (Eigen::Index c = 0; c < rho.dim(); ++c) {
      flat.push_back(rho(r, c).real());
      flat.push_back(rho(r, c).imag());
    }
  }
  return json{{"dim", rho.dim()}, {"entries", std::move(flat)}};
}

std::string method_name(LindbladMethod m) { return m == LindbladMethod::Exact ? "exact" : "rk4"; }

std::string format_name(Format f) { return f == Format::Csv ? "csv" : "json"; }

std::string log_level_name(LogLevel l) {
  switch (l) {
    case LogLevel::Quiet: return "quiet";
    case LogLevel::Info: return "info";
    case LogLevel::Debug: return "debug";
  }
  return "info";
}

bool uses(Command c, const char* key) { return command_keys(c).count(key) > 0; }

void require_hermitian_2x2(const ComplexMatrix& m, const std::string& field, double tol) {
  if (m.rows() != 2) invalid(field, "must be a 2x2 matrix");
  const double e = hermiticity_error(m);
  if (e > tol) invalid(field, "must be Hermitian (error " + format_fixed(e) + ")");
}

void require_beta(double beta, const std::string& field) {
  if (std::abs(beta) >= 1.0) invalid(field, "|beta| must be < 1 (superluminal)");
  if (beta < 0.0) invalid(field, "must be non-negative");
}

double coincidence_a0(const RunConfig& cfg) {
  return cfg.beta == 0.0 ? 0.0 : coincidence_offset(cfg.ell, cfg.beta, cfg.c);
}

GeneratorSet dephasing_generators(const RunConfig& cfg, ComplexMatrix h = ComplexMatrix::Zero(2, 2)) {
  return GeneratorSet::make(std::move(h), {}, {two_level_dephasing(cfg.gamma)});
}

CounterexampleParams scenario_params(const RunConfig& cfg) {
  CounterexampleParams p;
  p.beta = cfg.beta;
  p.ell = cfg.ell;
  p.gamma = cfg.gamma;
  p.method = cfg.method;
  p.step = cfg.step;
  p.c = cfg.c;
  p.k_x = cfg.k_x;
  if (cfg.command == Command::Counterexample && cfg.qsd) {
    p.qsd = QsdOptions{cfg.qsd->trajectories, cfg.seed, cfg.qsd->step, cfg.qsd->threads};
  }
  return p;
}

// Re-checks a reported state at the configured tolerances.
void recheck(const DensityMatrix& rho, const Tolerances& tol, const char* what) {
  try {
    validate_density(rho.matrix(), tol);
  } catch (const Error& e) {
    throw Error(e.violations(), std::string(what) + ": " + e.what());
  }
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

class Report {
 public:
  Report(const RunConfig& cfg) : cfg_(cfg) {}

  json result = json::object();
  Table table;
  std::vector<std::string> warnings;

  std::string render() const {
    const std::string config = serialize_config(cfg_);
    if (cfg_.format == Format::Json) {
      json doc;
      doc["command"] = to_string(cfg_.command);
      doc["seed"] = cfg_.seed;
      doc["config"] = json::parse(config);
      doc["result"] = result;
      doc["warnings"] = warnings;
      return doc.dump(2) + "\n";
    }
    std::string out = "# config: " + config + "\n# seed: " + std::to_string(cfg_.seed) + "\n";
    auto line = [&out](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
      }
      out += '\n';
    };
    line(table.header);
    for (const auto& r : table.rows) line(r);
    return out;
  }

 private:
  const RunConfig& cfg_;
};

std::vector<std::string> cells(std::initializer_list<double> values) {
  std::vector<std::string> out;
  for (double v : values) out.push_back(format_fixed(v));
  return out;
}

void run_counterexample_cmd(const RunConfig& cfg, Report& rep) {
  const CounterexampleReport r = run_counterexample(scenario_params(cfg));
  recheck(r.rho_R, cfg.tolerances, "rho(n0, a0)");
  recheck(r.rho_M, cfg.tolerances, "rho(n_v, 0)");
  rep.warnings = r.warnings;
  rep.table.header = {"beta",          "ell",         "gamma",       "a0",
                      "expectation_R", "expectation_M", "discrepancy", "offdiag_final"};
  auto row = cells({cfg.beta, cfg.ell, cfg.gamma, r.a0, r.expectation_R, r.expectation_M,
                    r.discrepancy, r.offdiag_final});
  rep.result = json{{"a0", r.a0},
                    {"expectation_R", r.expectation_R},
                    {"expectation_M", r.expectation_M},
                    {"discrepancy", r.discrepancy},
                    {"offdiag_final", r.offdiag_final},
                    {"boost_state_distance", r.boost_state_distance},
                    {"rho_initial", density_json(r.rho_initial)},
                    {"rho_R", density_json(r.rho_R)},
                    {"rho_M", density_json(r.rho_M)}};
  if (r.qsd) {
    recheck(r.qsd->density, cfg.tolerances, "QSD ensemble density");
    rep.table.header.insert(rep.table.header.end(),
                            {"qsd_trajectories", "qsd_trace_distance", "qsd_expectation_R"});
    const auto extra = cells({static_cast<double>(r.qsd->trajectories), r.qsd->trace_distance,
                              r.qsd->expectation_R});
    row.insert(row.end(), extra.begin(), extra.end());
    rep.result["qsd"] = json{{"trajectories", r.qsd->trajectories},
                             {"seed", r.qsd->seed},
                             {"step", r.qsd->step},
                             {"steps", r.qsd->steps},
                             {"trace_distance", r.qsd->trace_distance},
                             {"expectation_R", r.qsd->expectation_R},
                             {"mean_norm_squared", r.qsd->mean_norm_squared},
                             {"density", density_json(r.qsd->density)}};
  }
  rep.table.rows.push_back(std::move(row));
}

void run_sweep_cmd(const RunConfig& cfg, Report& rep) {
  const auto rows = sweep_velocity(scenario_params(cfg), cfg.betas);
  rep.table.header = {"beta",          "ell",         "a0",
                      "expectation_R", "expectation_M", "discrepancy",
                      "boost_state_distance"};
  json jrows = json::array();
  for (const auto& r : rows) {
    rep.table.rows.push_back(cells({r.beta, r.ell, r.a0, r.expectation_R, r.expectation_M,
                                    r.discrepancy, r.boost_state_distance}));
    jrows.push_back(json{{"beta", r.beta},
                         {"ell", r.ell},
                         {"a0", r.a0},
                         {"expectation_R", r.expectation_R},
                         {"expectation_M", r.expectation_M},
                         {"discrepancy", r.discrepancy},
                         {"boost_state_distance", r.boost_state_distance}});
  }
  rep.result = json{{"rows", std::move(jrows)}};
}

json consistency_json(const ConsistencyReport& r) {
  return json{{"deviation", r.deviation},
              {"path_order_difference", r.path_order_difference},
              {"expectation_rest", r.expectation_rest},
              {"expectation_moving", r.expectation_moving},
              {"event", {r.event.t, r.event.x, r.event.y, r.event.z}},
              {"rest_plane", {{"normal", {r.rest_plane.normal().t, r.rest_plane.normal().x, 0.0, 0.0}},
                              {"offset", r.rest_plane.offset()}}},
              {"moving_plane",
               {{"normal", {r.moving_plane.normal().t, r.moving_plane.normal().x, 0.0, 0.0}},
                {"offset", r.moving_plane.offset()}}},
              {"dissipative", r.dissipative}};
}

void run_consistency_cmd(const RunConfig& cfg, Report& rep) {
  std::vector<ComplexMatrix> ks;
  ks.push_back(cfg.k_x ? *cfg.k_x : ComplexMatrix::Zero(2, 2));
  const GeneratorSet gen = GeneratorSet::make(cfg.hamiltonian, std::move(ks));
  const ConsistencyReport unitary = check_unitary_consistency(
      gen, cfg.beta, cfg.ell, StateVector::normalized(cfg.psi0), cfg.observable, cfg.c);
  rep.table.header = {"pipeline",          "deviation",         "path_order_difference",
                      "expectation_rest", "expectation_moving", "event_t",
                      "event_x"};
  auto add = [&rep](const char* name, const ConsistencyReport& r) {
    std::vector<std::string> row{name};
    const auto rest = cells({r.deviation, r.path_order_difference, r.expectation_rest,
                             r.expectation_moving, r.event.t, r.event.x});
    row.insert(row.end(), rest.begin(), rest.end());
    rep.table.rows.push_back(std::move(row));
  };
  add("unitary", unitary);
  rep.result["unitary"] = consistency_json(unitary);
  if (cfg.gamma > 0.0) {
    const ConsistencyReport diss = check_dissipative_consistency(scenario_params(cfg));
    add("dissipative", diss);
    rep.result["dissipative"] = consistency_json(diss);
  }
}

void run_lindblad_cmd(const RunConfig& cfg, Report& rep) {
  const double span = *cfg.span;
  const DensityMatrix rho0 = initial_state();
  const DensityMatrix rho = lindblad_propagate(rho0, dephasing_generators(cfg), span, cfg.method, cfg.step);
  recheck(rho, cfg.tolerances, "Lindblad output");
  const DensityMatrix closed = lindblad_exact_twolevel(rho0, cfg.gamma, span);
  const double err = max_abs(rho.matrix() - closed.matrix());
  rep.table.header = {"gamma",  "span",           "step",         "offdiag_final",
                      "offdiag_closed_form", "max_entry_error", "purity", "trace_distance"};
  rep.table.rows.push_back(cells({cfg.gamma, span, cfg.step, std::abs(rho(0, 1)),
                                  std::abs(closed(0, 1)), err, rho.purity(),
                                  trace_distance(rho, closed)}));
  rep.result = json{{"method", method_name(cfg.method)},
                    {"span", span},
                    {"max_entry_error", err},
                    {"purity", rho.purity()},
                    {"rho", density_json(rho)},
                    {"rho_closed_form", density_json(closed)}};
}

void run_qsd_cmd(const RunConfig& cfg, Report& rep) {
  const double span = *cfg.span;
  const QsdSettings& q = *cfg.qsd;
  const GeneratorSet gen = dephasing_generators(cfg);
  TrajectoryConfig tc;
  tc.steps = span > 0.0 ? static_cast<std::size_t>(std::ceil(span / q.step - 1e-9)) : 0;
  tc.step = tc.steps > 0 ? span / static_cast<double>(tc.steps) : q.step;
  tc.seed = cfg.seed;
  tc.renormalize = q.renormalize;
  if (auto w = tc.stiffness_warning(gen)) rep.warnings.push_back(*w);

  const StateVector psi0 = StateVector::normalized(cfg.psi0);
  const EnsembleResult ens = ensemble_run(psi0, gen, tc, q.trajectories, q.threads);
  recheck(ens.density, cfg.tolerances, "ensemble density");
  const DensityMatrix ref =
      lindblad_propagate(density_from_state(psi0), gen, span, LindbladMethod::Exact);
  const double td = trace_distance(ens.density, ref);
  const double e = expectation(spin_observable(), ens.density);
  const double e_ref = expectation(spin_observable(), ref);
  rep.table.header = {"gamma",        "span",          "step",
                      "steps",        "trajectories",  "trace_distance",
                      "expectation_A", "expectation_A_lindblad", "mean_norm_squared"};
  rep.table.rows.push_back(cells({cfg.gamma, span, tc.step, static_cast<double>(tc.steps),
                                  static_cast<double>(q.trajectories), td, e, e_ref,
                                  ens.mean_norm_squared}));
  rep.result = json{{"step", tc.step},
                    {"steps", tc.steps},
                    {"trajectories", q.trajectories},
                    {"trace_distance", td},
                    {"expectation_A", e},
                    {"expectation_A_lindblad", e_ref},
                    {"mean_norm_squared", ens.mean_norm_squared},
                    {"density", density_json(ens.density)},
                    {"lindblad_density", density_json(ref)}};
}

bool is_user_error(ErrorCode c) {
  switch (c) {
    case ErrorCode::DimMismatch:
    case ErrorCode::NonHermitianInput:
    case ErrorCode::SuperluminalBeta:
    case ErrorCode::MissingBoostGenerator:
    case ErrorCode::NonCommutingGenerators:
    case ErrorCode::InvalidArgument:
    case ErrorCode::NotTimelike:
    case ErrorCode::PastPointing:
      return true;
    default:
      return false;
  }
}

}  // namespace

std::string to_string(Command c) {
  switch (c) {
    case Command::Counterexample: return "counterexample";
    case Command::Sweep: return "sweep";
    case Command::Consistency: return "consistency";
    case Command::Lindblad: return "lindblad";
    case Command::QsdEnsemble: return "qsd-ensemble";
  }
  return "counterexample";
}

std::optional<Command> command_from_string(const std::string& s) {
  for (Command c : {Command::Counterexample, Command::Sweep, Command::Consistency,
                    Command::Lindblad, Command::QsdEnsemble}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

ConfigError::ConfigError(Kind kind, std::string field, const std::string& message)
    : std::runtime_error(std::string(kind == Kind::Parse ? "ParseError: " : "ValidationError: ") +
                         message),
      kind_(kind),
      field_(std::move(field)) {}

bool operator==(const RunConfig& a, const RunConfig& b) {
  auto same_qsd = [](const std::optional<QsdSettings>& x, const std::optional<QsdSettings>& y) {
    if (x.has_value() != y.has_value()) return false;
    if (!x) return true;
    return x->trajectories == y->trajectories && x->step == y->step &&
           x->renormalize == y->renormalize && x->threads == y->threads;
  };
  auto same_k = [](const std::optional<ComplexMatrix>& x, const std::optional<ComplexMatrix>& y) {
    if (x.has_value() != y.has_value()) return false;
    return !x || (x->rows() == y->rows() && *x == *y);
  };
  return a.command == b.command && a.beta == b.beta && a.ell == b.ell && a.gamma == b.gamma &&
         a.c == b.c && a.method == b.method && a.step == b.step && same_k(a.k_x, b.k_x) &&
         a.betas == b.betas && a.span == b.span && a.hamiltonian.rows() == b.hamiltonian.rows() &&
         a.hamiltonian == b.hamiltonian && a.observable.rows() == b.observable.rows() &&
         a.observable == b.observable && a.psi0.size() == b.psi0.size() && a.psi0 == b.psi0 &&
         same_qsd(a.qsd, b.qsd) && a.seed == b.seed && a.tolerances == b.tolerances &&
         a.output_path == b.output_path && a.format == b.format && a.log_level == b.log_level;
}

void resolve(RunConfig& cfg) {
  const Command c = cfg.command;
  if (!(cfg.c > 0.0)) invalid("c", "must be positive");
  if (!(cfg.tolerances.hermitian > 0.0)) invalid("tolerances.hermitian", "must be positive");
  if (!(cfg.tolerances.trace > 0.0)) invalid("tolerances.trace", "must be positive");
  if (!(cfg.tolerances.positive > 0.0)) invalid("tolerances.positive", "must be positive");

  require_beta(cfg.beta, "beta");
  if (!(cfg.ell > 0.0)) invalid("ell", "must be positive");
  if (!(cfg.gamma >= 0.0)) invalid("gamma", "must be non-negative");
  if (cfg.step < 0.0) invalid("step", "must be positive");
  if (uses(c, "step") && cfg.step == 0.0) cfg.step = default_step(cfg.gamma);

  if (cfg.k_x) require_hermitian_2x2(*cfg.k_x, "k_x", cfg.tolerances.hermitian);

  if (c == Command::Sweep) {
    if (cfg.betas.empty()) invalid("betas", "must list at least one velocity");
    for (double b : cfg.betas) require_beta(b, "betas");
    const bool any_moving = std::any_of(cfg.betas.begin(), cfg.betas.end(), [](double b) { return b != 0.0; });
    if (any_moving && cfg.beta == 0.0) invalid("beta", "must be positive to fix a0 for the sweep");
  }

  if (c == Command::Consistency) {
    require_hermitian_2x2(cfg.hamiltonian, "hamiltonian", cfg.tolerances.hermitian);
    require_hermitian_2x2(cfg.observable, "observable", cfg.tolerances.hermitian);
    if (cfg.psi0.size() != 2) invalid("psi0", "must have 2 amplitudes");
    const ComplexMatrix k = cfg.k_x ? *cfg.k_x : ComplexMatrix::Zero(2, 2);
    const double comm = max_abs(commutator(cfg.hamiltonian, k));
    if (comm > kCommutatorTol) invalid("k_x", "must commute with hamiltonian ([H, K] = " + format_fixed(comm) + ")");
  }
  if (uses(c, "psi0")) {
    if (cfg.psi0.size() != 2) invalid("psi0", "must have 2 amplitudes");
    if (cfg.psi0.norm() < 1e-12) invalid("psi0", "must be non-zero");
  }

  if (uses(c, "span")) {
    if (!cfg.span) cfg.span = coincidence_a0(cfg);
    if (!(*cfg.span >= 0.0)) invalid("span", "must be non-negative");
  }

  if (c == Command::QsdEnsemble && !cfg.qsd) cfg.qsd = QsdSettings{};
  if (cfg.qsd) {
    if (cfg.qsd->trajectories < 1) invalid("qsd.trajectories", "must be at least 1");
    if (cfg.qsd->threads < 1) invalid("qsd.threads", "must be at least 1");
    if (cfg.qsd->step < 0.0) invalid("qsd.step", "must be positive");
    if (cfg.qsd->step == 0.0) cfg.qsd->step = default_step(cfg.gamma);
    if (c == Command::Counterexample && !cfg.qsd->renormalize) {
      invalid("qsd.renormalize", "counterexample runs always renormalize");
    }
  }
}

RunConfig parse_config(const std::string& text, std::optional<Command> command) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(ConfigError::Kind::Parse, "",
                      "at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!doc.is_object()) invalid("(root)", "config must be a JSON object");

  RunConfig cfg;
  if (doc.contains("command")) {
    const auto named = command_from_string(get_string(doc["command"], "command"));
    if (!named) invalid("command", "unknown command");
    if (command && *command != *named) invalid("command", "does not match the requested command");
    cfg.command = *named;
  } else if (command) {
    cfg.command = *command;
  } else {
    invalid("command", "missing");
  }

  const auto& allowed = command_keys(cfg.command);
  for (const auto& [key, _] : doc.items()) {
    if (!common_keys().count(key) && !allowed.count(key)) {
      invalid(key, "unknown key for command " + to_string(cfg.command));
    }
  }

  if (doc.contains("seed")) cfg.seed = get_unsigned(doc["seed"], "seed");
  if (doc.contains("output")) cfg.output_path = get_string(doc["output"], "output");
  if (doc.contains("format")) {
    const auto f = get_string(doc["format"], "format");
    if (f == "csv") cfg.format = Format::Csv;
    else if (f == "json") cfg.format = Format::Json;
    else invalid("format", "must be csv or json");
  }
  if (doc.contains("log_level")) {
    const auto l = get_string(doc["log_level"], "log_level");
    if (l == "quiet") cfg.log_level = LogLevel::Quiet;
    else if (l == "info") cfg.log_level = LogLevel::Info;
    else if (l == "debug") cfg.log_level = LogLevel::Debug;
    else invalid("log_level", "must be quiet, info or debug");
  }
  if (doc.contains("tolerances")) {
    const json& t = doc["tolerances"];
    if (!t.is_object()) invalid("tolerances", "expected an object");
    for (const auto& [key, value] : t.items()) {
      const std::string field = "tolerances." + key;
      if (key == "hermitian") cfg.tolerances.hermitian = get_number(value, field);
      else if (key == "trace") cfg.tolerances.trace = get_number(value, field);
      else if (key == "positive") cfg.tolerances.positive = get_number(value, field);
      else invalid(field, "unknown key");
    }
  }
  if (doc.contains("c")) cfg.c = get_number(doc["c"], "c");
  if (doc.contains("beta")) cfg.beta = get_number(doc["beta"], "beta");
  if (doc.contains("ell")) cfg.ell = get_number(doc["ell"], "ell");
  if (doc.contains("gamma")) cfg.gamma = get_number(doc["gamma"], "gamma");
  if (doc.contains("step")) {
    cfg.step = get_number(doc["step"], "step");
    if (!(cfg.step > 0.0)) invalid("step", "must be positive");
  }
  if (doc.contains("method")) {
    const auto m = get_string(doc["method"], "method");
    if (m == "exact") cfg.method = LindbladMethod::Exact;
    else if (m == "rk4") cfg.method = LindbladMethod::Rk4;
    else invalid("method", "must be exact or rk4");
  }
  if (doc.contains("k_x")) cfg.k_x = get_matrix(doc["k_x"], "k_x");
  if (doc.contains("hamiltonian")) cfg.hamiltonian = get_matrix(doc["hamiltonian"], "hamiltonian");
  if (doc.contains("observable")) cfg.observable = get_matrix(doc["observable"], "observable");
  if (doc.contains("psi0")) cfg.psi0 = get_vector(doc["psi0"], "psi0");
  if (doc.contains("span")) cfg.span = get_number(doc["span"], "span");
  if (doc.contains("betas")) {
    const json& b = doc["betas"];
    if (!b.is_array()) invalid("betas", "expected an array of numbers");
    for (const auto& v : b) cfg.betas.push_back(get_number(v, "betas"));
  }
  if (doc.contains("qsd")) {
    const json& q = doc["qsd"];
    if (!q.is_object()) invalid("qsd", "expected an object");
    QsdSettings s;
    for (const auto& [key, value] : q.items()) {
      const std::string field = "qsd." + key;
      if (key == "trajectories") s.trajectories = get_unsigned(value, field);
      else if (key == "step") {
        s.step = get_number(value, field);
        if (!(s.step > 0.0)) invalid(field, "must be positive");
      } else if (key == "renormalize") s.renormalize = get_bool(value, field);
      else if (key == "threads") s.threads = static_cast<unsigned>(get_unsigned(value, field));
      else invalid(field, "unknown key");
    }
    cfg.qsd = s;
  }

  try {
    resolve(cfg);
  } catch (const Error& e) {
    invalid("(config)", e.what());
  }
  return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
  const Command c = cfg.command;
  json j;
  j["command"] = to_string(c);
  j["seed"] = cfg.seed;
  j["output"] = cfg.output_path;
  j["format"] = format_name(cfg.format);
  j["log_level"] = log_level_name(cfg.log_level);
  j["tolerances"] = json{{"hermitian", cfg.tolerances.hermitian},
                         {"trace", cfg.tolerances.trace},
                         {"positive", cfg.tolerances.positive}};
  j["c"] = cfg.c;
  j["beta"] = cfg.beta;
  j["ell"] = cfg.ell;
  j["gamma"] = cfg.gamma;
  if (uses(c, "method")) j["method"] = method_name(cfg.method);
  if (uses(c, "step")) j["step"] = cfg.step;
  if (uses(c, "k_x") && cfg.k_x) j["k_x"] = matrix_json(*cfg.k_x);
  if (uses(c, "betas")) j["betas"] = cfg.betas;
  if (uses(c, "span") && cfg.span) j["span"] = *cfg.span;
  if (uses(c, "hamiltonian")) j["hamiltonian"] = matrix_json(cfg.hamiltonian);
  if (uses(c, "observable")) j["observable"] = matrix_json(cfg.observable);
  if (uses(c, "psi0")) j["psi0"] = vector_json(cfg.psi0);
  if (uses(c, "qsd") && cfg.qsd) {
    j["qsd"] = json{{"trajectories", cfg.qsd->trajectories},
                    {"step", cfg.qsd->step},
                    {"renormalize", cfg.qsd->renormalize},
                    {"threads", cfg.qsd->threads}};
  }
  return j.dump();
}

std::string format_fixed(double v) {
  if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "non-finite value in report");
  int decimals = 11;
  if (v != 0.0) {
    const int exponent = static_cast<int>(std::floor(std::log10(std::abs(v))));
    decimals = std::clamp(11 - exponent, 0, 340);
  }
  std::string buf(512, '\0');
  const int n = std::snprintf(buf.data(), buf.size(), "%.*f", decimals, v);
  buf.resize(static_cast<std::size_t>(n));
  return buf;
}

RunOutcome execute(const RunConfig& cfg, std::ostream& log) {
  const bool info = cfg.log_level != LogLevel::Quiet;
  log << "hyperqsd: seed = " << cfg.seed << "\n";
  if (cfg.log_level == LogLevel::Debug) log << "hyperqsd: config = " << serialize_config(cfg) << "\n";
  Report rep(cfg);
  try {
    switch (cfg.command) {
      case Command::Counterexample: run_counterexample_cmd(cfg, rep); break;
      case Command::Sweep: run_sweep_cmd(cfg, rep); break;
      case Command::Consistency: run_consistency_cmd(cfg, rep); break;
      case Command::Lindblad: run_lindblad_cmd(cfg, rep); break;
      case Command::QsdEnsemble: run_qsd_cmd(cfg, rep); break;
    }
    if (info) {
      for (const auto& w : rep.warnings) log << "hyperqsd: warning: " << w << "\n";
    }
    return {0, rep.render()};
  } catch (const ConfigError& e) {
    log << "hyperqsd: " << e.what() << "\n";
    return {1, {}};
  } catch (const Error& e) {
    log << "hyperqsd: " << (is_user_error(e.code()) ? "ValidationError: " : "numerical failure: ")
        << e.what() << " (invariant " << hyperqsd::to_string(e.code()) << ", magnitude "
        << e.magnitude() << ")\n";
    return {is_user_error(e.code()) ? 1 : 2, {}};
  } catch (const std::exception& e) {
    log << "hyperqsd: numerical failure: " << e.what() << "\n";
    return {2, {}};
  }
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  const RunOutcome outcome = execute(cfg, log);
  if (outcome.exit_status != 0) return outcome.exit_status;
  if (cfg.output_path == "-" || cfg.output_path.empty()) {
    out << outcome.report;
    return 0;
  }
  std::ofstream f(cfg.output_path, std::ios::binary | std::ios::trunc);
  if (!f) {
    log << "hyperqsd: cannot open output file " << cfg.output_path << "\n";
    return 1;
  }
  f << outcome.report;
  if (!f) {
    log << "hyperqsd: failed writing " << cfg.output_path << "\n";
    return 1;
  }
  return 0;
}

}  // namespace hyperqsd::cli
