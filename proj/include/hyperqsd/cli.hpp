#pragma once

// Configuration documents and report writers behind the `hyperqsd` tool.
//
// A run is described by one JSON object. Keys that the selected command does
// not understand are rejected. The fully resolved config (defaults filled) is
// echoed into every report.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hyperqsd/dynamics.hpp"
#include "hyperqsd/linalg.hpp"

namespace hyperqsd::cli {

enum class Command { Counterexample, Sweep, Consistency, Lindblad, QsdEnsemble };
enum class Format { Csv, Json };
enum class LogLevel { Quiet, Info, Debug };

std::string to_string(Command c);
std::optional<Command> command_from_string(const std::string& s);

class ConfigError : public std::runtime_error {
 public:
  enum class Kind { Parse, Validation };
  ConfigError(Kind kind, std::string field, const std::string& message);
  Kind kind() const noexcept { return kind_; }
  /// Offending key path for validation errors, e.g. "qsd.trajectories".
  const std::string& field() const noexcept { return field_; }

 private:
  Kind kind_;
  std::string field_;
};

struct QsdSettings {
  std::size_t trajectories = 1000;
  double step = 0.0;
  bool renormalize = true;
  unsigned threads = 1;
};

struct RunConfig {
  Command command = Command::Counterexample;

  double beta = 0.01;
  double ell = 3000.0;
  double gamma = 1.0;
  double c = 1.0;
  LindbladMethod method = LindbladMethod::Exact;
  double step = 0.0;
  std::optional<ComplexMatrix> k_x;
  std::vector<double> betas;
  std::optional<double> span;

  ComplexMatrix hamiltonian = ComplexMatrix::Zero(2, 2);
  ComplexMatrix observable = pauli::x();
  ComplexVector psi0 = ComplexVector::Constant(2, Complex(1.0, 0.0));

  std::optional<QsdSettings> qsd;

  std::uint64_t seed = 0;
  Tolerances tolerances;
  std::string output_path = "-";
  Format format = Format::Csv;
  LogLevel log_level = LogLevel::Info;
};

bool operator==(const RunConfig& a, const RunConfig& b);

/// Parses and validates a JSON document. When `command` is given it selects the
/// schema and must agree with a "command" key in the document, if any.
RunConfig parse_config(const std::string& text, std::optional<Command> command = std::nullopt);

/// Fills defaults that depend on other fields and checks every constraint.
/// parse_config already calls this; call it again after overriding fields.
void resolve(RunConfig& cfg);

/// The resolved config as a JSON document (compact, deterministic key order).
std::string serialize_config(const RunConfig& cfg);

/// Number format used in CSV cells: fixed notation, 12 significant digits.
std::string format_fixed(double v);

struct RunOutcome {
  int exit_status;  // 0 ok, 1 validation failure, 2 numerical failure
  std::string report;
};

/// Runs the command and returns the report text without touching the
/// filesystem. Never throws for configuration or numerical failures; those
/// are mapped to exit statuses with a message on `log`.
RunOutcome execute(const RunConfig& cfg, std::ostream& log);

/// execute() plus writing the report to cfg.output_path ("-" is stdout).
int run(const RunConfig& cfg, std::ostream& out, std::ostream& log);

}  // namespace hyperqsd::cli
