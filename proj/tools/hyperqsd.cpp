// hyperqsd <command> --config <path> [--seed N] [--out <path>] [--format csv|json]

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "hyperqsd/cli.hpp"

namespace cli = hyperqsd::cli;

int main(int argc, char** argv) {
  CLI::App app{"Hyperplane-foliated quantum state diffusion simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string format;

  for (auto command : {cli::Command::Counterexample, cli::Command::Sweep, cli::Command::Consistency,
                       cli::Command::Lindblad, cli::Command::QsdEnsemble}) {
    auto* sub = app.add_subcommand(cli::to_string(command));
    sub->add_option("--config", config_path, "JSON configuration document")->required();
    sub->add_option("--seed", seed, "override the master seed");
    sub->add_option("--out", out_path, "report path ('-' for stdout)");
    sub->add_option("--format", format, "report format")->check(CLI::IsMember({"csv", "json"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  const auto* chosen = app.get_subcommands().front();
  const auto command = *cli::command_from_string(chosen->get_name());

  std::ifstream in(config_path, std::ios::binary);
  if (!in) {
    std::cerr << "hyperqsd: cannot read config " << config_path << "\n";
    return 1;
  }
  std::stringstream text;
  text << in.rdbuf();

  cli::RunConfig cfg;
  try {
    cfg = cli::parse_config(text.str(), command);
    if (seed) cfg.seed = *seed;
    if (!out_path.empty()) cfg.output_path = out_path;
    if (format == "csv") cfg.format = cli::Format::Csv;
    if (format == "json") cfg.format = cli::Format::Json;
    cli::resolve(cfg);
  } catch (const cli::ConfigError& e) {
    std::cerr << "hyperqsd: " << e.what() << "\n";
    return 1;
  }
  return cli::run(cfg, std::cout, std::cerr);
}
