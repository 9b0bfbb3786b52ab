#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "ssi/commands.hpp"
#include "ssi/error.hpp"

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::string out;
  bool quiet = false;
};

ssi::Json load(const std::string& path) {
  if (path.empty()) return ssi::Json::object();
  std::ifstream in(path);
  if (!in) throw ssi::ConfigError("cannot open config '" + path + "'");
  try {
    return ssi::Json::parse(in, nullptr, true, true);
  } catch (const ssi::Json::parse_error& e) {
    throw ssi::ConfigError(std::string("config parse error: ") + e.what());
  }
}

void print_summary(const ssi::RunReport& r) {
  const ssi::Json j = ssi::to_json(r);
  std::cout << r.command << "  (" << r.wall_seconds << " s)\n";
  std::cout << "aggregates: " << j["aggregates"].dump(2) << "\n";
  if (!r.observations.empty()) std::cout << "observations: " << r.observations.dump(2) << "\n";
  std::cout << "verdicts: " << r.verdicts.dump(2) << "\n";
  std::cout << (r.passed() ? "PASS" : "FAIL") << "\n";
}

int execute(const std::string& command, const Globals& g) {
  ssi::ExperimentConfig cfg = ssi::parse_config(load(g.config_path), command);
  if (g.seed) cfg.seed = *g.seed;
  if (g.trials) cfg.trials = *g.trials;
  if (!g.out.empty()) cfg.out_dir = g.out;
  if (g.quiet) cfg.verbosity = "quiet";
  ssi::resolve(cfg);
  const ssi::RunReport r = ssi::run_command(cfg);
  if (!cfg.out_dir.empty()) ssi::write_outputs(r, cfg.out_dir);
  if (cfg.verbosity != "quiet") print_summary(r);
  return r.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Singularity-skipping inversion lab"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "JSON config or a previous report.json")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Base seed");
  app.add_option("--trials", g.trials, "Trial count");
  app.add_option("--out", g.out, "Output directory");
  app.add_flag("--quiet", g.quiet, "No console summary");
  app.fallthrough();

  std::string chosen;
  for (const auto& name : ssi::command_names())
    app.add_subcommand(name)->callback([&chosen, name] { chosen = name; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  try {
    return execute(chosen, g);
  } catch (const ssi::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ssi::IntegrationDiverged& e) {
    std::cerr << "numerical divergence: " << e.what() << "\n";
    return 3;
  } catch (const ssi::InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return 2;
  }
}
