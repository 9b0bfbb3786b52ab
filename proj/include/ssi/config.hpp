#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssi/inversion.hpp"

namespace ssi {

using Json = nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";

/// Oracle description. Types: circle, points, single, axis, subspace, toy_image.
struct OracleSpec {
  std::string type = "circle";
  double radius = 2.0;
  int count = 8;
  std::vector<std::vector<double>> points;
  std::vector<double> weights;
  int dim = 8;
  int latent_dim = 2;
  std::vector<double> stddevs{1.0};
  Seed basis_seed = 1;
  GridShape shape{3, 8, 8};
};

ScoreOracle build_oracle(const OracleSpec& spec);

/// karras: t_min/t_max/rho/steps. ddim: full_steps/stride/offset. The built grid is ascending and excludes t = 0.
struct GridSpec {
  std::string type = "karras";
  double t_min = 0.002;
  double t_max = 80.0;
  double rho = 7.0;
  int steps = 200;
  int full_steps = 1000;
  int stride = 2;
  int offset = 1;
};

TimeGrid build_grid(const GridSpec& spec);

struct ExperimentConfig {
  std::string command;
  OracleSpec oracle;
  NoiseSchedule schedule;
  Method integrator = Method::Euler;
  GridSpec grid;
  SamplerKind sampler = SamplerKind::Ode;
  AlphaMode alpha = AlphaMode::Continuous;
  double t_ssi = 0.1;
  std::vector<InversionMethod> methods{InversionMethod::Ssi};
  std::size_t trials = 100;
  std::optional<Seed> seed;
  double perturbation = 0.0;
  std::string out_dir;
  std::string verbosity = "summary";
  bool unscaled_output = true;

  std::vector<double> sigmas;
  std::vector<double> t_ssi_ladder;
  std::vector<int> steps_ladder;
  std::vector<double> lambdas;
  std::vector<Seed> data_seeds;
  std::vector<double> deltas;
  std::size_t noise_seeds = 10;
  std::size_t pilot_trials = 2000;
  double coverage_eps = 0.05;
  std::vector<double> x0;
};

const std::vector<std::string>& command_names();

/// Per-command defaults before any file or flag is applied.
ExperimentConfig default_config(const std::string& command);

/// Overlays a JSON document on the command defaults. Unknown keys throw ConfigError.
/// A report document is accepted too; its embedded config is used.
ExperimentConfig parse_config(const Json& doc, const std::string& command);

/// Fills data-dependent defaults (e.g. the sweep ladder) and checks every field. Throws ConfigError.
void resolve(ExperimentConfig& cfg);

Json to_json(const ExperimentConfig& cfg);

/// FNV-1a 64 of the compact JSON dump, as 16 hex digits.
std::string config_hash(const Json& j);

}  // namespace ssi
