#pragma once

#include "ssi/report.hpp"

namespace ssi {

/// Seed-derivation tags; stream i of kind k is derive_seed(base, i, k).
namespace tags {
inline constexpr std::uint64_t kData = 1;
inline constexpr std::uint64_t kNoise = 2;
inline constexpr std::uint64_t kModel = 3;
inline constexpr std::uint64_t kFresh = 4;
inline constexpr std::uint64_t kStart = 5;
inline constexpr std::uint64_t kPilot = 6;
inline constexpr std::uint64_t kRung = 7;
inline constexpr std::uint64_t kCosine = 8;
}  // namespace tags

/// All commands expect a config that went through resolve().
RunReport cmd_verify_singularity(const ExperimentConfig& cfg);
RunReport cmd_verify_projection(const ExperimentConfig& cfg);
RunReport cmd_invert(const ExperimentConfig& cfg);
RunReport cmd_sweep_tssi(const ExperimentConfig& cfg);
RunReport cmd_interpolate(const ExperimentConfig& cfg);
RunReport cmd_reconstruct(const ExperimentConfig& cfg);

/// Dispatches on cfg.command and fills config echo, seeds and wall-clock time.
RunReport run_command(const ExperimentConfig& cfg);

/// Parses, resolves and runs a config or report document.
RunReport run_from_json(const Json& doc, const std::string& command);

}  // namespace ssi
