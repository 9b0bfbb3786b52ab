#pragma once

#include <optional>
#include <vector>

#include "ssi/flow.hpp"
#include "ssi/rng.hpp"

namespace ssi {

enum class InversionMethod { Ssi, BaselineDdim, BaselineOde };
/// Source of alpha_bar on DDIM grids: closed form at t, or the discrete product at the grid index.
enum class AlphaMode { Continuous, Discrete };

std::string to_string(InversionMethod m);
std::string to_string(AlphaMode m);

struct InversionConfig {
  double t_ssi = 0.0;
  /// Ascending. SSI: starts at t_ssi. Baselines: starts at the first positive time and x0 enters unchanged.
  TimeGrid grid = TimeGrid({0.0, 1.0}, GridDirection::Ascending);
  Seed noise_seed = 0;
  InversionMethod method = InversionMethod::Ssi;
  Method integrator = Method::Euler;
  AlphaMode alpha = AlphaMode::Continuous;
  int full_steps = 1000;
  bool keep_trajectory = false;
};

/// Throws InvalidArgument when the config is inconsistent with the schedule.
void validate(const InversionConfig& cfg, const NoiseSchedule& sch);

struct DDIMCoefficients {
  std::vector<double> phi;
  std::vector<double> psi;
};

/// Step i (1-based) maps the later state to the earlier one: x~_{i-1} = phi_i x~_i + psi_i D.
/// `alpha_bars` is ordered by increasing time; element 0 belongs to the earliest grid point.
/// phi[0], psi[0] are unused placeholders.
DDIMCoefficients ddim_coefficients(const std::vector<double>& alpha_bars);

/// alpha_bar at each grid point under the chosen mode.
std::vector<double> grid_alpha_bars(const NoiseSchedule& sch, const TimeGrid& grid, AlphaMode mode,
                                    int full_steps = 1000);

struct InversionResult {
  /// Final state in the integration coordinates (x~_T for VP).
  Vector noise;
  NoiseSchedule schedule;
  Formulation formulation = Formulation::Ve;
  double t_final = 0.0;
  /// The standard-normal draw n injected by SSI (empty for baselines).
  Vector injected;
  /// max of sigma_t ||score(x_t, sigma_t)|| over the visited states, exact oracle.
  double max_ratio = 0.0;
  std::optional<Trajectory> trajectory;
  InversionConfig config;

  Vector unscaled_noise() const;
};

InversionResult ssi_invert_ve(const ScoreModel& model, const NoiseSchedule& sch, const Vector& x0,
                              const InversionConfig& cfg);
InversionResult ssi_invert_vp(const ScoreModel& model, const NoiseSchedule& sch, const Vector& x0,
                              const InversionConfig& cfg);
/// Lagged-denoiser DDIM inversion: x~_i = (x~_{i-1} - psi_i D(x~_{i-1} / s_i, sigma_i)) / phi_i.
InversionResult ddim_invert_baseline(const ScoreModel& model, const NoiseSchedule& sch, const Vector& x0,
                                     const InversionConfig& cfg);
/// ODE inversion of x0 itself from the first grid time, no noise injection.
InversionResult ode_invert_baseline(const ScoreModel& model, const NoiseSchedule& sch, const Vector& x0,
                                    const InversionConfig& cfg);
/// Dispatch on cfg.method and the schedule family.
InversionResult invert(const ScoreModel& model, const NoiseSchedule& sch, const Vector& x0,
                       const InversionConfig& cfg);

/// DDIM sampling on a descending grid (scaled coordinates). Returns x~ at the last grid point.
Vector ddim_sample(const ScoreModel& model, const NoiseSchedule& sch, const Vector& x_t, const TimeGrid& grid,
                   AlphaMode mode = AlphaMode::Continuous, int full_steps = 1000, const StepObserver& observer = {});

enum class SamplerKind { Ode, Ddim };

struct SamplerSpec {
  SamplerKind kind = SamplerKind::Ode;
  Method method = Method::Euler;
  AlphaMode alpha = AlphaMode::Continuous;
  int full_steps = 1000;
};

struct Reconstruction {
  /// Clean estimate in data coordinates after the final exact denoise-to-mean readout.
  Vector x0_hat;
  /// Unscaled state at the last grid point, before the readout.
  Vector x_last;
  double sigma_last = 0.0;
  double max_ratio = 0.0;
};

/// Runs the sampler from `noise` (integration coordinates of `formulation`) down a descending grid.
Reconstruction sample_from(const ScoreModel& model, const NoiseSchedule& sch, Formulation formulation,
                           const Vector& noise, const TimeGrid& grid, SamplerSpec spec);

Reconstruction reconstruct(const ScoreModel& model, const NoiseSchedule& sch, const InversionResult& inv,
                           const TimeGrid& grid, SamplerSpec spec);

/// The formulation matching a schedule family: Ve for VE, VpScaled for VP.
Formulation native_formulation(const NoiseSchedule& sch);

}  // namespace ssi
