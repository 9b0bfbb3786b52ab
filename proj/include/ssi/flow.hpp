#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ssi/schedules.hpp"
#include "ssi/scores.hpp"

namespace ssi {

enum class Method { Euler, Heun };
/// Ve integrates the unscaled state x. VpScaled integrates x~ = s(t) x.
enum class Formulation { Ve, VpScaled };

struct IntegratorSpec {
  Method method = Method::Euler;
  Formulation formulation = Formulation::Ve;
};

std::string to_string(Method m);
std::string to_string(Formulation f);

struct Trajectory {
  std::vector<Vector> states;
  TimeGrid times;
  NoiseSchedule schedule;
  Formulation formulation = Formulation::Ve;
  std::optional<GridShape> grid_shape;

  /// State i divided by s(t_i) when the formulation is scaled.
  Vector unscaled(std::size_t i) const;
};

/// Right-hand side of the probability-flow ODE.
/// Ve: -sigma_dot sigma score(x, sigma).
/// VpScaled: (s_dot / s) x~ - s sigma_dot sigma score(x~ / s, sigma).
Vector ode_drift(const NoiseSchedule& sch, const ScoreModel& model, const Vector& x, double t,
                 Formulation f = Formulation::Ve);

/// Called with (grid index, time, state) for every grid point including the start.
using StepObserver = std::function<void(std::size_t, double, const Vector&)>;

/// Final state only. Steps are signed, so ascending and descending grids share one code path.
/// A step landing on sigma = 0 falls back to Euler.
Vector integrate_to(const NoiseSchedule& sch, const ScoreModel& model, IntegratorSpec spec, const Vector& x_start,
                    const TimeGrid& grid, const StepObserver& observer = {});

Trajectory integrate(const NoiseSchedule& sch, const ScoreModel& model, IntegratorSpec spec,
                     const StateVector& x_start, const TimeGrid& grid);

/// Forward Euler in the noise level on the unscaled state: x += (sigma' - sigma) (x - D(x, sigma)) / sigma.
/// Grid times are mapped through sigma(); a terminal sigma = 0 is allowed.
Vector integrate_sigma_euler(const NoiseSchedule& sch, const ScoreModel& model, const Vector& x_start,
                             const TimeGrid& grid, const StepObserver& observer = {});

/// Closed-form VE flow map of a subspace Gaussian from t_start to t_end.
Vector gaussian_exact(const SubspaceGaussianScore& oracle, const Vector& x_start, double t_start, double t_end);

/// CSV columns step,t,sigma then x0..x{d-1}, or norm,manifold_distance when `summary` is set.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const ScoreOracle* oracle = nullptr,
                          bool summary = false, bool unscaled = true);

}  // namespace ssi
