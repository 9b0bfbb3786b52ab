#include "ssi/flow.hpp"

#include <cmath>
#include <ostream>

#include "ssi/error.hpp"

namespace ssi {

std::string to_string(Method m) { return m == Method::Euler ? "euler" : "heun"; }

std::string to_string(Formulation f) { return f == Formulation::Ve ? "ve" : "vp_scaled"; }

Vector Trajectory::unscaled(std::size_t i) const {
  if (formulation == Formulation::Ve) return states.at(i);
  return states.at(i) / scale(schedule, times[i]);
}

Vector ode_drift(const NoiseSchedule& sch, const ScoreModel& model, const Vector& x, double t, Formulation f) {
  const double sig = sigma(sch, t);
  if (!(sig > 0.0)) throw InvalidArgument("probability-flow drift is singular at sigma = 0");
  const double sd = sigma_dot(sch, t);
  if (f == Formulation::Ve) return -sd * sig * model.score(x, sig);
  const double s = scale(sch, t);
  return (scale_dot(sch, t) / s) * x - s * sd * sig * model.score(x / s, sig);
}

Vector integrate_to(const NoiseSchedule& sch, const ScoreModel& model, IntegratorSpec spec, const Vector& x_start,
                    const TimeGrid& grid, const StepObserver& observer) {
  Vector x = x_start;
  if (observer) observer(0, grid[0], x);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double t0 = grid[i];
    const double t1 = grid[i + 1];
    const double h = t1 - t0;
    const Vector d0 = ode_drift(sch, model, x, t0, spec.formulation);
    if (spec.method == Method::Euler || sigma(sch, t1) == 0.0) {
      x += h * d0;
    } else {
      const Vector xp = x + h * d0;
      if (!xp.allFinite()) throw IntegrationDiverged(i + 1, "Heun predictor produced a non-finite state");
      x += (0.5 * h) * (d0 + ode_drift(sch, model, xp, t1, spec.formulation));
    }
    if (!x.allFinite()) throw IntegrationDiverged(i + 1, "integration produced a non-finite state");
    if (observer) observer(i + 1, t1, x);
  }
  return x;
}

Trajectory integrate(const NoiseSchedule& sch, const ScoreModel& model, IntegratorSpec spec,
                     const StateVector& x_start, const TimeGrid& grid) {
  Trajectory traj{{}, grid, sch, spec.formulation, x_start.grid_shape};
  traj.states.reserve(grid.size());
  integrate_to(sch, model, spec, x_start.values, grid,
               [&](std::size_t, double, const Vector& x) { traj.states.push_back(x); });
  return traj;
}

Vector integrate_sigma_euler(const NoiseSchedule& sch, const ScoreModel& model, const Vector& x_start,
                             const TimeGrid& grid, const StepObserver& observer) {
  Vector x = x_start;
  if (observer) observer(0, grid[0], x);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double s0 = sigma(sch, grid[i]);
    const double s1 = sigma(sch, grid[i + 1]);
    const Vector eps = (x - model.denoise(x, s0)) / s0;
    x += (s1 - s0) * eps;
    if (!x.allFinite()) throw IntegrationDiverged(i + 1, "integration produced a non-finite state");
    if (observer) observer(i + 1, grid[i + 1], x);
  }
  return x;
}

Vector gaussian_exact(const SubspaceGaussianScore& oracle, const Vector& x_start, double t_start, double t_end) {
  if (x_start.size() != oracle.dim()) throw InvalidArgument("state dimension does not match the oracle");
  if (!(t_start >= 0.0) || !(t_end >= 0.0)) throw InvalidArgument("gaussian_exact needs nonnegative times");
  const Vector r = x_start - oracle.offset;
  const Vector coeff = oracle.basis.transpose() * r;
  const Vector normal = r - oracle.basis * coeff;
  Vector out = oracle.offset;
  for (Eigen::Index i = 0; i < coeff.size(); ++i) {
    const double lam = oracle.stddevs[i] * oracle.stddevs[i];
    out += coeff[i] * std::sqrt((lam + t_end * t_end) / (lam + t_start * t_start)) * oracle.basis.col(i);
  }
  if (t_start == 0.0) {
    if (normal.norm() > 1e-14 * (1.0 + r.norm()))
      throw InvalidArgument("flow map from t = 0 is singular along normal directions");
    return out;
  }
  return out + (t_end / t_start) * normal;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const ScoreOracle* oracle, bool summary,
                          bool unscaled) {
  const auto d = traj.states.empty() ? 0 : traj.states.front().size();
  const auto old_precision = os.precision(17);
  os << "step,t,sigma";
  if (summary) {
    os << ",norm";
    if (oracle) os << ",manifold_distance";
  } else {
    for (Eigen::Index k = 0; k < d; ++k) os << ",x" << k;
  }
  os << '\n';
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const Vector x = unscaled ? traj.unscaled(i) : traj.states[i];
    os << i << ',' << traj.times[i] << ',' << sigma(traj.schedule, traj.times[i]);
    if (summary) {
      os << ',' << x.norm();
      if (oracle) os << ',' << oracle->manifold_distance(x);
    } else {
      for (Eigen::Index k = 0; k < d; ++k) os << ',' << x[k];
    }
    os << '\n';
  }
  os.precision(old_precision);
}

}  // namespace ssi
