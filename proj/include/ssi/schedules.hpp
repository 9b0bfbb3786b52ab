#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace ssi {

enum class ScheduleFamily { VeKarras, VpLinearBeta };

/// Noise level sigma(t) and scaling s(t) of the forward process.
///
/// VeKarras: sigma(t) = t, s(t) = 1, t >= 0.
/// VpLinearBeta: beta(t) = beta0 + beta1 * t on t in [0, 1],
///   alpha_bar(t) = exp(-(beta0 t + beta1 t^2 / 2)), sigma = sqrt((1 - alpha_bar) / alpha_bar),
///   s = sqrt(alpha_bar) = 1 / sqrt(1 + sigma^2).
struct NoiseSchedule {
  ScheduleFamily family = ScheduleFamily::VeKarras;
  double beta0 = 0.1;
  double beta1 = 19.9;

  static NoiseSchedule ve() { return {}; }
  static NoiseSchedule vp(double beta0 = 0.1, double beta1 = 19.9) {
    return {ScheduleFamily::VpLinearBeta, beta0, beta1};
  }

  bool is_vp() const noexcept { return family == ScheduleFamily::VpLinearBeta; }
  /// Largest admissible time (infinity for VE).
  double t_max() const noexcept;
};

std::string to_string(ScheduleFamily f);

double sigma(const NoiseSchedule& sch, double t);
double scale(const NoiseSchedule& sch, double t);
double sigma_dot(const NoiseSchedule& sch, double t);
double scale_dot(const NoiseSchedule& sch, double t);

/// Integrated rate: int_0^t beta(s) ds. Zero for VE.
double integrated_beta(const NoiseSchedule& sch, double t);
/// Continuous alpha_bar(t) = s(t)^2.
double alpha_bar(const NoiseSchedule& sch, double t);
/// Inverse of sigma(); returns the time at which sigma(t) == sig.
double time_for_sigma(const NoiseSchedule& sch, double sig);

/// Discrete DDIM cumulative products alpha_i = prod_{j<=i} (1 - beta(t_j) dt), t_j = j / full_steps.
/// Element 0 is 1 (t = 0); element i corresponds to index i.
std::vector<double> discrete_alpha_bars(const NoiseSchedule& sch, int full_steps);

enum class GridDirection { Ascending, Descending };

/// Strictly monotone time discretization. `indices` is set for DDIM subsequences.
class TimeGrid {
 public:
  TimeGrid(std::vector<double> times, GridDirection dir, std::vector<int> indices = {});

  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<int>& indices() const noexcept { return indices_; }
  GridDirection direction() const noexcept { return dir_; }
  std::size_t size() const noexcept { return times_.size(); }
  std::size_t steps() const noexcept { return times_.size() - 1; }
  double operator[](std::size_t i) const { return times_[i]; }
  double front() const { return times_.front(); }
  double back() const { return times_.back(); }
  bool has_indices() const noexcept { return !indices_.empty(); }

  TimeGrid reversed() const;
  /// Drops leading entries with time exactly 0.
  TimeGrid without_zero() const;
  /// Sub-grid keeping entries with time >= t (ascending) or <= t (descending),
  /// with `t` inserted at the boundary if it is not already a grid point.
  TimeGrid starting_at(double t) const;

 private:
  std::vector<double> times_;
  GridDirection dir_;
  std::vector<int> indices_;
};

/// Karras rho-warped grid of N + 1 points: tau_0 = 0, tau_1 = t_min, tau_N = t_max (ascending).
TimeGrid karras_grid(double t_min, double t_max, double rho, int n);

/// DDIM subsequence {offset, offset + stride, ...} of {1..full_steps}, times i / full_steps.
TimeGrid ddim_kappa_grid(int full_steps, int stride, int offset);

}  // namespace ssi
