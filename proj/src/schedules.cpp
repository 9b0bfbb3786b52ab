#include "ssi/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ssi/error.hpp"

namespace ssi {

namespace {

void check_time(const NoiseSchedule& sch, double t) {
  if (!std::isfinite(t) || t < 0.0) throw InvalidArgument("time must be finite and >= 0");
  if (sch.is_vp() && t > 1.0) throw InvalidArgument("VP schedule is defined on t in [0, 1]");
}

double beta_rate(const NoiseSchedule& sch, double t) { return sch.beta0 + sch.beta1 * t; }

}  // namespace

double NoiseSchedule::t_max() const noexcept {
  return is_vp() ? 1.0 : std::numeric_limits<double>::infinity();
}

std::string to_string(ScheduleFamily f) {
  return f == ScheduleFamily::VeKarras ? "ve_karras" : "vp_linear_beta";
}

double integrated_beta(const NoiseSchedule& sch, double t) {
  check_time(sch, t);
  if (!sch.is_vp()) return 0.0;
  return sch.beta0 * t + 0.5 * sch.beta1 * t * t;
}

double alpha_bar(const NoiseSchedule& sch, double t) { return std::exp(-integrated_beta(sch, t)); }

double sigma(const NoiseSchedule& sch, double t) {
  check_time(sch, t);
  if (!sch.is_vp()) return t;
  return std::sqrt(std::expm1(integrated_beta(sch, t)));
}

double scale(const NoiseSchedule& sch, double t) {
  check_time(sch, t);
  if (!sch.is_vp()) return 1.0;
  return std::exp(-0.5 * integrated_beta(sch, t));
}

double sigma_dot(const NoiseSchedule& sch, double t) {
  check_time(sch, t);
  if (!sch.is_vp()) return 1.0;
  if (t == 0.0) throw InvalidArgument("VP sigma_dot is unbounded at t = 0");
  // sigma^2 = e^B - 1  =>  2 sigma sigma' = e^B B'
  const double b = integrated_beta(sch, t);
  return std::exp(b) * beta_rate(sch, t) / (2.0 * std::sqrt(std::expm1(b)));
}

double scale_dot(const NoiseSchedule& sch, double t) {
  check_time(sch, t);
  if (!sch.is_vp()) return 0.0;
  return -0.5 * beta_rate(sch, t) * scale(sch, t);
}

double time_for_sigma(const NoiseSchedule& sch, double sig) {
  if (!std::isfinite(sig) || sig < 0.0) throw InvalidArgument("sigma must be finite and >= 0");
  if (!sch.is_vp()) return sig;
  // beta1/2 t^2 + beta0 t - log(1 + sigma^2) = 0
  const double l = std::log1p(sig * sig);
  const double a = 0.5 * sch.beta1;
  const double t = (sch.beta1 == 0.0) ? l / sch.beta0
                                       : 2.0 * l / (sch.beta0 + std::sqrt(sch.beta0 * sch.beta0 + 4.0 * a * l));
  if (t > 1.0 + 1e-12) throw InvalidArgument("sigma exceeds the VP schedule range");
  return std::min(t, 1.0);
}

std::vector<double> discrete_alpha_bars(const NoiseSchedule& sch, int full_steps) {
  if (full_steps < 1) throw InvalidArgument("full_steps must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(full_steps) + 1, 1.0);
  const double dt = 1.0 / full_steps;
  for (int i = 1; i <= full_steps; ++i) {
    const double beta_i = sch.is_vp() ? beta_rate(sch, i * dt) * dt : 0.0;
    out[i] = out[i - 1] * (1.0 - beta_i);
  }
  return out;
}

// ---------------------------------------------------------------------------

TimeGrid::TimeGrid(std::vector<double> times, GridDirection dir, std::vector<int> indices)
    : times_(std::move(times)), dir_(dir), indices_(std::move(indices)) {
  if (times_.size() < 2) throw InvalidArgument("time grid needs at least 2 points");
  if (!indices_.empty() && indices_.size() != times_.size())
    throw InvalidArgument("grid indices must match grid times");
  for (std::size_t i = 0; i + 1 < times_.size(); ++i) {
    const bool ok = dir_ == GridDirection::Ascending ? times_[i] < times_[i + 1] : times_[i] > times_[i + 1];
    if (!ok || !std::isfinite(times_[i + 1])) throw InvalidArgument("time grid is not strictly monotone");
  }
  if (!std::isfinite(times_.front())) throw InvalidArgument("time grid is not finite");
}

TimeGrid TimeGrid::reversed() const {
  std::vector<double> t(times_.rbegin(), times_.rend());
  std::vector<int> idx(indices_.rbegin(), indices_.rend());
  return TimeGrid(std::move(t),
                  dir_ == GridDirection::Ascending ? GridDirection::Descending : GridDirection::Ascending,
                  std::move(idx));
}

TimeGrid TimeGrid::without_zero() const {
  std::vector<double> t;
  std::vector<int> idx;
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (times_[i] == 0.0) continue;
    t.push_back(times_[i]);
    if (has_indices()) idx.push_back(indices_[i]);
  }
  return TimeGrid(std::move(t), dir_, std::move(idx));
}

TimeGrid TimeGrid::starting_at(double t) const {
  const bool asc = dir_ == GridDirection::Ascending;
  std::vector<double> out;
  std::vector<int> idx;
  bool on_grid = false;
  for (std::size_t i = 0; i < times_.size(); ++i) {
    const bool keep = asc ? times_[i] >= t : times_[i] <= t;
    if (!keep) continue;
    if (times_[i] == t) on_grid = true;
    out.push_back(times_[i]);
    if (has_indices()) idx.push_back(indices_[i]);
  }
  if (!on_grid) {
    if (has_indices()) throw InvalidArgument("start time is not a point of the indexed grid");
    out.insert(out.begin(), t);
  }
  return TimeGrid(std::move(out), dir_, std::move(idx));
}

TimeGrid karras_grid(double t_min, double t_max, double rho, int n) {
  if (!(t_min > 0.0) || !(t_max > t_min) || !(rho > 0.0) || n < 2 || !std::isfinite(t_max))
    throw InvalidArgument("karras_grid requires 0 < t_min < t_max, rho > 0, N >= 2");
  std::vector<double> t(static_cast<std::size_t>(n) + 1);
  t[0] = 0.0;
  const double lo = std::pow(t_min, 1.0 / rho);
  const double hi = std::pow(t_max, 1.0 / rho);
  for (int i = 1; i <= n; ++i) {
    const double frac = static_cast<double>(i - 1) / static_cast<double>(n - 1);
    t[i] = std::pow(lo + frac * (hi - lo), rho);
  }
  t[1] = t_min;
  t[n] = t_max;
  return TimeGrid(std::move(t), GridDirection::Ascending);
}

TimeGrid ddim_kappa_grid(int full_steps, int stride, int offset) {
  if (full_steps < 1 || stride < 1 || offset < 1 || offset > stride || offset > full_steps)
    throw InvalidArgument("ddim_kappa_grid requires 1 <= offset <= stride and offset <= full_steps");
  std::vector<double> t;
  std::vector<int> idx;
  for (int i = offset; i <= full_steps; i += stride) {
    idx.push_back(i);
    t.push_back(static_cast<double>(i) / full_steps);
  }
  if (t.size() < 2) throw InvalidArgument("DDIM subsequence has fewer than 2 entries");
  return TimeGrid(std::move(t), GridDirection::Ascending, std::move(idx));
}

}  // namespace ssi
