#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "ssi/flow.hpp"
#include "ssi/parallel.hpp"
#include "ssi/stats.hpp"

namespace ssi {

/// Batch means of per-image |Pearson r|, with standard errors over the batch.
/// A metric is absent when the grid is too small for it (C < 2, H < 2, W < 2).
struct GaussianityReport {
  struct Metric {
    double mean = 0.0;
    double se = 0.0;
  };
  std::optional<Metric> chan;
  std::optional<Metric> hori;
  std::optional<Metric> vert;
  std::size_t sample_count = 0;
};

/// Pearson r of two equal-length samples. Throws UndefinedCorrelation if either is constant.
double pearson(const Vector& x, const Vector& y);

/// CHAN: mean |r| over channel pairs. HORI: pixels vs right neighbours, pooled. VERT: pixels vs lower neighbours.
GaussianityReport correlation_metrics(const std::vector<Vector>& noises, const GridShape& shape);
GaussianityReport correlation_metrics(const std::vector<StateVector>& noises);

/// Per-image values behind one metric, in batch order.
struct PerImageCorrelation {
  double chan = 0.0;
  double hori = 0.0;
  double vert = 0.0;
};
PerImageCorrelation image_correlations(const Vector& x, const GridShape& shape);

/// |a - b| < k * sqrt(se_a^2 + se_b^2).
bool within_se(const GaussianityReport::Metric& a, const GaussianityReport::Metric& b, double k);

double mse(const Vector& a, const Vector& b);

struct SsimParams {
  int window = 8;
  double dynamic_range = 1.0;
  double k1 = 0.01;
  double k2 = 0.03;
};

/// Mean SSIM over all valid uniform windows, per channel, averaged over channels.
double ssim(const Vector& a, const Vector& b, const GridShape& shape, SsimParams params = {});

struct TracePoint {
  double sigma;
  double ratio;
};

/// ||E[x0|x_t] - x_t|| / sigma_t at every trajectory point (all sigma must be positive).
std::vector<TracePoint> singularity_trace(const ScoreOracle& oracle, const Trajectory& traj);

/// Root-mean-square of the ratio across trajectories that share one grid.
std::vector<TracePoint> rms_trace(const std::vector<std::vector<TracePoint>>& traces);

/// (max - min) / mean of the ratio over sigma in [lo, hi].
double relative_spread(const std::vector<TracePoint>& trace, double lo, double hi);

/// Finite everywhere and no larger than `limit`.
bool trace_bounded(const std::vector<TracePoint>& trace, double limit);

/// Value of the trace at the smallest sigma.
double terminal_ratio(const std::vector<TracePoint>& trace);

struct ConcentrationReport {
  double sigma = 0.0;
  std::vector<double> ratios;
  /// sqrt(d - n) and the chi(d - n) mean.
  double center = 0.0;
  double chi_mean = 0.0;
  double band_lo = 0.0;
  double band_hi = 0.0;
  double coverage_fraction = 0.0;
  stats::KsResult ks;
  bool regime_ok = true;
};

/// Ratios ||x_t - y(x_t)|| / sigma for x_t = x0 + sigma n, x0 ~ p_data; KS against chi(d - n).
/// Draw i uses derive_seed(seed, i) for x0 and derive_seed(seed, i, 1) for n.
std::vector<double> projection_ratios(const ScoreOracle& oracle, double sigma, std::size_t trials, Seed seed,
                                      Execution ex = default_execution());

/// Largest k with empirical P(|r - center| > a) <= 2 exp(-k a^2) at every sample point.
double fit_tail_constant(const std::vector<double>& ratios, double center);
/// Half-width A = sqrt(ln(2 / eps) / k).
double tail_half_width(double k, double eps);

/// Band [center - A, center + A] with A from `band_half_width`, coverage measured on this batch.
ConcentrationReport projection_concentration(const ScoreOracle& oracle, double sigma, std::size_t trials, Seed seed,
                                             double band_half_width = 0.0, Execution ex = default_execution());

/// sigma at most this fraction of the feature scale counts as asymptotic.
inline constexpr double kRegimeFraction = 0.1;

struct BoundCheck {
  double delta = 0.0;
  int d = 0;
  double chi_bound = 0.0;
  std::optional<double> empirical_violation_rate;
};

/// d + 2 sqrt(-d ln delta) - 2 ln delta.
BoundCheck chi_square_bound(int d, double delta);
/// Fraction of `trials` standard-normal draws in R^d with ||n||^2 above the radicand.
BoundCheck chi_square_bound(int d, double delta, std::size_t trials, Seed seed, Execution ex = default_execution());

}  // namespace ssi
