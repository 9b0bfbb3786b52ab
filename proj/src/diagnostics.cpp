#include "ssi/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ssi/error.hpp"

namespace ssi {

double pearson(const Vector& x, const Vector& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("pearson needs two samples of equal length >= 2");
  const Vector dx = x.array() - x.mean();
  const Vector dy = y.array() - y.mean();
  const double sxx = dx.squaredNorm();
  const double syy = dy.squaredNorm();
  const double scale_x = x.cwiseAbs().maxCoeff();
  const double scale_y = y.cwiseAbs().maxCoeff();
  const double tiny = 1e-28 * static_cast<double>(x.size());
  if (sxx <= tiny * scale_x * scale_x || sxx == 0.0 || syy <= tiny * scale_y * scale_y || syy == 0.0)
    throw UndefinedCorrelation("correlation of a constant sample is undefined");
  return std::clamp(dx.dot(dy) / std::sqrt(sxx * syy), -1.0, 1.0);
}

PerImageCorrelation image_correlations(const Vector& x, const GridShape& g) {
  if (static_cast<std::size_t>(x.size()) != g.size()) throw InvalidArgument("noise does not match its grid shape");
  PerImageCorrelation out;
  const Eigen::Index plane = static_cast<Eigen::Index>(g.height) * g.width;
  if (g.channels >= 2) {
    double acc = 0.0;
    int pairs = 0;
    for (int a = 0; a < g.channels; ++a)
      for (int b = a + 1; b < g.channels; ++b, ++pairs)
        acc += std::abs(pearson(x.segment(a * plane, plane), x.segment(b * plane, plane)));
    out.chan = acc / pairs;
  }
  if (g.width >= 2) {
    const Eigen::Index n = static_cast<Eigen::Index>(g.channels) * g.height * (g.width - 1);
    Vector l(n), r(n);
    Eigen::Index k = 0;
    for (int c = 0; c < g.channels; ++c)
      for (int h = 0; h < g.height; ++h)
        for (int w = 0; w + 1 < g.width; ++w, ++k) {
          l[k] = x[g.index(c, h, w)];
          r[k] = x[g.index(c, h, w + 1)];
        }
    out.hori = std::abs(pearson(l, r));
  }
  if (g.height >= 2) {
    const Eigen::Index n = static_cast<Eigen::Index>(g.channels) * (g.height - 1) * g.width;
    Vector u(n), v(n);
    Eigen::Index k = 0;
    for (int c = 0; c < g.channels; ++c)
      for (int h = 0; h + 1 < g.height; ++h)
        for (int w = 0; w < g.width; ++w, ++k) {
          u[k] = x[g.index(c, h, w)];
          v[k] = x[g.index(c, h + 1, w)];
        }
    out.vert = std::abs(pearson(u, v));
  }
  return out;
}

GaussianityReport correlation_metrics(const std::vector<Vector>& noises, const GridShape& g) {
  if (noises.size() < 2) throw InvalidArgument("correlation metrics need at least 2 samples");
  std::vector<double> chan, hori, vert;
  for (const auto& x : noises) {
    const auto c = image_correlations(x, g);
    chan.push_back(c.chan);
    hori.push_back(c.hori);
    vert.push_back(c.vert);
  }
  GaussianityReport rep;
  rep.sample_count = noises.size();
  const auto metric = [](const std::vector<double>& v) {
    return GaussianityReport::Metric{stats::mean(v), stats::standard_error(v)};
  };
  if (g.channels >= 2) rep.chan = metric(chan);
  if (g.width >= 2) rep.hori = metric(hori);
  if (g.height >= 2) rep.vert = metric(vert);
  return rep;
}

GaussianityReport correlation_metrics(const std::vector<StateVector>& noises) {
  if (noises.empty() || !noises.front().grid_shape) throw InvalidArgument("correlation metrics need a grid shape");
  const GridShape g = *noises.front().grid_shape;
  std::vector<Vector> v;
  for (const auto& s : noises) {
    if (!s.grid_shape || !(*s.grid_shape == g)) throw InvalidArgument("noises do not share one grid shape");
    v.push_back(s.values);
  }
  return correlation_metrics(v, g);
}

bool within_se(const GaussianityReport::Metric& a, const GaussianityReport::Metric& b, double k) {
  return std::abs(a.mean - b.mean) < k * std::sqrt(a.se * a.se + b.se * b.se);
}

double mse(const Vector& a, const Vector& b) {
  if (a.size() != b.size() || a.size() == 0) throw InvalidArgument("mse needs equal, non-empty dimensions");
  return (a - b).squaredNorm() / static_cast<double>(a.size());
}

double ssim(const Vector& a, const Vector& b, const GridShape& g, SsimParams p) {
  if (a.size() != b.size() || static_cast<std::size_t>(a.size()) != g.size())
    throw InvalidArgument("ssim inputs do not match the grid shape");
  if (p.window < 1 || p.window > g.height || p.window > g.width)
    throw InvalidArgument("ssim window is larger than the image");
  if (!(p.dynamic_range > 0.0)) throw InvalidArgument("ssim dynamic range must be positive");
  const double c1 = (p.k1 * p.dynamic_range) * (p.k1 * p.dynamic_range);
  const double c2 = (p.k2 * p.dynamic_range) * (p.k2 * p.dynamic_range);
  const int w = p.window;
  const double n = static_cast<double>(w) * w;
  double total = 0.0;
  for (int c = 0; c < g.channels; ++c) {
    double chan = 0.0;
    int windows = 0;
    for (int y0 = 0; y0 + w <= g.height; ++y0)
      for (int x0 = 0; x0 + w <= g.width; ++x0, ++windows) {
        double ma = 0.0, mb = 0.0;
        for (int y = y0; y < y0 + w; ++y)
          for (int x = x0; x < x0 + w; ++x) {
            ma += a[g.index(c, y, x)];
            mb += b[g.index(c, y, x)];
          }
        ma /= n;
        mb /= n;
        double va = 0.0, vb = 0.0, cov = 0.0;
        for (int y = y0; y < y0 + w; ++y)
          for (int x = x0; x < x0 + w; ++x) {
            const double da = a[g.index(c, y, x)] - ma;
            const double db = b[g.index(c, y, x)] - mb;
            va += da * da;
            vb += db * db;
            cov += da * db;
          }
        const double denom = n > 1.0 ? n - 1.0 : 1.0;
        va /= denom;
        vb /= denom;
        cov /= denom;
        chan += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      }
    total += chan / windows;
  }
  return total / g.channels;
}

std::vector<TracePoint> singularity_trace(const ScoreOracle& oracle, const Trajectory& traj) {
  std::vector<TracePoint> out;
  out.reserve(traj.states.size());
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const double sig = sigma(traj.schedule, traj.times[i]);
    if (!(sig > 0.0)) throw InvalidArgument("singularity trace needs sigma > 0 at every point");
    const Vector x = traj.unscaled(i);
    out.push_back({sig, (oracle.posterior_mean(x, sig) - x).norm() / sig});
  }
  return out;
}

std::vector<TracePoint> rms_trace(const std::vector<std::vector<TracePoint>>& traces) {
  if (traces.empty()) throw InvalidArgument("rms_trace of no trajectories");
  std::vector<TracePoint> out = traces.front();
  for (auto& p : out) p.ratio = 0.0;
  for (const auto& t : traces) {
    if (t.size() != out.size()) throw InvalidArgument("traces do not share a grid");
    for (std::size_t i = 0; i < t.size(); ++i) out[i].ratio += t[i].ratio * t[i].ratio;
  }
  for (auto& p : out) p.ratio = std::sqrt(p.ratio / static_cast<double>(traces.size()));
  return out;
}

double relative_spread(const std::vector<TracePoint>& trace, double lo, double hi) {
  double mn = std::numeric_limits<double>::infinity();
  double mx = -mn;
  double sum = 0.0;
  int count = 0;
  for (const auto& p : trace) {
    if (p.sigma < lo || p.sigma > hi) continue;
    mn = std::min(mn, p.ratio);
    mx = std::max(mx, p.ratio);
    sum += p.ratio;
    ++count;
  }
  if (count == 0) throw InvalidArgument("no trace points inside the sigma window");
  return (mx - mn) / (sum / count);
}

bool trace_bounded(const std::vector<TracePoint>& trace, double limit) {
  return std::all_of(trace.begin(), trace.end(),
                     [&](const TracePoint& p) { return std::isfinite(p.ratio) && p.ratio <= limit; });
}

double terminal_ratio(const std::vector<TracePoint>& trace) {
  if (trace.empty()) throw InvalidArgument("empty trace");
  return std::min_element(trace.begin(), trace.end(),
                          [](const TracePoint& a, const TracePoint& b) { return a.sigma < b.sigma; })
      ->ratio;
}

std::vector<double> projection_ratios(const ScoreOracle& oracle, double sig, std::size_t trials, Seed seed,
                                      Execution ex) {
  if (!(sig > 0.0)) throw InvalidArgument("projection ratios need sigma > 0");
  return run_trials(
      trials,
      [&](std::size_t i) {
        const Vector x0 = oracle.sample_one(seed, i);
        const Vector x = x0 + sig * standard_normal(derive_seed(seed, i, 1), x0.size());
        return oracle.manifold_distance(x) / sig;
      },
      ex);
}

double fit_tail_constant(const std::vector<double>& ratios, double center) {
  if (ratios.empty()) throw InvalidArgument("tail fit of an empty sample");
  std::vector<double> dev;
  dev.reserve(ratios.size());
  for (double r : ratios) dev.push_back(std::abs(r - center));
  std::sort(dev.begin(), dev.end());
  const double m = static_cast<double>(dev.size());
  double k = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < dev.size(); ++j) {
    if (dev[j] <= 0.0) continue;
    // Fraction of deviations >= dev[j].
    const double tail = (m - static_cast<double>(j)) / m;
    k = std::min(k, std::log(2.0 / tail) / (dev[j] * dev[j]));
  }
  return k;
}

double tail_half_width(double k, double eps) {
  if (!(k > 0.0) || !(eps > 0.0 && eps < 1.0)) throw InvalidArgument("tail half-width needs k > 0, eps in (0, 1)");
  return std::sqrt(std::log(2.0 / eps) / k);
}

ConcentrationReport projection_concentration(const ScoreOracle& oracle, double sig, std::size_t trials, Seed seed,
                                             double band_half_width, Execution ex) {
  if (trials < 100) throw InvalidArgument("projection_concentration needs at least 100 trials");
  ConcentrationReport rep;
  rep.sigma = sig;
  rep.ratios = projection_ratios(oracle, sig, trials, seed, ex);
  const double dof = static_cast<double>(oracle.dim() - oracle.manifold_dim());
  rep.center = std::sqrt(dof);
  rep.chi_mean = stats::chi_mean(dof);
  rep.band_lo = rep.center - band_half_width;
  rep.band_hi = rep.center + band_half_width;
  std::size_t inside = 0;
  for (double r : rep.ratios)
    if (r >= rep.band_lo && r <= rep.band_hi) ++inside;
  rep.coverage_fraction = static_cast<double>(inside) / static_cast<double>(trials);
  rep.ks = stats::ks_one_sample(rep.ratios, [dof](double r) { return stats::chi_cdf(dof, r); });
  rep.regime_ok = sig <= kRegimeFraction * oracle.feature_scale();
  return rep;
}

BoundCheck chi_square_bound(int d, double delta) {
  if (d < 1) throw InvalidArgument("chi-square bound needs d >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
  const double l = std::log(delta);
  return {delta, d, d + 2.0 * std::sqrt(-d * l) - 2.0 * l, std::nullopt};
}

BoundCheck chi_square_bound(int d, double delta, std::size_t trials, Seed seed, Execution ex) {
  BoundCheck b = chi_square_bound(d, delta);
  if (trials < 1) throw InvalidArgument("chi-square check needs at least one trial");
  const auto hits = run_trials(
      trials, [&](std::size_t i) { return standard_normal(derive_seed(seed, i), d).squaredNorm() > b.chi_bound ? 1 : 0; },
      ex);
  std::size_t count = 0;
  for (int h : hits) count += static_cast<std::size_t>(h);
  b.empirical_violation_rate = static_cast<double>(count) / static_cast<double>(trials);
  return b;
}

}  // namespace ssi
