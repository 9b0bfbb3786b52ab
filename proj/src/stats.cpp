#include "ssi/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "ssi/error.hpp"

namespace ssi::stats {

double mean(const std::vector<double>& v) {
  if (v.empty()) throw InvalidArgument("mean of an empty sample");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) throw InvalidArgument("stddev needs at least 2 values");
  const double m = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

double standard_error(const std::vector<double>& v) { return stddev(v) / std::sqrt(static_cast<double>(v.size())); }

double kolmogorov_q(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-17 * std::abs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

double p_from(double d, double n_eff) {
  const double rn = std::sqrt(n_eff);
  return kolmogorov_q((rn + 0.12 + 0.11 / rn) * d);
}

}  // namespace

KsResult ks_one_sample(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw InvalidArgument("KS test of an empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return {d, p_from(d, n)};
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("KS test of an empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return {d, p_from(d, na * nb / (na + nb))};
}

double chi_cdf(double k, double r) {
  if (!(k > 0.0)) throw InvalidArgument("chi distribution needs k > 0");
  if (r <= 0.0) return 0.0;
  return boost::math::gamma_p(0.5 * k, 0.5 * r * r);
}

double chi_mean(double k) {
  return std::sqrt(2.0) * std::exp(std::lgamma(0.5 * (k + 1.0)) - std::lgamma(0.5 * k));
}

}  // namespace ssi::stats
