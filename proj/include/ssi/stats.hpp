#pragma once

#include <functional>
#include <vector>

namespace ssi::stats {

double mean(const std::vector<double>& v);
/// Sample standard deviation (n - 1 denominator).
double stddev(const std::vector<double>& v);
double standard_error(const std::vector<double>& v);

/// Kolmogorov survival function Q(l) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 l^2).
double kolmogorov_q(double lambda);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool passes(double significance) const noexcept { return p_value > significance; }
};

KsResult ks_one_sample(std::vector<double> samples, const std::function<double(double)>& cdf);
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// CDF of the chi distribution with k degrees of freedom.
double chi_cdf(double k, double r);
/// Mean of chi(k).
double chi_mean(double k);

}  // namespace ssi::stats
