#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/poisson.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "errors.hpp"

namespace tpa::stats {

/// z such that P(W > z) = p for standard normal W.
inline double normal_upper_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw domain_error("normal_upper_quantile: p must lie in (0,1)");
  return boost::math::quantile(boost::math::complement(boost::math::normal{}, p));
}

/// Inverse of the regularized lower incomplete gamma P(shape, .).
inline double gamma_quantile(double shape, double p) { return boost::math::gamma_p_inv(shape, p); }

/// Kolmogorov tail Q(x) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 x^2).
inline double kolmogorov_tail(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) return 1.0;  // series is numerically 1 here
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * x * x);
    sum += (j % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

// Stephens' small-sample scaling of sqrt(n) D.
inline double ks_scaled(std::size_t n, double d) {
  const double rn = std::sqrt(static_cast<double>(n));
  return (rn + 0.12 + 0.11 / rn) * d;
}

inline double ks_p_value(std::size_t n, double d) { return kolmogorov_tail(ks_scaled(n, d)); }

/// Smallest D whose p-value is <= alpha.
inline double ks_critical_value(std::size_t n, double alpha) {
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (ks_p_value(n, mid) > alpha) lo = mid; else hi = mid;
  }
  return hi;
}

/// Two-sided one-sample Kolmogorov-Smirnov distance to a continuous CDF.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw argument_error("ks_statistic: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

struct KsReport {
  std::size_t n = 0;
  double statistic = 0.0;
  double p_value = 1.0;
  double critical_value = 0.0;
  double alpha = 0.0;
  bool passed = false;
  bool low_power = false;  // asymptotic p-value unreliable below ~35 points
};

inline KsReport ks_test(std::vector<double> sample, const std::function<double(double)>& cdf, double alpha) {
  KsReport r;
  r.n = sample.size();
  r.alpha = alpha;
  r.statistic = ks_statistic(std::move(sample), cdf);
  r.p_value = ks_p_value(r.n, r.statistic);
  r.critical_value = ks_critical_value(r.n, alpha);
  r.passed = r.statistic < r.critical_value;
  r.low_power = r.n < 35;
  return r;
}

inline double exp1_cdf(double x) { return x <= 0.0 ? 0.0 : -std::expm1(-x); }

struct ChiSquareReport {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
  double alpha = 0.0;
  bool passed = false;
};

/// Pearson chi-square with no estimated parameters (dof = bins - 1).
inline ChiSquareReport chi_square_test(std::span<const double> observed, std::span<const double> expected, double alpha) {
  if (observed.size() != expected.size() || observed.size() < 2)
    throw argument_error("chi_square_test: need matching observed/expected with at least two bins");
  ChiSquareReport r;
  r.alpha = alpha;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double diff = observed[i] - expected[i];
    r.statistic += diff * diff / expected[i];
  }
  r.dof = observed.size() - 1;
  r.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(static_cast<double>(r.dof)), r.statistic));
  r.passed = r.p_value >= alpha;
  return r;
}

/// Goodness of fit of integer counts to Poisson(lambda). Adjacent cells are
/// merged until every expected frequency is at least min_expected; the last
/// cell collects the whole upper tail.
inline ChiSquareReport poisson_gof(std::span<const std::uint64_t> counts, double lambda, double alpha,
                                   double min_expected = 5.0) {
  if (counts.empty()) throw argument_error("poisson_gof: no counts");
  if (!(lambda > 0.0)) throw argument_error("poisson_gof: lambda must be positive");
  const double n = static_cast<double>(counts.size());
  const boost::math::poisson_distribution<double> pois(lambda);
  const auto max_count = *std::max_element(counts.begin(), counts.end());
  const auto upper = static_cast<std::uint64_t>(std::max<double>(static_cast<double>(max_count), lambda + 12.0 * std::sqrt(lambda) + 12.0));

  std::vector<double> hist(upper + 1, 0.0);
  for (auto c : counts) hist[c] += 1.0;

  std::vector<double> obs, expct;
  double acc_o = 0.0, acc_e = 0.0;
  for (std::uint64_t j = 0; j <= upper; ++j) {
    acc_o += hist[j];
    acc_e += n * boost::math::pdf(pois, static_cast<double>(j));
    if (acc_e >= min_expected) {
      obs.push_back(acc_o);
      expct.push_back(acc_e);
      acc_o = acc_e = 0.0;
    }
  }
  // Remaining mass and the tail beyond `upper` fold into the last cell.
  acc_e += n * boost::math::cdf(boost::math::complement(pois, static_cast<double>(upper)));
  if (expct.empty()) {
    obs.push_back(acc_o);
    expct.push_back(acc_e);
  } else {
    obs.back() += acc_o;
    expct.back() += acc_e;
  }
  if (obs.size() < 2) throw argument_error("poisson_gof: too few counts for a chi-square test");
  return chi_square_test(obs, expct, alpha);
}

inline double mean(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

inline double sample_sd(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace tpa::stats
