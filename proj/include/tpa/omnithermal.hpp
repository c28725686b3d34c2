#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "bounds.hpp"
#include "core.hpp"

namespace tpa {

/// Right-continuous staircase over [beta_center, beta_shell] driven by the
/// counting process N_P(t) = #{b in P : b >= beta_shell - t}.
///
/// Two readings share the same jumps:
///  - ratio:    ln of mu(B)/mu(A(beta)), equal to N_P / k (0 at the shell);
///  - anchored: ln Z_hat(beta) = ln mu(B') + N/k - N_P / k, which equals
///              ln mu(B') at the center and drops by 1/k per point as beta
///              decreases.
class StepFunction {
 public:
  enum class Kind { ratio, anchored };

  StepFunction(PooledProcess pool, Kind kind, double log_center_measure = 0.0)
      : pool_(std::move(pool)), kind_(kind), log_center_(log_center_measure) {
    if (pool_.k == 0) throw argument_error("StepFunction: pool has k = 0");
    if (!std::is_sorted(pool_.points.begin(), pool_.points.end(), std::greater<>{}))
      throw argument_error("StepFunction: pool points must be sorted descending");
  }

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] const PooledProcess& pool() const noexcept { return pool_; }
  [[nodiscard]] double beta_shell() const noexcept { return pool_.beta_shell; }
  [[nodiscard]] double beta_center() const noexcept { return pool_.beta_center; }
  [[nodiscard]] std::uint64_t k() const noexcept { return pool_.k; }
  [[nodiscard]] double log_center_measure() const noexcept { return log_center_; }

  [[nodiscard]] bool in_domain(double beta) const noexcept {
    return beta >= pool_.beta_center && beta <= pool_.beta_shell;
  }

  /// N_P(beta_shell - beta): pooled points at or above beta.
  [[nodiscard]] std::uint64_t jumps_above(double beta) const {
    if (!in_domain(beta)) throw argument_error("StepFunction: beta outside [beta_center, beta_shell]");
    const auto it = std::upper_bound(pool_.points.begin(), pool_.points.end(), beta, std::greater<>{});
    return static_cast<std::uint64_t>(it - pool_.points.begin());
  }

  /// N_P(t) on the shifted axis t = beta_shell - beta.
  [[nodiscard]] std::uint64_t counting(double t) const { return jumps_above(pool_.beta_shell - t); }

  [[nodiscard]] double log_value(double beta) const {
    const std::uint64_t j = jumps_above(beta);
    if (kind_ == Kind::ratio) return log_ratio_point(j, pool_.k);
    return log_center_ + (log_ratio_point(pool_.n(), pool_.k) - log_ratio_point(j, pool_.k));
  }

  [[nodiscard]] double value(double beta) const { return std::exp(log_value(beta)); }

  /// Distinct breakpoints, descending.
  [[nodiscard]] std::vector<double> breakpoints() const {
    std::vector<double> out;
    for (double b : pool_.points)
      if (out.empty() || b != out.back()) out.push_back(b);
    return out;
  }

 private:
  PooledProcess pool_;
  Kind kind_;
  double log_center_;
};

inline StepFunction counting_process(const PooledProcess& pool) { return StepFunction(pool, StepFunction::Kind::ratio); }

/// exp(N_P(beta_shell - beta) / k), estimating mu(B)/mu(A(beta)).
inline double omnithermal_estimate(const PooledProcess& pool, double beta) {
  return counting_process(pool).value(beta);
}

inline StepFunction anchored_partition_curve(const PooledProcess& pool, double log_center_measure) {
  return StepFunction(pool, StepFunction::Kind::anchored, log_center_measure);
}

/// Bound on P(sup_t |N_P(t)/k - t| >= eps_tilde) for a rate-k process on [0, lambda].
inline TailBound sup_deviation_bound(double eps_tilde, double lambda, std::uint64_t k) {
  return detail::poisson_deviation_bound(eps_tilde, lambda, static_cast<double>(k), sup_bound_ratio_limit, "sup_deviation_bound");
}

/// sup over t in [0, lambda] of |N_P(t)/k - t| on the log-measure axis.
/// The supremum is attained at a jump (from above) or just before one
/// (from below), or at the right end.
inline double sup_deviation(const PooledProcess& pool, const std::function<double(double)>& log_measure) {
  const double t_shell = log_measure(pool.beta_shell);
  const double lambda = t_shell - log_measure(pool.beta_center);
  const double k = static_cast<double>(pool.k);
  double sup = 0.0;
  double count = 0.0;
  for (double b : pool.points) {
    const double t = t_shell - log_measure(b);
    sup = std::max(sup, std::abs(count / k - t));
    count += 1.0;
    sup = std::max(sup, std::abs(count / k - t));
  }
  return std::max(sup, std::abs(count / k - lambda));
}

/// Increments of N_P over the disjoint windows [j w, (j+1) w) of the
/// log-measure axis that fit inside [0, lambda]. For a rate-k process these
/// are i.i.d. Poisson(k w).
inline std::vector<std::uint64_t> window_increments(const PooledProcess& pool, const std::function<double(double)>& log_measure,
                                                    double window) {
  if (!(window > 0.0)) throw argument_error("window_increments: window must be positive");
  const double t_shell = log_measure(pool.beta_shell);
  const double lambda = t_shell - log_measure(pool.beta_center);
  const auto windows = static_cast<std::size_t>(std::floor(lambda / window));
  std::vector<std::uint64_t> counts(windows, 0);
  for (double b : pool.points) {
    const auto j = static_cast<std::size_t>(std::floor((t_shell - log_measure(b)) / window));
    if (j < windows) ++counts[j];
  }
  return counts;
}

struct OmniPlan {
  double epsilon = 0.0;
  double delta = 0.0;
  double lambda_upper = 0.0;
  std::uint64_t k_required = 0;
};

/// Runs needed for an (epsilon, delta) omnithermal approximation:
/// k = ceil(2 lambda (3/eps + 1/eps^2) ln(2/delta)).
inline OmniPlan plan_runs(double epsilon, double delta, double lambda_upper) {
  if (!(epsilon > 0.0 && epsilon < 0.3)) throw domain_error("plan_runs: epsilon must lie in (0, 0.3)");
  if (!(delta > 0.0 && delta < 1.0)) throw domain_error("plan_runs: delta must lie in (0, 1)");
  if (!(lambda_upper > 1.0)) throw domain_error("plan_runs: lambda_upper must exceed 1");
  OmniPlan p{epsilon, delta, lambda_upper, 0};
  const double k = 2.0 * lambda_upper * (3.0 / epsilon + 1.0 / (epsilon * epsilon)) * std::log(2.0 / delta);
  p.k_required = static_cast<std::uint64_t>(std::ceil(k));
  return p;
}

/// Prior on the inverse temperature: a density, or a point mass.
struct Prior {
  std::function<double(double)> density;
  std::optional<double> point_mass;

  static Prior uniform(double lo, double hi) {
    return {[lo, hi](double b) { return (b >= lo && b <= hi) ? 1.0 / (hi - lo) : 0.0; }, std::nullopt};
  }
  static Prior at(double b0) { return {nullptr, b0}; }
};

struct EvidenceIntegral {
  double value = 0.0;
  double step = 0.0;  // step actually used, b_max / intervals
  std::size_t intervals = 0;
};

/// Integral over [0, b_max] of prior(b) exp(-b H) / Z_hat(b), composite trapezoid.
inline EvidenceIntegral evidence_integral(const StepFunction& curve, const Prior& prior, double observed_h, double b_max,
                                          double step) {
  if (curve.beta_center() > 0.0 || b_max > curve.beta_shell())
    throw argument_error("evidence_integral: curve domain does not cover [0, b_max]");
  if (!(b_max > 0.0)) throw argument_error("evidence_integral: b_max must be positive");
  auto integrand_no_prior = [&](double b) { return std::exp(-b * observed_h - curve.log_value(b)); };
  EvidenceIntegral r;
  if (prior.point_mass) {
    r.value = integrand_no_prior(*prior.point_mass);
    return r;
  }
  if (!prior.density) throw argument_error("evidence_integral: prior has neither density nor point mass");
  if (!(step > 0.0)) throw argument_error("evidence_integral: quadrature step must be positive");
  r.intervals = static_cast<std::size_t>(std::ceil(b_max / step));
  r.step = b_max / static_cast<double>(r.intervals);
  double sum = 0.0;
  for (std::size_t i = 0; i <= r.intervals; ++i) {
    const double b = i == r.intervals ? b_max : static_cast<double>(i) * r.step;
    const double w = (i == 0 || i == r.intervals) ? 0.5 : 1.0;
    sum += w * prior.density(b) * integrand_no_prior(b);
  }
  r.value = sum * r.step;
  return r;
}

}  // namespace tpa
