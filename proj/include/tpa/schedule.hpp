#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "core.hpp"

namespace tpa {

/// alphas[0] = shell > alphas[1] > ... > alphas.back() = center.
struct CoolingSchedule {
  std::vector<double> alphas;
  std::uint64_t k_used = 0;
};

/// Every k-th order statistic of the pool (largest first). With k equal to
/// the number of pooled runs each rung spans a log-measure ratio of about 1.
/// Leftover points (N mod k) stay inside the last rung.
inline CoolingSchedule build_schedule(const PooledProcess& pool, std::int64_t k) {
  if (k <= 0) throw argument_error("build_schedule: k must be positive");
  CoolingSchedule s;
  s.k_used = static_cast<std::uint64_t>(k);
  s.alphas.push_back(pool.beta_shell);
  const auto step = static_cast<std::size_t>(k);
  for (std::size_t j = step; j <= pool.points.size(); j += step) {
    const double b = pool.points[j - 1];
    if (b < s.alphas.back() && b > pool.beta_center) s.alphas.push_back(b);
  }
  if (pool.beta_center < s.alphas.back()) s.alphas.push_back(pool.beta_center);
  return s;
}

struct ScheduleQuality {
  std::vector<double> gaps;  // t(alpha_i) - t(alpha_{i+1}), one per rung
  // Summary over rungs that end on a pooled point (every rung but the last);
  // these are the ones distributed Gamma(k, 1/k).
  std::size_t interior_rungs = 0;
  double interior_mean = 0.0;
  double interior_sd = 0.0;
};

inline ScheduleQuality schedule_quality(const CoolingSchedule& schedule, const std::function<double(double)>& log_measure) {
  if (!log_measure) throw unsupported_error("schedule_quality: no log-measure oracle");
  ScheduleQuality q;
  for (std::size_t i = 0; i + 1 < schedule.alphas.size(); ++i)
    q.gaps.push_back(log_measure(schedule.alphas[i]) - log_measure(schedule.alphas[i + 1]));
  if (q.gaps.size() > 1) {
    const std::span<const double> interior(q.gaps.data(), q.gaps.size() - 1);
    q.interior_rungs = interior.size();
    q.interior_mean = stats::mean(interior);
    q.interior_sd = stats::sample_sd(interior);
  }
  return q;
}

template <NestedFamily F>
ScheduleQuality schedule_quality(const CoolingSchedule& schedule, const F& family) {
  if constexpr (LogMeasureOracle<F>) {
    return schedule_quality(schedule, [&family](double b) { return family.log_measure(b); });
  } else {
    throw unsupported_error("schedule_quality: family has no log-measure oracle");
  }
}

}  // namespace tpa
