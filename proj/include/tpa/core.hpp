#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <span>
#include <sstream>
#include <thread>
#include <vector>

#include "errors.hpp"
#include "family.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace tpa {

/// The parameter sequence visited by one run. betas[0] is the shell value,
/// betas.back() is the terminating draw (<= center), and everything in
/// between lies strictly inside (center, shell).
struct RunTrace {
  std::vector<double> betas;
  std::uint64_t count = 0;
};

/// All interior betas from k runs, sorted descending. Viewed on the
/// log-measure scale they form a rate-k Poisson point process.
struct PooledProcess {
  std::uint64_t k = 0;
  double beta_shell = 0.0;
  double beta_center = 0.0;
  std::vector<double> points;

  [[nodiscard]] std::uint64_t n() const noexcept { return points.size(); }
};

struct LogRatioEstimate {
  double estimate = 0.0;  // N / k
  std::uint64_t k = 0;
  std::uint64_t n = 0;
  double variance_estimate = 0.0;  // N / k^2
};

struct Interval {
  double lower = 0.0;
  double upper = 0.0;

  [[nodiscard]] bool contains(double x) const noexcept { return lower <= x && x <= upper; }
  [[nodiscard]] double width() const noexcept { return upper - lower; }
};

/// Interval for ln(mu(B)/mu(B')) and its exponentiated counterpart.
struct ConfidenceInterval {
  double alpha = 0.05;
  Interval log_ratio;
  Interval ratio;
};

struct RunOptions {
  std::uint64_t max_steps = 1'000'000;
  unsigned workers = 0;  // 0 = hardware concurrency
};

/// Shrink from the shell until a draw lands in the center.
template <NestedFamily F>
RunTrace single_run(const F& family, Rng& rng, std::uint64_t max_steps = RunOptions{}.max_steps) {
  const double center = family.beta_center();
  RunTrace trace;
  double beta = family.beta_shell();
  trace.betas.push_back(beta);
  for (std::uint64_t step = 0;; ++step) {
    if (step >= max_steps) {
      std::ostringstream msg;
      msg << "TPA run exceeded " << max_steps << " steps at beta=" << beta;
      throw runaway_error(msg.str());
    }
    const double next = family.draw(beta, rng).beta_next;
    if (!(next < beta)) {
      std::ostringstream msg;
      msg << "sampler did not shrink: beta=" << beta << " beta_next=" << next;
      throw corrupt_sampler_error(msg.str());
    }
    trace.betas.push_back(next);
    if (next <= center) break;
    ++trace.count;
    beta = next;
  }
  return trace;
}

namespace detail {

// Calls body(i) for i in [0, n) on up to `workers` threads. The first
// exception thrown is rethrown on the calling thread.
inline void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& body) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n && !failed; i = next++) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
            failed = true;
          }
        }
      });
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

/// k independent runs; run j draws from streams.make(j), so the result does
/// not depend on the worker count or on completion order.
template <NestedFamily F>
std::vector<RunTrace> run_batch(const F& family, const Streams& streams, std::uint64_t k, const RunOptions& opts = {}) {
  std::vector<RunTrace> traces(k);
  detail::parallel_for(k, opts.workers, [&](std::size_t j) {
    Rng rng = streams.make(j);
    traces[j] = single_run(family, rng, opts.max_steps);
  });
  return traces;
}

inline PooledProcess pool_runs(std::span<const RunTrace> traces, double beta_shell, double beta_center) {
  if (traces.empty()) throw argument_error("pool_runs: at least one trace is required");
  PooledProcess pool;
  pool.k = traces.size();
  pool.beta_shell = beta_shell;
  pool.beta_center = beta_center;
  for (const auto& t : traces) {
    if (t.betas.empty() || t.betas.front() != beta_shell)
      throw argument_error("pool_runs: trace does not start at this family's shell");
    for (std::size_t i = 1; i < t.betas.size(); ++i)
      if (t.betas[i] > beta_center && t.betas[i] < beta_shell) pool.points.push_back(t.betas[i]);
  }
  std::sort(pool.points.begin(), pool.points.end(), std::greater<>{});
  return pool;
}

template <NestedFamily F>
PooledProcess pool_runs(std::span<const RunTrace> traces, const F& family) {
  return pool_runs(traces, family.beta_shell(), family.beta_center());
}

/// Runs k times and pools, the common case.
template <NestedFamily F>
PooledProcess sample_pool(const F& family, const Streams& streams, std::uint64_t k, const RunOptions& opts = {}) {
  const auto traces = run_batch(family, streams, k, opts);
  return pool_runs(std::span<const RunTrace>(traces), family);
}

inline double log_ratio_point(std::uint64_t n, std::uint64_t k) {
  return static_cast<double>(n) / static_cast<double>(k);
}

inline LogRatioEstimate estimate_log_ratio(const PooledProcess& pool) {
  if (pool.k == 0) throw argument_error("estimate_log_ratio: pool has k = 0");
  LogRatioEstimate e;
  e.k = pool.k;
  e.n = pool.n();
  e.estimate = log_ratio_point(e.n, e.k);
  e.variance_estimate = e.estimate / static_cast<double>(e.k);
  return e;
}

/// Normal approximation N/k +- z_{1-alpha/2} sqrt(N)/k. The standard error
/// is sqrt(N)/k because Var(N/k) = lambda/k is estimated by N/k^2.
inline ConfidenceInterval normal_ci(const PooledProcess& pool, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw argument_error("normal_ci: alpha must lie in (0,1]");
  if (pool.n() == 0)
    throw degenerate_interval_error("normal_ci: N = 0 gives a zero-width interval; use exact_poisson_ci");
  const auto est = estimate_log_ratio(pool);
  const double z = alpha >= 1.0 ? 0.0 : stats::normal_upper_quantile(alpha / 2.0);
  const double half = z * std::sqrt(static_cast<double>(est.n)) / static_cast<double>(est.k);
  ConfidenceInterval ci;
  ci.alpha = alpha;
  ci.log_ratio = {est.estimate - half, est.estimate + half};
  ci.ratio = {std::exp(ci.log_ratio.lower), std::exp(ci.log_ratio.upper)};
  return ci;
}

/// Garwood interval: invert the Poisson tails of N ~ Poisson(k lambda).
inline ConfidenceInterval exact_poisson_ci(const PooledProcess& pool, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw argument_error("exact_poisson_ci: alpha must lie in (0,1)");
  if (pool.k == 0) throw argument_error("exact_poisson_ci: pool has k = 0");
  const double n = static_cast<double>(pool.n());
  const double k = static_cast<double>(pool.k);
  ConfidenceInterval ci;
  ci.alpha = alpha;
  ci.log_ratio.lower = pool.n() == 0 ? 0.0 : stats::gamma_quantile(n, alpha / 2.0) / k;
  ci.log_ratio.upper = stats::gamma_quantile(n + 1.0, 1.0 - alpha / 2.0) / k;
  ci.ratio = {std::exp(ci.log_ratio.lower), std::exp(ci.log_ratio.upper)};
  return ci;
}

/// Exp(1) goodness of fit of log-measure spacings.
struct SpacingReport {
  std::vector<double> spacings;
  stats::KsReport ks;
};

/// Spacings t(beta_i) - t(beta_{i+1}) over each trace, including the
/// terminating draw. Whether a spacing is observed depends only on the
/// spacings before it, so the pooled values are marginally Exp(1).
template <NestedFamily F>
SpacingReport spacing_diagnostic(std::span<const RunTrace> traces, const F& family, double alpha = 0.001) {
  if constexpr (!LogMeasureOracle<F>) {
    throw unsupported_error("spacing_diagnostic: family has no log-measure oracle");
  } else {
    SpacingReport r;
    for (const auto& t : traces)
      for (std::size_t i = 0; i + 1 < t.betas.size(); ++i)
        r.spacings.push_back(family.log_measure(t.betas[i]) - family.log_measure(t.betas[i + 1]));
    if (r.spacings.empty()) throw argument_error("spacing_diagnostic: no spacings");
    r.ks = stats::ks_test(r.spacings, stats::exp1_cdf, alpha);
    return r;
  }
}

/// Pool variant: gaps from the shell through every pooled point, scaled by
/// k. The gap straddling the center is unobserved and dropped, which biases
/// by O(1/N).
template <NestedFamily F>
SpacingReport spacing_diagnostic(const PooledProcess& pool, const F& family, double alpha = 0.001) {
  if constexpr (!LogMeasureOracle<F>) {
    throw unsupported_error("spacing_diagnostic: family has no log-measure oracle");
  } else {
    SpacingReport r;
    double prev = family.log_measure(pool.beta_shell);
    for (double b : pool.points) {
      const double t = family.log_measure(b);
      r.spacings.push_back(static_cast<double>(pool.k) * (prev - t));
      prev = t;
    }
    if (r.spacings.empty()) throw argument_error("spacing_diagnostic: empty pool");
    r.ks = stats::ks_test(r.spacings, stats::exp1_cdf, alpha);
    return r;
  }
}

}  // namespace tpa
