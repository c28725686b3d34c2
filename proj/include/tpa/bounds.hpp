#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>

#include "core.hpp"

namespace tpa {

/// Largest eps_tilde / lambda at which the Poisson tail bound is stated.
inline constexpr double tail_bound_ratio_limit = 2.3;
/// Validity limit of the exponential expansion behind the sup-deviation bound.
inline constexpr double sup_bound_ratio_limit = 2.31858;

struct TailBound {
  double raw = 0.0;      // 2 exp(-(k e^2 / 2 lambda)(1 - e / lambda)); may exceed 1
  double clamped = 0.0;  // raw clamped to [0, 1]
};

namespace detail {

inline TailBound poisson_deviation_bound(double eps_tilde, double lambda, double k, double ratio_limit, const char* who) {
  if (!(eps_tilde > 0.0)) throw domain_error(std::string(who) + ": eps_tilde must be positive");
  if (!(lambda > 0.0)) throw domain_error(std::string(who) + ": lambda must be positive");
  if (!(k > 0.0)) throw domain_error(std::string(who) + ": k must be positive");
  if (eps_tilde / lambda > ratio_limit) throw domain_error(std::string(who) + ": eps_tilde / lambda exceeds the bound's validity range");
  const double r = eps_tilde / lambda;
  TailBound b;
  b.raw = 2.0 * std::exp(-(k * eps_tilde * eps_tilde / (2.0 * lambda)) * (1.0 - r));
  b.clamped = std::clamp(b.raw, 0.0, 1.0);
  return b;
}

}  // namespace detail

/// Bound on P(|N/k - lambda| >= eps_tilde) for N ~ Poisson(k lambda).
inline TailBound poisson_tail_bound(double eps_tilde, double lambda, std::uint64_t k) {
  return detail::poisson_deviation_bound(eps_tilde, lambda, static_cast<double>(k), tail_bound_ratio_limit, "poisson_tail_bound");
}

/// (epsilon, delta) target for the two-phase scheme.
struct RasConfig {
  double epsilon = 0.1;
  double delta = 0.05;
  // The scheme assumes mu(B)/mu(B') >= e. This cannot be checked, only declared.
  bool ratio_at_least_e = true;

  [[nodiscard]] double epsilon_a() const { return std::log1p(epsilon); }

  void validate() const {
    if (!(epsilon > 0.0)) throw domain_error("RasConfig: epsilon must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw domain_error("RasConfig: delta must lie in (0,1)");
    if (!(epsilon_a() < 1.0)) throw domain_error("RasConfig: ln(1+epsilon) must be below 1 (epsilon < e - 1)");
  }
};

enum class RasStatus { ok, phase1_empty };

struct RasResult {
  double estimate = 1.0;  // exp(N2 / k2)
  std::uint64_t k1 = 0, n1 = 0, k2 = 0, n2 = 0;
  std::uint64_t total_samples = 0;  // N1 + N2, the shrink steps taken
  std::uint64_t total_draws = 0;    // sampler calls, N1 + N2 + k1 + k2
  RasStatus status = RasStatus::ok;
  PooledProcess phase2;
};

/// k1 = ceil(2 ea^-2 (1 - ea)^-1 ln(2/delta)), ea = ln(1 + epsilon).
inline std::uint64_t phase1_k(const RasConfig& config) {
  config.validate();
  const double ea = config.epsilon_a();
  const double k1 = 2.0 / (ea * ea) / (1.0 - ea) * std::log(2.0 / config.delta);
  return static_cast<std::uint64_t>(std::ceil(k1));
}

inline std::uint64_t phase2_k(std::uint64_t n1, const RasConfig& config) {
  return static_cast<std::uint64_t>(std::ceil(static_cast<double>(n1) / (1.0 - config.epsilon_a())));
}

/// Two-phase randomized approximation scheme: a rough Phase I estimate of
/// lambda sizes the Phase II batch.
template <NestedFamily F>
RasResult run_ras(const F& family, const RasConfig& config, const Streams& streams, const RunOptions& opts = {}) {
  config.validate();
  if (!config.ratio_at_least_e)
    throw domain_error("run_ras: ratio below e declared; use ar_ratio_estimate instead");
  RasResult r;
  r.k1 = phase1_k(config);
  const auto pool1 = sample_pool(family, streams.with_phase(phase::ras_phase1), r.k1, opts);
  r.n1 = pool1.n();
  if (r.n1 == 0) {
    r.status = RasStatus::phase1_empty;
    r.total_draws = r.k1;
    r.phase2 = PooledProcess{0, family.beta_shell(), family.beta_center(), {}};
    return r;
  }
  r.k2 = phase2_k(r.n1, config);
  r.phase2 = sample_pool(family, streams.with_phase(phase::ras_phase2), r.k2, opts);
  r.n2 = r.phase2.n();
  r.estimate = std::exp(estimate_log_ratio(r.phase2).estimate);
  r.total_samples = r.n1 + r.n2;
  r.total_draws = r.total_samples + r.k1 + r.k2;
  return r;
}

struct AcceptRejectResult {
  double estimate = 1.0;  // 1 / p_hat, +inf when nothing hit the center
  double p_hat = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t hits = 0;
  bool infinite = false;
};

/// Sample size ceil(C eps^-2 ln(2/delta)) with C = 3e(1+eps)^2. From the
/// multiplicative Chernoff bound 2exp(-n p r^2/3) with r = eps/(1+eps) and
/// p = mu(B')/mu(B) > 1/e.
inline std::uint64_t accept_reject_samples(double epsilon, double delta) {
  if (!(epsilon > 0.0)) throw domain_error("accept_reject_samples: epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw domain_error("accept_reject_samples: delta must lie in (0,1)");
  const double c = 3.0 * std::exp(1.0) * (1.0 + epsilon) * (1.0 + epsilon);
  return static_cast<std::uint64_t>(std::ceil(c / (epsilon * epsilon) * std::log(2.0 / delta)));
}

/// Acceptance-rejection for ratios below e: draw from the shell, count how
/// often the draw already lies in the center.
template <NestedFamily F>
AcceptRejectResult ar_ratio_estimate(const F& family, double epsilon, double delta, const Streams& streams,
                                     std::optional<std::uint64_t> sample_size = std::nullopt) {
  AcceptRejectResult r;
  r.samples = sample_size.value_or(accept_reject_samples(epsilon, delta));
  if (r.samples == 0) throw argument_error("ar_ratio_estimate: sample size must be positive");
  Rng rng = streams.with_phase(phase::accept_reject).make(0);
  const double shell = family.beta_shell();
  const double center = family.beta_center();
  for (std::uint64_t i = 0; i < r.samples; ++i)
    if (family.draw(shell, rng).beta_next <= center) ++r.hits;
  r.p_hat = static_cast<double>(r.hits) / static_cast<double>(r.samples);
  r.infinite = r.hits == 0;
  r.estimate = r.infinite ? std::numeric_limits<double>::infinity() : 1.0 / r.p_hat;
  return r;
}

}  // namespace tpa
