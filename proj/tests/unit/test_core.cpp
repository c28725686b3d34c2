#include <catch2/catch_amalgamated.hpp>

#include <tpa/core.hpp>
#include <tpa/models/exp_interval.hpp>

#include "oracles.hpp"

using namespace tpa;
using Catch::Approx;

namespace {

PooledProcess fixed_pool(std::uint64_t k, std::size_t n) {
  PooledProcess p{k, 0.0, -100.0, {}};
  for (std::size_t i = 0; i < n; ++i) p.points.push_back(-0.5 - static_cast<double>(i) * 0.01);
  return p;
}

// Draws a fixed sequence regardless of the rng.
struct Scripted {
  using point_type = double;
  std::vector<double> seq;
  mutable std::size_t at = 0;
  double beta_shell() const { return 1.0; }
  double beta_center() const { return 0.0; }
  Draw<double> draw(double, Rng&) const { return {0.0, seq[at++ % seq.size()]}; }
};

}  // namespace

TEST_CASE("single run shrinks until it lands in the center") {
  ExpInterval f(0.0, -3.0);
  Rng rng{11};
  const auto t = single_run(f, rng, 1000);
  REQUIRE(t.betas.size() == t.count + 2);
  CHECK(t.betas.front() == 0.0);
  CHECK(t.betas.back() <= -3.0);
  for (std::size_t i = 1; i + 1 < t.betas.size(); ++i) {
    CHECK(t.betas[i] < t.betas[i - 1]);
    CHECK(t.betas[i] > -3.0);
  }
}

TEST_CASE("samplers that do not shrink are rejected") {
  Rng rng{1};
  CHECK_THROWS_AS(single_run(Scripted{{0.5, 0.7}}, rng, 100), corrupt_sampler_error);
  CHECK_THROWS_AS(single_run(Scripted{{0.5, 0.5}}, rng, 100), corrupt_sampler_error);
  CHECK_THROWS_AS(single_run(Scripted{{std::nan("")}}, rng, 100), corrupt_sampler_error);
  CHECK_THROWS_AS(single_run(ExpInterval(0.0, -1e9), rng, 10), runaway_error);
}

TEST_CASE("run count is Poisson(lambda)") {
  const double lambda = 1.5;
  ExpInterval f(0.0, -lambda);
  const auto traces = run_batch(f, Streams{2024}, 20000, {});
  std::vector<std::uint64_t> counts;
  std::vector<double> as_double;
  for (const auto& t : traces) {
    counts.push_back(t.count);
    as_double.push_back(static_cast<double>(t.count));
  }
  CHECK(stats::mean(as_double) == Approx(lambda).margin(4.0 * std::sqrt(lambda / 20000)));
  CHECK(stats::poisson_gof(counts, lambda, 0.001).passed);
}

TEST_CASE("batches are reproducible and independent of worker count") {
  ExpInterval f(0.0, -4.0);
  const auto a = sample_pool(f, Streams{7}, 500, {.workers = 1});
  const auto b = sample_pool(f, Streams{7}, 500, {.workers = 4});
  CHECK(a.points == b.points);
  const auto c = sample_pool(f, Streams{8}, 500, {.workers = 1});
  CHECK(a.points != c.points);
}

TEST_CASE("pool is sorted, bounded, and counts every interior point") {
  ExpInterval f(2.0, -1.0);
  const auto traces = run_batch(f, Streams{3}, 200, {});
  const auto pool = pool_runs(std::span<const RunTrace>(traces), f);
  std::uint64_t total = 0;
  for (const auto& t : traces) total += t.count;
  CHECK(pool.n() == total);
  CHECK(pool.k == 200);
  CHECK(std::is_sorted(pool.points.begin(), pool.points.end(), std::greater<>{}));
  for (double b : pool.points) CHECK((b > -1.0 && b < 2.0));
  CHECK_THROWS_AS(pool_runs(std::span<const RunTrace>{}, 2.0, -1.0), argument_error);
  CHECK_THROWS_AS(pool_runs(std::span<const RunTrace>(traces), 3.0, -1.0), argument_error);
}

TEST_CASE("point estimate and variance") {
  const auto e = estimate_log_ratio(fixed_pool(25, 100));
  CHECK(e.estimate == 4.0);
  CHECK(e.variance_estimate == Approx(100.0 / 625.0));
  CHECK(e.n == 100);
  CHECK(e.k == 25);
}

TEST_CASE("normal interval matches reference values") {
  const auto ci = normal_ci(fixed_pool(25, 100), 0.05);
  CHECK(ci.log_ratio.lower == Approx(3.2160144061839784).epsilon(1e-12));
  CHECK(ci.log_ratio.upper == Approx(4.783985593816022).epsilon(1e-12));
  CHECK(ci.ratio.lower == Approx(std::exp(3.2160144061839784)).epsilon(1e-12));
  const auto point = normal_ci(fixed_pool(25, 100), 1.0);
  CHECK(point.log_ratio.width() == 0.0);
  CHECK_THROWS_AS(normal_ci(fixed_pool(25, 0), 0.05), degenerate_interval_error);
  CHECK_THROWS_AS(normal_ci(fixed_pool(25, 100), 0.0), argument_error);
  CHECK_THROWS_AS(normal_ci(fixed_pool(25, 100), 1.5), argument_error);
}

TEST_CASE("exact Poisson interval matches reference values") {
  const auto ci = exact_poisson_ci(fixed_pool(25, 100), 0.05);
  CHECK(ci.log_ratio.lower == Approx(3.2545596500369256).epsilon(1e-10));
  CHECK(ci.log_ratio.upper == Approx(4.865071751697055).epsilon(1e-10));
  const auto zero = exact_poisson_ci(fixed_pool(10, 0), 0.05);
  CHECK(zero.log_ratio.lower == 0.0);
  CHECK(zero.log_ratio.upper == Approx(0.36888794541139364).epsilon(1e-10));
}

TEST_CASE("exact interval covers at its nominal rate") {
  const double lambda = 2.0;
  ExpInterval f(0.0, -lambda);
  int covered = 0;
  const int reps = 400;
  for (int r = 0; r < reps; ++r) {
    const auto pool = sample_pool(f, Streams{99}.child(r), 20, {});
    covered += exact_poisson_ci(pool, 0.1).log_ratio.contains(lambda);
  }
  // Garwood is conservative; 400 reps at 90% nominal has sd 0.015.
  CHECK(static_cast<double>(covered) / reps >= 0.9 - 3 * 0.015);
}

TEST_CASE("log-measure spacings are Exp(1)") {
  ExpInterval f(0.0, -6.0);
  const auto traces = run_batch(f, Streams{5}, 2000, {});
  const auto r = spacing_diagnostic(std::span<const RunTrace>(traces), f);
  CHECK(r.ks.passed);
  const auto p = spacing_diagnostic(pool_runs(std::span<const RunTrace>(traces), f), f);
  CHECK(p.ks.passed);
  CHECK_THROWS_AS(spacing_diagnostic(std::span<const RunTrace>(traces), Scripted{{0.5}}), unsupported_error);
}
