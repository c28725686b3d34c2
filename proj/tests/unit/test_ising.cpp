#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include <tpa/core.hpp>
#include <tpa/models/ising.hpp>

#include "oracles.hpp"

using namespace tpa;
using namespace tpa::ising;
using Catch::Approx;

TEST_CASE("lattice construction") {
  CHECK(LatticeGraph::lattice(4, 4, false).edges().size() == 24);
  CHECK(LatticeGraph::lattice(4, 4, true).edges().size() == 32);
  CHECK(LatticeGraph::lattice(2, 2, true).edges().size() == 4);
  CHECK(LatticeGraph::lattice(1, 3, true).edges().size() == 3);
  CHECK_THROWS_AS(LatticeGraph(3, {{0, 0}}), argument_error);
  CHECK_THROWS_AS(LatticeGraph(3, {{0, 1}, {1, 0}}), argument_error);
  CHECK_THROWS_AS(LatticeGraph(2, {{0, 2}}), argument_error);
}

TEST_CASE("edge list parsing") {
  std::istringstream in("# square\n0 1\n1 2\n\n2 3  # last\n3 0\n");
  const auto g = LatticeGraph::read_edge_list(in);
  CHECK(g.vertex_count() == 4);
  CHECK(g.edges().size() == 4);
  std::istringstream padded("0 1\n");
  CHECK(LatticeGraph::read_edge_list(padded, 5).vertex_count() == 5);
  std::istringstream bad("0 1 2\n");
  CHECK_THROWS_AS(LatticeGraph::read_edge_list(bad), argument_error);
  std::istringstream neg("0 -1\n");
  CHECK_THROWS_AS(LatticeGraph::read_edge_list(neg), argument_error);
}

TEST_CASE("Hamiltonian and agreements") {
  const LatticeGraph g(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
  const auto x = SpinConfig::from_mask(0b1100, 4);  // (0,0,1,1)
  CHECK(agreements(x, g) == 2);
  CHECK(hamiltonian(x, g) == -3.0);
  CHECK(x.mask() == 0b1100);
  CHECK(hamiltonian(SpinConfig::from_mask(0, 4), g) == -5.0);
}

TEST_CASE("single-edge partition function") {
  const LatticeGraph g(2, {{0, 1}});
  CHECK(brute_force_Z(1.0, g).value == Approx(20.21467585477939).epsilon(1e-13));
  CHECK(expected_run_cost(1.0, g) == Approx(2.620114506958277).epsilon(1e-13));
  CHECK(brute_force_Z(0.0, g).value == 4.0);
}

TEST_CASE("partition function against per-state enumeration") {
  for (auto [w, h] : {std::pair{2u, 2u}, {3u, 3u}, {4u, 4u}}) {
    const auto g = LatticeGraph::lattice(w, h, false);
    const auto ref = oracle::grid_edges(w, h);
    for (double beta : {0.0, 0.3, 1.0, 2.0})
      CHECK(brute_force_Z(beta, g).log_value == Approx(oracle::ising_log_z(beta, w * h, ref)).epsilon(1e-12));
  }
  const auto g16 = LatticeGraph::lattice(4, 4, false);
  CHECK(brute_force_Z(1.0, g16).log_value == Approx(27.497711024011295).epsilon(1e-13));
  CHECK(brute_force_Z(2.0, g16).log_value == Approx(50.81764441041271).epsilon(1e-13));
  CHECK(brute_force_Z(0.0, g16).value == 65536.0);
}

TEST_CASE("spectrum level counts") {
  const IsingSpectrum s(LatticeGraph(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}}));
  CHECK(s.counts() == std::vector<std::uint64_t>{2, 0, 12, 0, 2});
  CHECK_THROWS_AS(IsingSpectrum(LatticeGraph::lattice(5, 5, false)), unsupported_error);
}

TEST_CASE("exact Gibbs sampler matches the target law") {
  const LatticeGraph g(2, {{0, 1}});
  Rng rng{8};
  const int n = 100000;
  int agree = 0;
  for (int i = 0; i < n; ++i) {
    const auto x = exact_gibbs_sample(1.0, g, rng);
    agree += x.spins[0] == x.spins[1];
  }
  const double p = 0.7310585786300048;
  CHECK(static_cast<double>(agree) / n == Approx(p).margin(4.0 * std::sqrt(p * (1 - p) / n)));

  // Full state law on the 4-cycle, chi-square against exp(beta * -H) / Z.
  const LatticeGraph sq(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
  const IsingSpectrum spectrum(sq);
  std::vector<double> obs(16, 0.0), exp(16, 0.0);
  const double beta = 0.7, lz = spectrum.partition(beta).log_value;
  const int m = 80000;
  for (int i = 0; i < m; ++i) obs[spectrum.sample_state(beta, rng)] += 1.0;
  for (std::uint64_t s = 0; s < 16; ++s)
    exp[s] = m * std::exp(-beta * hamiltonian(SpinConfig::from_mask(s, 4), sq) - lz);
  CHECK(stats::chi_square_test(obs, exp, 0.001).passed);
}

TEST_CASE("auxiliary step lands below the current temperature") {
  const auto g = LatticeGraph::lattice(3, 3, false);
  Rng rng{9};
  for (int i = 0; i < 1000; ++i) {
    const auto x = exact_gibbs_sample(1.2, g, rng);
    const double next = gibbs_tpa_step(x, g, 1.2, rng);
    CHECK(next < 1.2);
  }
  CHECK(aux_beta(4.0, 2.0) == 0.5);
}

TEST_CASE("Gibbs family runs and run cost") {
  const auto g = LatticeGraph::lattice(2, 2, false);
  const GibbsFamily f(g, 1.0);
  CHECK(f.log_measure(0.0) == Approx(4.0 * std::log(2.0)));
  const auto traces = run_batch(f, Streams{10}, 20000, {});
  double total = 0.0;
  for (const auto& t : traces) total += static_cast<double>(t.betas.size() - 1);
  // Sampler calls per run is 1 + Poisson(lambda).
  const double cost = expected_run_cost(1.0, g);
  CHECK(cost == Approx(1.0 + 3.52505328257013).epsilon(1e-12));
  CHECK(total / 20000 == Approx(cost).margin(4.0 * std::sqrt((cost - 1.0) / 20000)));
  CHECK(spacing_diagnostic(std::span<const RunTrace>(traces), f).ks.passed);
}

TEST_CASE("external sampler mode") {
  const auto g = LatticeGraph::lattice(2, 2, false);
  const IsingSpectrum spectrum(g);
  const GibbsFamily f(g, 1.0, [&spectrum](double b, Rng& r) { return exact_gibbs_sample(b, spectrum, r); });
  CHECK_FALSE(f.exact());
  CHECK_THROWS_AS(f.log_measure(1.0), unsupported_error);
  const auto pool = sample_pool(f, Streams{10}, 2000, {});
  CHECK(estimate_log_ratio(pool).estimate == Approx(3.52505328257013).margin(4.0 * std::sqrt(3.53 / 2000)));
  CHECK_THROWS_AS(GibbsFamily(g, 1.0, GibbsFamily::ExternalSampler{}), argument_error);
  CHECK_THROWS_AS(GibbsFamily(g, -1.0), argument_error);
}
