// Omnithermal approximation of ln Z(beta) for a small Ising lattice, compared
// against exact enumeration at a few temperatures.
//
//   omnithermal_ising [k] [seed]

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include <tpa/tpa.hpp>

int main(int argc, char** argv) {
  const std::uint64_t k = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 16;
  const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1;

  const auto graph = tpa::ising::LatticeGraph::lattice(4, 4, false);
  const tpa::ising::GibbsFamily family(graph, 2.0);
  const auto pool = tpa::sample_pool(family, tpa::Streams{seed}, k);
  const auto curve = tpa::anchored_partition_curve(pool, 16.0 * std::log(2.0));

  std::printf("%llu runs, %llu pooled points\n", static_cast<unsigned long long>(k),
              static_cast<unsigned long long>(pool.n()));
  std::printf("%6s %12s %12s\n", "beta", "ln Z_hat", "ln Z");
  for (double beta = 0.0; beta <= 2.0 + 1e-12; beta += 0.25)
    std::printf("%6.2f %12.4f %12.4f\n", beta, curve.log_value(beta), family.log_measure(beta));
  return 0;
}
