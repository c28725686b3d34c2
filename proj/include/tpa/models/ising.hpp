#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <limits>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "../errors.hpp"
#include "../family.hpp"

namespace tpa::ising {

/// Largest graph the enumeration oracle and exact sampler accept.
inline constexpr std::size_t enumeration_cap = 24;

/// Simple undirected graph: no self-loops, no repeated edges.
class LatticeGraph {
 public:
  using Edge = std::pair<std::uint32_t, std::uint32_t>;

  LatticeGraph() = default;

  LatticeGraph(std::size_t vertices, const std::vector<Edge>& edges) : vertices_(vertices) {
    std::set<Edge> seen;
    for (auto [u, v] : edges) {
      if (u >= vertices || v >= vertices) throw argument_error("LatticeGraph: edge endpoint out of range");
      if (u == v) throw argument_error("LatticeGraph: self-loop");
      const Edge e = std::minmax(u, v);
      if (!seen.insert(e).second) throw argument_error("LatticeGraph: duplicate edge");
      edges_.push_back(e);
    }
  }

  /// width x height grid, row-major vertex numbering. With wrap, edges that
  /// would repeat (a side of length 2) or loop (length 1) are left out.
  static LatticeGraph lattice(std::size_t width, std::size_t height, bool wrap) {
    if (width == 0 || height == 0) throw argument_error("LatticeGraph::lattice: empty lattice");
    std::set<Edge> edges;
    auto id = [width](std::size_t r, std::size_t c) { return static_cast<std::uint32_t>(r * width + c); };
    for (std::size_t r = 0; r < height; ++r) {
      for (std::size_t c = 0; c < width; ++c) {
        if (c + 1 < width) edges.insert(std::minmax(id(r, c), id(r, c + 1)));
        else if (wrap && width > 1) edges.insert(std::minmax(id(r, c), id(r, 0)));
        if (r + 1 < height) edges.insert(std::minmax(id(r, c), id(r + 1, c)));
        else if (wrap && height > 1) edges.insert(std::minmax(id(r, c), id(0, c)));
      }
    }
    return LatticeGraph(width * height, std::vector<Edge>(edges.begin(), edges.end()));
  }

  /// One "u v" pair per line; blank lines and '#' comments are skipped.
  /// The vertex count is the largest index + 1 unless given.
  static LatticeGraph read_edge_list(std::istream& in, std::size_t vertices = 0) {
    std::vector<Edge> edges;
    std::string line;
    std::size_t lineno = 0;
    std::size_t max_index = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      long long u = 0, v = 0;
      if (!(ls >> u)) continue;
      std::string rest;
      if (!(ls >> v) || u < 0 || v < 0 || (ls >> rest))
        throw argument_error("edge list line " + std::to_string(lineno) + ": expected two nonnegative vertex ids");
      edges.emplace_back(static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v));
      max_index = std::max<std::size_t>(max_index, static_cast<std::size_t>(std::max(u, v)));
    }
    const std::size_t inferred = edges.empty() ? 0 : max_index + 1;
    return LatticeGraph(std::max(vertices, inferred), edges);
  }

  [[nodiscard]] std::size_t vertex_count() const noexcept { return vertices_; }
  [[nodiscard]] const std::vector<Edge>& edges() const noexcept { return edges_; }

 private:
  std::size_t vertices_ = 0;
  std::vector<Edge> edges_;
};

/// x in {0,1}^V.
struct SpinConfig {
  std::vector<std::uint8_t> spins;

  static SpinConfig from_mask(std::uint64_t mask, std::size_t vertices) {
    SpinConfig x;
    x.spins.resize(vertices);
    for (std::size_t i = 0; i < vertices; ++i) x.spins[i] = static_cast<std::uint8_t>((mask >> i) & 1U);
    return x;
  }

  [[nodiscard]] std::uint64_t mask() const {
    if (spins.size() > 64) throw unsupported_error("SpinConfig::mask: more than 64 vertices");
    std::uint64_t m = 0;
    for (std::size_t i = 0; i < spins.size(); ++i) m |= static_cast<std::uint64_t>(spins[i] & 1U) << i;
    return m;
  }
};

/// Number of edges whose endpoints carry the same spin.
inline std::size_t agreements(const SpinConfig& x, const LatticeGraph& g) {
  if (x.spins.size() != g.vertex_count()) throw argument_error("hamiltonian: configuration size does not match graph");
  std::size_t a = 0;
  for (auto [u, v] : g.edges()) a += (x.spins[u] == x.spins[v]) ? 1 : 0;
  return a;
}

/// H(x) = -(1 + #agreeing edges); always <= -1.
inline double hamiltonian(const SpinConfig& x, const LatticeGraph& g) {
  return -(1.0 + static_cast<double>(agreements(x, g)));
}

/// ln Z together with Z itself; Z may overflow to infinity when ln Z is large.
struct PartitionValue {
  double log_value = 0.0;
  double value = 0.0;
};

/// Every configuration of a small graph, grouped by agreement count. Built
/// once by enumeration; afterwards Z(beta) and exact Gibbs draws cost
/// O(#E) per call.
class IsingSpectrum {
 public:
  explicit IsingSpectrum(const LatticeGraph& g) : vertices_(g.vertex_count()), edge_count_(g.edges().size()) {
    if (vertices_ > enumeration_cap)
      throw unsupported_error("IsingSpectrum: " + std::to_string(vertices_) + " vertices exceeds the enumeration cap of " +
                              std::to_string(enumeration_cap) + "; supply an external sampler");
    const std::uint64_t states = std::uint64_t{1} << vertices_;
    std::vector<std::uint16_t> level(states);
    counts_.assign(edge_count_ + 1, 0);
    for (std::uint64_t m = 0; m < states; ++m) {
      std::size_t disagree = 0;
      for (auto [u, v] : g.edges()) disagree += ((m >> u) ^ (m >> v)) & 1U;
      const auto a = edge_count_ - disagree;
      level[m] = static_cast<std::uint16_t>(a);
      ++counts_[a];
    }
    offsets_.assign(edge_count_ + 2, 0);
    for (std::size_t a = 0; a <= edge_count_; ++a) offsets_[a + 1] = offsets_[a] + counts_[a];
    by_level_.resize(states);
    std::vector<std::uint64_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (std::uint64_t m = 0; m < states; ++m) by_level_[cursor[level[m]]++] = static_cast<std::uint32_t>(m);
  }

  [[nodiscard]] std::size_t vertex_count() const noexcept { return vertices_; }
  [[nodiscard]] std::size_t edge_count() const noexcept { return edge_count_; }
  /// counts()[a] = number of configurations with exactly a agreeing edges.
  [[nodiscard]] const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }

  /// Z(beta) = sum_a counts[a] exp(beta (1 + a)), shifted by the largest
  /// exponent. At beta = 0 this reduces to an exact integer sum, 2^V.
  [[nodiscard]] PartitionValue partition(double beta) const {
    double shift = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a <= edge_count_; ++a)
      if (counts_[a] > 0) shift = std::max(shift, beta * (1.0 + static_cast<double>(a)));
    double sum = 0.0;
    for (std::size_t a = 0; a <= edge_count_; ++a)
      if (counts_[a] > 0) sum += static_cast<double>(counts_[a]) * std::exp(beta * (1.0 + static_cast<double>(a)) - shift);
    return {shift + std::log(sum), std::exp(shift) * sum};
  }

  /// Exact draw from pi_beta(x) proportional to exp(-beta H(x)).
  [[nodiscard]] std::uint32_t sample_state(double beta, Rng& rng) const {
    thread_local std::vector<double> weights;
    weights.assign(edge_count_ + 1, 0.0);
    double shift = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a <= edge_count_; ++a)
      if (counts_[a] > 0) shift = std::max(shift, beta * static_cast<double>(a));
    double total = 0.0;
    for (std::size_t a = 0; a <= edge_count_; ++a) {
      if (counts_[a] > 0) total += static_cast<double>(counts_[a]) * std::exp(beta * static_cast<double>(a) - shift);
      weights[a] = total;
    }
    const double u = uniform_open01(rng) * total;
    const auto a = static_cast<std::size_t>(std::upper_bound(weights.begin(), weights.end(), u) - weights.begin());
    const std::size_t level = std::min(a, edge_count_);
    const std::uint64_t pick = uniform_index(rng, counts_[level]);
    return by_level_[offsets_[level] + pick];
  }

 private:
  std::size_t vertices_;
  std::size_t edge_count_;
  std::vector<std::uint64_t> counts_;
  std::vector<std::uint64_t> offsets_;
  std::vector<std::uint32_t> by_level_;
};

inline PartitionValue brute_force_Z(double beta, const LatticeGraph& g) { return IsingSpectrum(g).partition(beta); }

inline SpinConfig exact_gibbs_sample(double beta, const IsingSpectrum& spectrum, Rng& rng) {
  return SpinConfig::from_mask(spectrum.sample_state(beta, rng), spectrum.vertex_count());
}

inline SpinConfig exact_gibbs_sample(double beta, const LatticeGraph& g, Rng& rng) {
  return exact_gibbs_sample(beta, IsingSpectrum(g), rng);
}

/// beta with exp(beta (-H)) = Y, i.e. ln(Y) / (-H).
inline double aux_beta(double neg_h, double log_y) noexcept { return log_y / neg_h; }

/// Y ~ Uniform(0, exp(-beta_i H(x))) on the open interval, returned as ln Y.
inline double draw_log_y(double neg_h, double beta_i, Rng& rng) {
  return beta_i * neg_h + std::log(uniform_open01(rng));
}

/// The auxiliary-variable step: draw Y under the current slab height and
/// return the smallest beta whose slab still contains (x, Y).
inline double gibbs_tpa_step(const SpinConfig& x, const LatticeGraph& g, double beta_i, Rng& rng) {
  const double neg_h = -hamiltonian(x, g);
  return aux_beta(neg_h, draw_log_y(neg_h, beta_i, rng));
}

/// 1 + ln Z(beta) - V ln 2: mean sampler calls per run from beta down to 0.
inline double expected_run_cost(double beta, const IsingSpectrum& spectrum) {
  return 1.0 + spectrum.partition(beta).log_value - static_cast<double>(spectrum.vertex_count()) * std::log(2.0);
}

inline double expected_run_cost(double beta, const LatticeGraph& g) { return expected_run_cost(beta, IsingSpectrum(g)); }

/// A point of the auxiliary space: configuration and slab coordinate ln Y.
struct AuxPoint {
  SpinConfig x;
  double log_y = 0.0;
};

/// Ising model lifted to {(x, y) : 0 <= y <= exp(-beta H(x))}, whose measure
/// is Z(beta). Shell at the chosen inverse temperature, center at 0 where
/// the measure is 2^V.
class GibbsFamily {
 public:
  using point_type = AuxPoint;
  /// Caller-provided exact sampler for pi_beta, for graphs past the cap.
  using ExternalSampler = std::function<SpinConfig(double beta, Rng& rng)>;

  GibbsFamily(LatticeGraph graph, double beta_shell)
      : graph_(std::move(graph)), beta_shell_(beta_shell), spectrum_(std::make_shared<const IsingSpectrum>(graph_)) {
    check_shell();
  }

  GibbsFamily(LatticeGraph graph, double beta_shell, ExternalSampler sampler)
      : graph_(std::move(graph)), beta_shell_(beta_shell), external_(std::move(sampler)) {
    if (!external_) throw argument_error("GibbsFamily: empty external sampler");
    check_shell();
  }

  [[nodiscard]] double beta_shell() const noexcept { return beta_shell_; }
  [[nodiscard]] double beta_center() const noexcept { return 0.0; }
  [[nodiscard]] const LatticeGraph& graph() const noexcept { return graph_; }
  [[nodiscard]] bool exact() const noexcept { return spectrum_ != nullptr; }

  [[nodiscard]] const IsingSpectrum& spectrum() const {
    if (!spectrum_) throw unsupported_error("GibbsFamily: no enumeration oracle with an external sampler");
    return *spectrum_;
  }

  /// ln Z(beta); only available in exact-enumeration mode.
  [[nodiscard]] double log_measure(double beta) const { return spectrum().partition(beta).log_value; }

  [[nodiscard]] Draw<AuxPoint> draw(double beta, Rng& rng) const {
    AuxPoint p;
    p.x = spectrum_ ? exact_gibbs_sample(beta, *spectrum_, rng) : external_(beta, rng);
    const double neg_h = -hamiltonian(p.x, graph_);
    p.log_y = draw_log_y(neg_h, beta, rng);
    const double next = aux_beta(neg_h, p.log_y);
    return {std::move(p), next};
  }

 private:
  void check_shell() const {
    if (!(beta_shell_ >= 0.0)) throw argument_error("GibbsFamily: beta_shell must be nonnegative");
  }

  LatticeGraph graph_;
  double beta_shell_;
  std::shared_ptr<const IsingSpectrum> spectrum_;
  ExternalSampler external_;
};

}  // namespace tpa::ising
