#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include <tpa/tpa.hpp>

namespace tpa::cli {

/// Everything an experiment needs, filled from the config file and flags.
struct ExperimentConfig {
  std::string family = "expinterval";

  // expinterval
  double shell = 0.0;
  double center = -1.0;

  // ising
  std::size_t width = 4;
  std::size_t height = 4;
  bool wrap = false;
  std::string edges_file;
  double beta = 1.0;

  // l1ball
  std::size_t dim = 1;
  std::vector<double> center_point;
  double eps = 0.1;
  double radius = 2.0;
  std::string density = "laplace";
  std::string norm = "l1";
  std::optional<double> m_bound;

  std::optional<std::uint64_t> seed;
  std::uint64_t k = 100;
  std::optional<double> epsilon;
  std::optional<double> delta;
  double alpha = 0.05;
  unsigned workers = 0;
  std::uint64_t max_steps = 1'000'000;
  std::string out_dir = ".";

  std::optional<std::int64_t> rung_k;
  std::optional<double> lambda_upper;
  std::uint64_t n_center = 10'000;
  std::optional<double> observed_h;
  std::optional<double> b_max;
  double quad_step = 1e-3;
  std::uint64_t reps = 200;
  bool small_ratio = false;
};

/// Raised for configuration problems; maps to exit code 2.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using AnyFamily = std::variant<ExpInterval, ising::GibbsFamily, posterior::L1BallFamily>;

inline ising::LatticeGraph make_graph(const ExperimentConfig& c) {
  if (!c.edges_file.empty()) {
    std::ifstream in(c.edges_file);
    if (!in) throw config_error("cannot open edge list '" + c.edges_file + "'");
    return ising::LatticeGraph::read_edge_list(in);
  }
  return ising::LatticeGraph::lattice(c.width, c.height, c.wrap);
}

inline AnyFamily make_family(const ExperimentConfig& c) {
  if (c.family == "expinterval") return ExpInterval(c.shell, c.center);
  if (c.family == "ising") return ising::GibbsFamily(make_graph(c), c.beta);
  if (c.family == "l1ball") {
    std::vector<double> center = c.center_point.empty() ? std::vector<double>(c.dim, 0.0) : c.center_point;
    if (center.size() != c.dim) throw config_error("--center-point has " + std::to_string(center.size()) + " coordinates, --dim is " + std::to_string(c.dim));
    if (c.norm != "l1" && c.norm != "box") throw config_error("--norm must be l1 or box");
    return posterior::L1BallFamily(std::move(center), c.eps, c.radius, posterior::Density::by_name(c.density),
                                   c.norm == "l1" ? posterior::Norm::l1 : posterior::Norm::box);
  }
  throw config_error("unknown family '" + c.family + "' (expected expinterval, ising or l1ball)");
}

inline nlohmann::json describe(const AnyFamily& f) {
  return std::visit(
      [](const auto& fam) -> nlohmann::json {
        using F = std::decay_t<decltype(fam)>;
        nlohmann::json j = {{"beta_shell", fam.beta_shell()}, {"beta_center", fam.beta_center()}};
        if constexpr (std::is_same_v<F, ExpInterval>) {
          j["name"] = "expinterval";
        } else if constexpr (std::is_same_v<F, ising::GibbsFamily>) {
          j["name"] = "ising";
          j["vertices"] = fam.graph().vertex_count();
          j["edges"] = fam.graph().edges().size();
        } else {
          j["name"] = "l1ball";
          j["dimension"] = fam.dimension();
          j["center"] = fam.center();
          j["density"] = fam.density().name();
          j["norm"] = fam.norm() == posterior::Norm::l1 ? "l1" : "box";
        }
        return j;
      },
      f);
}

/// ln mu(B'), used to anchor omnithermal curves.
inline double log_center_measure(const AnyFamily& f) {
  return std::visit(
      [](const auto& fam) -> double {
        using F = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<F, ising::GibbsFamily>)
          return static_cast<double>(fam.graph().vertex_count()) * std::log(2.0);
        else
          return fam.log_measure(fam.beta_center());
      },
      f);
}

}  // namespace tpa::cli
