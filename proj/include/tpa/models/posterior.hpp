#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "../core.hpp"
#include "../errors.hpp"
#include "../family.hpp"

namespace tpa::posterior {

using Point = std::vector<double>;

/// Ball shape: the L1 (cross-polytope) ball, or the L-infinity box.
enum class Norm { l1, box };

/// ||y - c|| in the chosen norm: the smallest radius whose ball holds y.
inline double beta_of_point(std::span<const double> y, std::span<const double> c, Norm norm = Norm::l1) {
  if (y.size() != c.size()) throw argument_error("beta_of_point: dimension mismatch");
  double r = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = std::abs(y[i] - c[i]);
    r = norm == Norm::l1 ? r + d : std::max(r, d);
  }
  return r;
}

/// Volume of the radius-r ball in n dimensions: (2r)^n / n! for L1, (2r)^n for the box.
inline double ball_volume(std::size_t n, double r, Norm norm = Norm::l1) {
  const double box = std::pow(2.0 * r, static_cast<double>(n));
  return norm == Norm::l1 ? box / std::tgamma(static_cast<double>(n) + 1.0) : box;
}

/// Integrand f. The bundled kinds have exact restricted samplers and
/// closed-form ball measures; a custom density only supports center_estimate.
struct Density {
  enum class Kind { laplace, uniform, custom };
  Kind kind = Kind::laplace;
  std::function<double(std::span<const double> x)> custom;

  static Density laplace() { return {Kind::laplace, nullptr}; }
  static Density uniform() { return {Kind::uniform, nullptr}; }
  static Density from_function(std::function<double(std::span<const double>)> f) { return {Kind::custom, std::move(f)}; }

  static Density by_name(const std::string& name) {
    if (name == "laplace") return laplace();
    if (name == "uniform") return uniform();
    throw unsupported_error("no registered density named '" + name + "'");
  }

  [[nodiscard]] std::string name() const {
    switch (kind) {
      case Kind::laplace: return "laplace";
      case Kind::uniform: return "uniform";
      default: return "custom";
    }
  }
};

/// Nested balls A(beta) = {x : ||x - c|| <= beta} under the measure f(x) dx,
/// with shell radius R and center radius eps. The bundled laplace density
/// is f(x) = exp(-||x - c||_1).
class L1BallFamily {
 public:
  using point_type = Point;

  L1BallFamily(Point center, double eps, double radius, Density density = Density::laplace(), Norm norm = Norm::l1)
      : center_(std::move(center)), eps_(eps), radius_(radius), density_(std::move(density)), norm_(norm) {
    if (center_.empty()) throw argument_error("L1BallFamily: dimension must be positive");
    if (!(eps > 0.0)) throw argument_error("L1BallFamily: center radius must be positive");
    if (!(radius >= eps)) throw argument_error("L1BallFamily: shell radius must not be below the center radius");
    if (density_.kind == Density::Kind::custom && !density_.custom)
      throw argument_error("L1BallFamily: custom density without a function");
  }

  [[nodiscard]] std::size_t dimension() const noexcept { return center_.size(); }
  [[nodiscard]] const Point& center() const noexcept { return center_; }
  [[nodiscard]] double beta_shell() const noexcept { return radius_; }
  [[nodiscard]] double beta_center() const noexcept { return eps_; }
  [[nodiscard]] Norm norm() const noexcept { return norm_; }
  [[nodiscard]] const Density& density() const noexcept { return density_; }

  [[nodiscard]] double density_at(std::span<const double> x) const {
    switch (density_.kind) {
      case Density::Kind::laplace: return std::exp(-beta_of_point(x, center_, Norm::l1));
      case Density::Kind::uniform: return 1.0;
      default: return density_.custom(x);
    }
  }

  [[nodiscard]] bool contains(std::span<const double> y, double beta) const { return beta_of_point(y, center_, norm_) <= beta; }

  /// ln mu(A(beta)) in closed form.
  [[nodiscard]] double log_measure(double beta) const {
    const auto n = static_cast<double>(dimension());
    switch (density_.kind) {
      case Density::Kind::laplace:
        // L1: the radius is Gamma(n, 1) with total mass 2^n; box: product of n truncated Laplace masses.
        if (norm_ == Norm::l1) return n * std::log(2.0) + std::log(boost::math::gamma_p(n, beta));
        return n * std::log(-2.0 * std::expm1(-beta));
      case Density::Kind::uniform: return std::log(ball_volume(dimension(), beta, norm_));
      default: throw unsupported_error("log_measure: no closed form for a custom density");
    }
  }

  /// Mass of the shell's complement under the laplace density, i.e. how far
  /// the finite shell falls short of the whole space.
  [[nodiscard]] double truncation_error() const {
    if (density_.kind != Density::Kind::laplace) return 0.0;
    const auto n = static_cast<double>(dimension());
    if (norm_ == Norm::l1) return boost::math::gamma_q(n, radius_);
    return 1.0 - std::pow(-std::expm1(-radius_), n);
  }

  /// Exact draw from f restricted to the ball of radius beta.
  [[nodiscard]] Point sample_restricted(double beta, Rng& rng) const {
    if (!(beta > 0.0)) throw argument_error("sample_restricted: radius must be positive");
    const std::size_t n = dimension();
    Point y(n);
    if (norm_ == Norm::l1) {
      double r = 0.0;
      switch (density_.kind) {
        case Density::Kind::laplace: {
          const double u = uniform_open01(rng) * boost::math::gamma_p(static_cast<double>(n), beta);
          r = boost::math::gamma_p_inv(static_cast<double>(n), u);
          break;
        }
        case Density::Kind::uniform: r = beta * std::pow(uniform_open01(rng), 1.0 / static_cast<double>(n)); break;
        default: throw unsupported_error("sample_restricted: custom density has no registered sampler");
      }
      // Uniform direction on the unit L1 sphere: Dirichlet(1,...,1) magnitudes, random signs.
      double total = 0.0;
      for (auto& v : y) total += (v = standard_exponential(rng));
      for (std::size_t i = 0; i < n; ++i) {
        const double sign = (rng() >> 63) != 0 ? 1.0 : -1.0;
        y[i] = center_[i] + sign * r * (y[i] / total);
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        double m = 0.0;
        switch (density_.kind) {
          case Density::Kind::laplace: m = -std::log1p(uniform_open01(rng) * std::expm1(-beta)); break;
          case Density::Kind::uniform: m = beta * uniform_open01(rng); break;
          default: throw unsupported_error("sample_restricted: custom density has no registered sampler");
        }
        const double sign = (rng() >> 63) != 0 ? 1.0 : -1.0;
        y[i] = center_[i] + sign * m;
      }
    }
    return y;
  }

  [[nodiscard]] Draw<Point> draw(double beta, Rng& rng) const {
    Point y = sample_restricted(beta, rng);
    const double next = beta_of_point(y, center_, norm_);
    return {std::move(y), next};
  }

  /// Uniform point of the center-sized ball, independent of the density.
  [[nodiscard]] Point uniform_in_ball(double r, Rng& rng) const {
    L1BallFamily flat(center_, r, r, Density::uniform(), norm_);
    return flat.sample_restricted(r, rng);
  }

 private:
  Point center_;
  double eps_;
  double radius_;
  Density density_;
  Norm norm_;
};

struct CenterEstimate {
  double value = 0.0;  // Vol(B_eps) * mean f(X_i)
  std::uint64_t samples = 0;
  double std_error_bound = 0.0;  // value / sqrt(N)
  std::uint64_t bound_violations = 0;  // draws outside M/2 <= f <= M
};

/// Mean-value estimate of Z(eps) = integral of f over the center ball.
inline CenterEstimate center_estimate(const L1BallFamily& family, std::uint64_t samples, Rng& rng,
                                      std::optional<double> m_bound = std::nullopt) {
  if (samples == 0) throw argument_error("center_estimate: sample count must be positive");
  const double eps = family.beta_center();
  CenterEstimate e;
  e.samples = samples;
  double sum = 0.0;
  for (std::uint64_t i = 0; i < samples; ++i) {
    const Point x = family.uniform_in_ball(eps, rng);
    const double f = family.density_at(x);
    if (m_bound && (f < 0.5 * *m_bound || f > *m_bound)) ++e.bound_violations;
    sum += f;
  }
  e.value = ball_volume(family.dimension(), eps, family.norm()) * sum / static_cast<double>(samples);
  e.std_error_bound = e.value / std::sqrt(static_cast<double>(samples));
  return e;
}

struct EvidenceEstimate {
  double evidence = 0.0;  // exp(N/k) * Z_hat(eps)
  double ratio = 1.0;     // exp(N/k), estimating Z(R) / Z(eps)
  LogRatioEstimate log_ratio;
  CenterEstimate center;
  double truncation_error = 0.0;
};

/// TPA from the shell to the center ball, then the center estimate.
inline EvidenceEstimate evidence_estimate(const L1BallFamily& family, std::uint64_t k_runs, std::uint64_t n_center,
                                          const Streams& streams, const RunOptions& opts = {},
                                          std::optional<double> m_bound = std::nullopt) {
  EvidenceEstimate r;
  const auto pool = sample_pool(family, streams, k_runs, opts);
  r.log_ratio = estimate_log_ratio(pool);
  r.ratio = std::exp(r.log_ratio.estimate);
  Rng rng = streams.with_phase(phase::center).make(0);
  r.center = center_estimate(family, n_center, rng, m_bound);
  r.evidence = r.ratio * r.center.value;
  r.truncation_error = family.truncation_error();
  return r;
}

}  // namespace tpa::posterior
