#pragma once

#include <concepts>

#include "rng.hpp"

namespace tpa {

/// One conditional draw: a point of A(beta) and the smallest parameter
/// whose set still contains it.
template <typename Point>
struct Draw {
  Point point;
  double beta_next;
};

/// A monotone family of sets A(beta) with shell A(beta_shell) and center
/// A(beta_center). draw(beta, rng) samples the measure restricted to A(beta)
/// and reports inf{b : point in A(b)}. Implementations are shared read-only
/// across threads, so draw() must be const and keep no mutable state.
template <typename F>
concept NestedFamily = requires(const F& f, Rng& rng, double beta) {
  typename F::point_type;
  { f.beta_shell() } -> std::convertible_to<double>;
  { f.beta_center() } -> std::convertible_to<double>;
  { f.draw(beta, rng) } -> std::same_as<Draw<typename F::point_type>>;
};

/// A family with a closed-form or enumerated t(beta) = ln mu(A(beta)).
template <typename F>
concept LogMeasureOracle = requires(const F& f, double beta) {
  { f.log_measure(beta) } -> std::convertible_to<double>;
};

/// ln(mu(shell) / mu(center)) for families that know their own measure.
template <typename F>
  requires NestedFamily<F> && LogMeasureOracle<F>
double true_log_ratio(const F& f) {
  return f.log_measure(f.beta_shell()) - f.log_measure(f.beta_center());
}

}  // namespace tpa
