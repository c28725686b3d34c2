#pragma once

#include <cmath>

#include "../errors.hpp"
#include "../family.hpp"

namespace tpa {

/// A(beta) = [0, e^beta] under Lebesgue measure, so ln mu(A(beta)) = beta and
/// the log-ratio between shell and center is simply their difference.
/// The reference family for every oracle-backed statistical check.
class ExpInterval {
 public:
  using point_type = double;

  ExpInterval(double beta_shell, double beta_center) : shell_(beta_shell), center_(beta_center) {
    if (!(beta_center <= beta_shell)) throw argument_error("ExpInterval: beta_center must not exceed beta_shell");
  }

  [[nodiscard]] double beta_shell() const noexcept { return shell_; }
  [[nodiscard]] double beta_center() const noexcept { return center_; }
  [[nodiscard]] double log_measure(double beta) const noexcept { return beta; }

  // Y = U e^beta, so inf{b : Y <= e^b} = beta + ln U.
  [[nodiscard]] Draw<double> draw(double beta, Rng& rng) const {
    const double log_u = std::log(uniform_open01(rng));
    return {std::exp(beta + log_u), beta + log_u};
  }

 private:
  double shell_;
  double center_;
};

}  // namespace tpa
