#pragma once

// Cumulative pulse area F(tau) = int_{-inf}^{tau} f dt of a sampled
// nonnegative integrand and the inversion int_xi^tau f dt = q x.

#include <optional>
#include <vector>

#include "pentapulse/core_model.hpp"

namespace pentapulse {

class AreaIntegral {
 public:
  /// Samples of f >= 0 on strictly increasing nodes; f is taken piecewise
  /// linear between nodes and zero outside.
  AreaIntegral(std::vector<double> tau, std::vector<double> f);

  /// f = envelope_2^2 + envelope_3^2 of the boundary on `refine` x the grid nodes.
  static AreaIntegral omega0_squared(const PulseSet& boundary, const Grid& grid, int refine = 4);

  double cumulative(double tau) const;
  double total() const { return cum_.back(); }
  double value(double tau) const;
  const std::vector<double>& nodes() const { return tau_; }

  /// Root xi of int_xi^tau f = qx; nullopt when qx exceeds int_{-inf}^tau f.
  std::optional<double> solve(double qx, double tau) const;
  /// The tau -> +inf limit: int_xi^inf f = qx.
  std::optional<double> solve_asymptotic(double qx) const { return solve(qx, tau_.back()); }

 private:
  // Smallest xi with F(xi) = target, target in [0, total].
  double invert(double target) const;

  std::vector<double> tau_;
  std::vector<double> f_;
  std::vector<double> cum_;
};

/// xi(x, tau) on the grid: result[j][k], NaN where no root exists.
std::vector<std::vector<double>> xi_map(const AreaIntegral& area, double q,
                                        const std::vector<double>& x,
                                        const std::vector<double>& tau);

}  // namespace pentapulse
