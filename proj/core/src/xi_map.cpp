#include "pentapulse/xi_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pentapulse/error.hpp"

namespace pentapulse {

AreaIntegral::AreaIntegral(std::vector<double> tau, std::vector<double> f)
    : tau_(std::move(tau)), f_(std::move(f)) {
  if (tau_.size() < 2 || tau_.size() != f_.size()) {
    throw InvalidInput("AreaIntegral needs at least two matching samples");
  }
  cum_.assign(tau_.size(), 0.0);
  for (std::size_t k = 1; k < tau_.size(); ++k) {
    if (!(tau_[k] > tau_[k - 1])) throw InvalidInput("AreaIntegral nodes must increase");
    if (!(f_[k] >= 0.0) || !(f_[k - 1] >= 0.0)) throw InvalidInput("AreaIntegral integrand must be >= 0");
    cum_[k] = cum_[k - 1] + 0.5 * (tau_[k] - tau_[k - 1]) * (f_[k] + f_[k - 1]);
  }
}

AreaIntegral AreaIntegral::omega0_squared(const PulseSet& boundary, const Grid& grid, int refine) {
  const std::size_t n = (grid.n_tau - 1) * static_cast<std::size_t>(std::max(1, refine)) + 1;
  const double h = (grid.tau_max - grid.tau_min) / static_cast<double>(n - 1);
  std::vector<double> t(n), f(n);
  for (std::size_t k = 0; k < n; ++k) {
    t[k] = grid.tau_min + h * static_cast<double>(k);
    const double a = boundary.envelopes[1](t[k]);
    const double b = boundary.envelopes[2](t[k]);
    f[k] = a * a + b * b;
  }
  return AreaIntegral(std::move(t), std::move(f));
}

double AreaIntegral::value(double tau) const {
  if (tau <= tau_.front() || tau >= tau_.back()) {
    if (tau == tau_.front()) return f_.front();
    if (tau == tau_.back()) return f_.back();
    return 0.0;
  }
  const auto k = static_cast<std::size_t>(std::upper_bound(tau_.begin(), tau_.end(), tau) - tau_.begin()) - 1;
  const double w = (tau - tau_[k]) / (tau_[k + 1] - tau_[k]);
  return f_[k] + w * (f_[k + 1] - f_[k]);
}

double AreaIntegral::cumulative(double tau) const {
  if (tau <= tau_.front()) return 0.0;
  if (tau >= tau_.back()) return cum_.back();
  const auto k = static_cast<std::size_t>(std::upper_bound(tau_.begin(), tau_.end(), tau) - tau_.begin()) - 1;
  const double h = tau_[k + 1] - tau_[k];
  const double s = tau - tau_[k];
  return cum_[k] + f_[k] * s + 0.5 * (f_[k + 1] - f_[k]) * s * s / h;
}

double AreaIntegral::invert(double target) const {
  if (target <= 0.0) {
    // Leading zero plateau: the root is the last node where F is still zero.
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), 0.0);
    return tau_[static_cast<std::size_t>(it - cum_.begin()) - 1];
  }
  const auto it = std::lower_bound(cum_.begin(), cum_.end(), target);
  if (it == cum_.end()) return tau_.back();
  const auto hi = static_cast<std::size_t>(it - cum_.begin());
  if (hi == 0) return tau_.front();
  const std::size_t k = hi - 1;
  // F(tau_k + s) = cum_k + f_k s + a s^2 with a = (f_{k+1} - f_k) / (2h).
  const double h = tau_[k + 1] - tau_[k];
  const double a = 0.5 * (f_[k + 1] - f_[k]) / h;
  const double r = target - cum_[k];
  const double disc = std::max(0.0, f_[k] * f_[k] + 4.0 * a * r);
  const double den = f_[k] + std::sqrt(disc);
  const double s = den > 0.0 ? 2.0 * r / den : h;
  return tau_[k] + std::clamp(s, 0.0, h);
}

std::optional<double> AreaIntegral::solve(double qx, double tau) const {
  if (!(qx >= 0.0)) throw InvalidInput("xi_solve: qx must be >= 0");
  if (qx == 0.0) return tau;
  const double upper = cumulative(tau);
  const double target = upper - qx;
  if (target < -1e-12 * std::max(1.0, upper)) return std::nullopt;
  if (target <= 0.0) {
    // All area before tau is consumed: xi sits at the start of the support.
    return invert(0.0);
  }
  return std::min(invert(target), tau);
}

std::vector<std::vector<double>> xi_map(const AreaIntegral& area, double q,
                                        const std::vector<double>& x,
                                        const std::vector<double>& tau) {
  std::vector<std::vector<double>> out(x.size(), std::vector<double>(tau.size()));
  for (std::size_t j = 0; j < x.size(); ++j) {
    for (std::size_t k = 0; k < tau.size(); ++k) {
      const auto xi = area.solve(q * x[j], tau[k]);
      out[j][k] = xi ? *xi : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return out;
}

}  // namespace pentapulse
