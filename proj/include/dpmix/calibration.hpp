#ifndef DPMIX_CALIBRATION_HPP
#define DPMIX_CALIBRATION_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "dpmix/truth.hpp"

namespace dpmix {

struct CalibrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Psi(gamma) = E[theta]/2 under the inverse-shifted-gamma base measure:
// with u ~ Gamma(a, rate gamma) and theta = uT/(u+T),
//   Psi(gamma) = (T/2) E[ x / (x + gamma T) ],  x = gamma u ~ Gamma(a, 1).
// The x-form integrand is smooth on (0, inf) and avoids the endpoint
// singularity of the nu-form at nu = 1/T.
inline double psi(double gamma, double a = 2.0, double T = 8.0) {
  if (!(gamma > 0.0)) throw std::domain_error("psi: gamma must be > 0");
  const double lg = std::lgamma(a);
  const auto f = [&](double x) {
    return 0.5 * T * x / (x + gamma * T) *
           std::exp((a - 1.0) * std::log(x) - x - lg);
  };
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate(f, 1e-12);
}

// Bisection on the strictly decreasing map gamma -> Psi(gamma), bracket
// auto-expanded geometrically from [1e-6, 1e6].
inline double psi_inverse(double target, double a = 2.0, double T = 8.0,
                          double tol = 1e-9) {
  if (!(target > 0.0 && target < 0.5 * T))
    throw CalibrationError("psi_inverse: mean event time incompatible with base measure");
  double lo = 1e-6, hi = 1e6;
  while (psi(lo, a, T) < target) {
    lo *= 1e-2;
    if (lo < 1e-290)
      throw CalibrationError("psi_inverse: bracket expansion failed (target too close to T/2)");
  }
  while (psi(hi, a, T) > target) {
    hi *= 1e2;
    if (hi > 1e290) throw CalibrationError("psi_inverse: bracket expansion failed");
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = std::sqrt(lo * hi);  // geometric midpoint, gamma spans decades
    const double val = psi(mid, a, T);
    if (std::abs(val - target) < tol) return mid;
    (val > target ? lo : hi) = mid;
    if (hi - lo < 1e-15 * mid) return mid;
  }
  return std::sqrt(lo * hi);
}

// Cached monotone map gamma -> Psi(gamma) on a log-spaced grid; speeds up
// repeated inversions and carries the monotonicity invariant.
class PsiTable {
 public:
  PsiTable(double a = 2.0, double T = 8.0, int n_points = 200,
           double lo = 1e-6, double hi = 1e6, double quad_tol = 1e-10)
      : a_(a), T_(T), quad_tol_(quad_tol) {
    grid_.reserve(n_points);
    const double step = std::log(hi / lo) / (n_points - 1);
    for (int i = 0; i < n_points; ++i) {
      const double g = lo * std::exp(step * i);
      grid_.emplace_back(g, psi(g, a, T));
    }
    for (std::size_t i = 1; i < grid_.size(); ++i)
      if (!(grid_[i].second < grid_[i - 1].second))
        throw std::logic_error("PsiTable: map not strictly decreasing");
  }

  double shape() const { return a_; }
  double horizon() const { return T_; }
  const std::vector<std::pair<double, double>>& grid() const { return grid_; }

  double value(double gamma) const { return psi(gamma, a_, T_); }

  double inverse(double target, double tol = 1e-9) const {
    if (!(target > 0.0 && target < 0.5 * T_))
      throw CalibrationError("psi_inverse: mean event time incompatible with base measure");
    // bracket from the table when possible, otherwise fall back to expansion
    auto it = std::lower_bound(
        grid_.begin(), grid_.end(), target,
        [](const std::pair<double, double>& p, double t) { return p.second > t; });
    if (it == grid_.begin() || it == grid_.end())
      return psi_inverse(target, a_, T_, tol);
    double lo = (it - 1)->first, hi = it->first;
    for (int i = 0; i < 400; ++i) {
      const double mid = std::sqrt(lo * hi);
      const double val = psi(mid, a_, T_);
      if (std::abs(val - target) < tol) return mid;
      (val > target ? lo : hi) = mid;
      if (hi - lo < 1e-15 * mid) return mid;
    }
    return std::sqrt(lo * hi);
  }

 private:
  double a_, T_, quad_tol_;
  std::vector<std::pair<double, double>> grid_;
};

struct GammaHat {
  double value;
  double mean_event;
  bool clamped;
};

// Empirical estimator gamma_hat = Psi^{-1}(mean event time), with the mean
// clamped into (delta, T/2 - delta), delta = 1e-6 T, so boundary samples
// still yield a finite rate.
template <class Events>
GammaHat gamma_hat(const Events& events, double a = 2.0, double T = 8.0) {
  if (events.empty()) throw CalibrationError("gamma_hat: empty sample");
  double sum = 0.0;
  for (double w : events) sum += w;
  const double mean = sum / static_cast<double>(events.size());
  const double delta = 1e-6 * T;
  const double clamped = std::clamp(mean, delta, 0.5 * T - delta);
  return {psi_inverse(clamped, a, T), mean, clamped != mean};
}

// Perturbed fixed rate gamma_0 = rho * Psi^{-1}(E_theo(truth)).
inline double gamma_fixed(double rho, TruthId truth, double a = 2.0, double T = 8.0) {
  if (!(rho > 0.0)) throw std::invalid_argument("gamma_fixed: rho must be > 0");
  return rho * psi_inverse(e_theo(truth), a, T);
}

}  // namespace dpmix

#endif  // DPMIX_CALIBRATION_HPP
