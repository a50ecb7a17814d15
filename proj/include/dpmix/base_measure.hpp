#ifndef DPMIX_BASE_MEASURE_HPP
#define DPMIX_BASE_MEASURE_HPP

#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

#include "dpmix/rng.hpp"

namespace dpmix {

// The two base-measure families on (0, T]:
//   TruncatedGamma  : Gamma(a, rate gamma) truncated to [0, T].
//   InvShiftedGamma : theta with (1/theta - 1/T)^{-1} ~ Gamma(a, rate gamma),
//                     i.e. theta = uT/(u+T) for u ~ Gamma(a, rate gamma).
enum class BaseFamily { TruncatedGamma, InvShiftedGamma };

struct BaseMeasure {
  BaseFamily family;
  double shape_a;
  double rate_gamma;
  double horizon;

  BaseMeasure(BaseFamily f, double a, double gamma, double T)
      : family(f), shape_a(a), rate_gamma(gamma), horizon(T) {
    if (!(a > 1.0)) throw std::invalid_argument("BaseMeasure: shape a must be > 1");
    if (!(gamma > 0.0)) throw std::invalid_argument("BaseMeasure: rate gamma must be > 0");
    if (!(T > 0.0)) throw std::invalid_argument("BaseMeasure: horizon must be > 0");
  }
};

namespace detail {
// Bijection between theta in (0, T) and u in (0, inf) for the second family.
inline double theta_to_u(double theta, double T) { return theta * T / (T - theta); }
inline double u_to_theta(double u, double T) { return u * T / (u + T); }
}  // namespace detail

inline double density(const BaseMeasure& g, double theta) {
  if (!(theta > 0.0 && theta <= g.horizon))
    throw std::domain_error("base measure density: theta outside (0, T]");
  const double a = g.shape_a, gam = g.rate_gamma, T = g.horizon;
  if (g.family == BaseFamily::TruncatedGamma) {
    const double norm = boost::math::gamma_p(a, gam * T);
    const double logpdf =
        a * std::log(gam) + (a - 1.0) * std::log(theta) - gam * theta - std::lgamma(a);
    return std::exp(logpdf) / norm;
  }
  if (theta == T) return 0.0;  // u -> inf limit
  const double u = detail::theta_to_u(theta, T);
  const double logpdf = a * std::log(gam) + (a + 1.0) * std::log(u) - gam * u -
                        std::lgamma(a) - 2.0 * std::log(theta);
  return std::exp(logpdf);
}

inline double cdf(const BaseMeasure& g, double theta) {
  if (!(theta > 0.0 && theta <= g.horizon))
    throw std::domain_error("base measure cdf: theta outside (0, T]");
  const double a = g.shape_a, gam = g.rate_gamma, T = g.horizon;
  if (g.family == BaseFamily::TruncatedGamma)
    return boost::math::gamma_p(a, gam * theta) / boost::math::gamma_p(a, gam * T);
  if (theta == T) return 1.0;
  return boost::math::gamma_p(a, gam * detail::theta_to_u(theta, T));
}

inline double quantile(const BaseMeasure& g, double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::domain_error("base measure quantile: p outside [0, 1]");
  const double a = g.shape_a, gam = g.rate_gamma, T = g.horizon;
  if (p == 0.0) return 0.0;
  if (p == 1.0) return T;
  if (g.family == BaseFamily::TruncatedGamma) {
    const double norm = boost::math::gamma_p(a, gam * T);
    const double arg = p * norm;
    if (arg >= norm) return T;  // cdf saturated in double precision
    const double x = boost::math::gamma_p_inv(a, arg);
    return std::min(x / gam, T);
  }
  if (p >= 1.0 - 1e-16) return T;  // gamma_p_inv overflows at p = 1
  const double u = boost::math::gamma_p_inv(a, p) / gam;
  return detail::u_to_theta(u, T);
}

inline double sample(const BaseMeasure& g, Rng& rng) {
  if (g.family == BaseFamily::InvShiftedGamma) {
    const double u = rng.gamma(g.shape_a, g.rate_gamma);
    return detail::u_to_theta(u, g.horizon);
  }
  return quantile(g, rng.uniform_open());
}

// theta ~ G conditioned on theta >= lo, by inverse CDF in upper-tail space:
// the lower cdf saturates to 1 in double precision once lo gets anywhere near
// the horizon, while the complement q = Q(a, gamma u(lo)) stays representable
// down to the underflow threshold. Throws when the conditioning event has
// mass below 1e-300.
inline double sample_truncated_above(const BaseMeasure& g, double lo, Rng& rng) {
  if (!(lo >= 0.0 && lo <= g.horizon))
    throw std::domain_error("sample_truncated_above: lo outside [0, T]");
  const double a = g.shape_a, gam = g.rate_gamma, T = g.horizon;
  if (lo == 0.0) return sample(g, rng);

  if (g.family == BaseFamily::InvShiftedGamma) {
    if (lo >= T) return T;
    const double x0 = gam * detail::theta_to_u(lo, T);  // x = gamma u ~ Gamma(a, 1)
    double x;
    if (x0 > std::max(500.0, 2.0 * (a - 1.0))) {
      // deep tail: q underflows, but x | x >= x0 is exactly sampleable by
      // rejection with a shifted exponential of rate 1 - (a-1)/x0; the
      // envelope peaks at x0 and the acceptance rate tends to 1 as x0 grows
      const double rate = 1.0 - (a - 1.0) / x0;
      for (;;) {
        x = x0 + rng.exponential(rate);
        const double log_accept =
            (a - 1.0) * (std::log(x / x0) - (x - x0) / x0);
        if (std::log(rng.uniform_open()) < log_accept) break;
      }
    } else {
      const double q_lo = boost::math::gamma_q(a, x0);
      const double q = q_lo * rng.uniform_open();
      x = boost::math::gamma_q_inv(a, q);
    }
    return std::min(std::max(detail::u_to_theta(x / gam, T), lo), T);
  }

  const double q_T = boost::math::gamma_q(a, gam * T);
  const double q_lo = boost::math::gamma_q(a, gam * lo);
  const double band = q_lo - q_T;
  if (band < 1e-300)
    throw std::runtime_error("sample_truncated_above: truncation mass below 1e-300");
  const double q = q_T + band * rng.uniform_open();
  const double x = boost::math::gamma_q_inv(a, q) / gam;
  return std::min(std::max(x, lo), T);
}

// Location of the density maximum on (0, T). Both families are unimodal with
// vanishing density at the endpoints' extremes, so the window maximum of the
// density on [lo, T] is attained at the mode clamped into the window.
inline double density_mode(const BaseMeasure& g) {
  const double a = g.shape_a, gam = g.rate_gamma, T = g.horizon;
  if (g.family == BaseFamily::TruncatedGamma)
    return std::min((a - 1.0) / gam, T);
  // stationary point of log g in u: gam u^2 - (a + 1 - gam T) u - (a - 1) T = 0
  const double b = a + 1.0 - gam * T;
  const double u = (b + std::sqrt(b * b + 4.0 * gam * (a - 1.0) * T)) / (2.0 * gam);
  return detail::u_to_theta(u, T);
}

// Prior transport psi_{gamma,gamma'}: the quantile map G_to^{-1}(G_from(theta))
// sending G_from draws to G_to draws. Closed form
// T*g*theta / (g'(T-theta) + g*theta) for the second family. The first family
// uses G^{-1}(G(g theta) G(g'T) / G(gT)) / g' evaluated in complement space,
// since the regularized lower tail saturates to 1 in double precision well
// before theta reaches T for moderate rates.
inline double psi_transform(double theta, const BaseMeasure& from, const BaseMeasure& to) {
  if (from.family != to.family || from.shape_a != to.shape_a || from.horizon != to.horizon)
    throw std::invalid_argument("psi_transform: measures must share family, shape, horizon");
  if (!(theta > 0.0 && theta <= from.horizon))
    throw std::domain_error("psi_transform: theta outside (0, T]");
  const double T = from.horizon;
  if (from.rate_gamma == to.rate_gamma) return theta;
  if (from.family == BaseFamily::InvShiftedGamma) {
    if (theta == T) return T;
    const double num = T * from.rate_gamma * theta;
    const double den = to.rate_gamma * (T - theta) + from.rate_gamma * theta;
    return num / den;
  }
  const double a = from.shape_a;
  const double q1 = boost::math::gamma_q(a, from.rate_gamma * theta);
  const double q2 = boost::math::gamma_q(a, to.rate_gamma * T);
  const double q3 = boost::math::gamma_q(a, from.rate_gamma * T);
  // G(g theta) G(g'T) / G(gT) = 1 - q_target with all terms additive in the
  // upper tails (q1 >= q3, q2 >= 0), so no catastrophic cancellation
  const double q_target = (q1 - q3 + q2 - q1 * q2) / (1.0 - q3);
  if (q_target <= 0.0) return T;  // both tails below double underflow
  double x;
  if (q_target < 0.5)
    x = boost::math::gamma_q_inv(a, q_target);
  else
    x = boost::math::gamma_p_inv(a, 1.0 - q_target);
  return std::min(x / to.rate_gamma, T);
}

}  // namespace dpmix

#endif  // DPMIX_BASE_MEASURE_HPP
