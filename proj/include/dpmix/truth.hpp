#ifndef DPMIX_TRUTH_HPP
#define DPMIX_TRUTH_HPP

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace dpmix {

// Benchmark truth intensities on [0, 8]: a two-level step, an exponential
// decay, and an arccos-of-normal-cdf profile continued linearly past t = 3.
enum class TruthId { Lambda01, Lambda02, Lambda03 };

inline const char* truth_name(TruthId id) {
  switch (id) {
    case TruthId::Lambda01: return "lambda1";
    case TruthId::Lambda02: return "lambda2";
    case TruthId::Lambda03: return "lambda3";
  }
  throw std::logic_error("truth_name: bad id");
}

inline TruthId truth_from_name(const std::string& s) {
  if (s == "lambda1") return TruthId::Lambda01;
  if (s == "lambda2") return TruthId::Lambda02;
  if (s == "lambda3") return TruthId::Lambda03;
  throw std::invalid_argument("unknown truth id: " + s);
}

inline double standard_normal_cdf(double x) {
  return 0.5 * std::erfc(-x / 1.4142135623730950488);
}

namespace detail {
// arccos(Phi(3)), the junction value of Lambda03 at t = 3.
inline double lambda3_junction() {
  static const double c = std::acos(standard_normal_cdf(3.0));
  return c;
}
}  // namespace detail

struct TruthIntensity {
  TruthId id;
  double horizon = 8.0;

  double operator()(double t) const {
    if (!(t >= 0.0 && t <= horizon))
      throw std::domain_error("truth intensity: t outside [0, T]");
    switch (id) {
      case TruthId::Lambda01:
        return t < 3.0 ? 4.0 : 2.0;
      case TruthId::Lambda02:
        return std::exp(-0.4 * t);
      case TruthId::Lambda03: {
        if (t <= 3.0) return std::acos(standard_normal_cdf(t));
        const double c = detail::lambda3_junction();
        return -((1.0 / 6.0) * c * t - 1.5 * c);
      }
    }
    throw std::logic_error("truth intensity: bad id");
  }
};

inline double eval_truth(TruthId id, double t) { return TruthIntensity{id}(t); }

// Total mass by adaptive quadrature, split at the t = 3 kink.
inline double mass_by_quadrature(TruthId id, double tol = 1e-10) {
  using boost::math::quadrature::gauss_kronrod;
  TruthIntensity lam{id};
  const auto f = [&](double t) { return lam(t); };
  const double m1 = gauss_kronrod<double, 61>::integrate(f, 0.0, 3.0, 15, tol);
  const double m2 = gauss_kronrod<double, 61>::integrate(f, 3.0, lam.horizon, 15, tol);
  return m1 + m2;
}

// Closed form where available, quadrature otherwise.
inline double mass(TruthId id) {
  switch (id) {
    case TruthId::Lambda01:
      return 22.0;  // 4*3 + 2*5
    case TruthId::Lambda02:
      return (1.0 - std::exp(-3.2)) / 0.4;
    case TruthId::Lambda03: {
      using boost::math::quadrature::gauss_kronrod;
      const auto f = [](double t) { return std::acos(standard_normal_cdf(t)); };
      const double head = gauss_kronrod<double, 61>::integrate(f, 0.0, 3.0, 15, 1e-12);
      // linear branch integrates to c * 35/12 on [3, 8]
      return head + detail::lambda3_junction() * 35.0 / 12.0;
    }
  }
  throw std::logic_error("mass: bad id");
}

// First moment of the normalized intensity, E_theo = int t lambda_bar(t) dt.
inline double e_theo(TruthId id) {
  switch (id) {
    case TruthId::Lambda01:
      return 73.0 / 22.0;  // (4*9/2 + 2*55/2) / 22
    case TruthId::Lambda02: {
      const double e = std::exp(-3.2);
      return 2.5 * (1.0 - e * (1.0 + 3.2)) / (1.0 - e);
    }
    case TruthId::Lambda03: {
      using boost::math::quadrature::gauss_kronrod;
      const auto f = [](double t) { return t * std::acos(standard_normal_cdf(t)); };
      const double head = gauss_kronrod<double, 61>::integrate(f, 0.0, 3.0, 15, 1e-12);
      // int_3^8 t (3/2 - t/6) dt = 515/36
      const double tail = detail::lambda3_junction() * 515.0 / 36.0;
      return (head + tail) / mass(TruthId::Lambda03);
    }
  }
  throw std::logic_error("e_theo: bad id");
}

// lambda = M * lambda_bar with lambda_bar a probability density on [0, T].
struct NormalizedIntensity {
  TruthIntensity base;
  double total_mass;

  explicit NormalizedIntensity(TruthId id)
      : base{id}, total_mass(dpmix::mass(id)) {}

  double horizon() const { return base.horizon; }
  double eval_bar(double t) const { return base(t) / total_mass; }
};

}  // namespace dpmix

#endif  // DPMIX_TRUTH_HPP
