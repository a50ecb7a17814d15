#include <catch2/catch_amalgamated.hpp>

#include "dpmix/base_measure.hpp"
#include "dpmix/calibration.hpp"
#include "dpmix/point_process.hpp"
#include "dpmix/rng.hpp"
#include "testutil.hpp"

using namespace dpmix;

TEST_CASE("psi limits") {
  CHECK(psi(1e-9) == Catch::Approx(4.0).margin(1e-4));
  CHECK(psi(1e9) == Catch::Approx(0.0).margin(1e-4));
  CHECK_THROWS_AS(psi(0.0), std::domain_error);
  CHECK_THROWS_AS(psi(-1.0), std::domain_error);
}

TEST_CASE("psi frozen values from the independent quadrature oracle") {
  CHECK(psi(1.0) == Catch::Approx(0.7435876488958237).epsilon(1e-9));
  CHECK(psi(0.6667) == Catch::Approx(0.9973054310449422).epsilon(1e-9));
  CHECK(psi(0.0323) == Catch::Approx(3.3186837473029973).epsilon(1e-9));
  CHECK(psi(0.4302) == Catch::Approx(1.3235412886925622).epsilon(1e-9));
}

TEST_CASE("psi agrees with a Monte Carlo oracle") {
  Rng rng(211);
  for (const double gamma : {0.05, 0.66, 3.0}) {
    const int n = 2000000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double u = rng.gamma(2.0, gamma);
      const double theta = detail::u_to_theta(u, 8.0);
      sum += 0.5 * theta;
      sum2 += 0.25 * theta * theta;
    }
    const double mc = sum / n;
    const double se = std::sqrt((sum2 / n - mc * mc) / n);
    CHECK(std::abs(psi(gamma) - mc) < 3.0 * se);
  }
}

TEST_CASE("psi is strictly decreasing on the table grid") {
  const PsiTable table;  // construction throws if monotonicity fails
  CHECK(table.grid().size() == 200);
  for (const auto& [gamma, value] : table.grid()) {
    CHECK(value > 0.0);
    CHECK(value < 4.0);
  }
}

TEST_CASE("psi_inverse round trips") {
  for (const double gamma : {1e-3, 0.0323, 0.43, 1.0, 12.0, 1e3}) {
    const double target = psi(gamma);
    CHECK(psi_inverse(target) == Catch::Approx(gamma).epsilon(1e-6));
  }
  const PsiTable table;
  for (const double gamma : {0.01, 0.5, 40.0})
    CHECK(table.inverse(psi(gamma)) == Catch::Approx(gamma).epsilon(1e-6));
}

TEST_CASE("psi_inverse matches the reference calibration constants") {
  CHECK(psi_inverse(e_theo(TruthId::Lambda01)) ==
        Catch::Approx(0.03233210521586468).margin(1e-5));
  CHECK(psi_inverse(e_theo(TruthId::Lambda03)) ==
        Catch::Approx(0.4301727968869033).margin(1e-5));
  // under lambda2 = exp(-0.4 t) the calibrated value is 0.1625 (frozen from
  // the oracle); the 0.6667 of the reference table corresponds to exp(-t)
  CHECK(psi_inverse(e_theo(TruthId::Lambda02)) ==
        Catch::Approx(0.1624517509073512).margin(1e-5));
}

TEST_CASE("psi_inverse rejects targets outside (0, T/2)") {
  CHECK_THROWS_AS(psi_inverse(0.0), CalibrationError);
  CHECK_THROWS_AS(psi_inverse(4.0), CalibrationError);
  CHECK_THROWS_AS(psi_inverse(5.0), CalibrationError);
}

TEST_CASE("gamma_hat inverts a single event at psi(gamma0)") {
  const double gamma0 = 1.0;
  const std::vector<double> events{psi(gamma0)};
  const auto gh = gamma_hat(events);
  CHECK(gh.value == Catch::Approx(gamma0).epsilon(1e-6));
  CHECK_FALSE(gh.clamped);
}

TEST_CASE("gamma_hat clamps boundary samples to a finite value") {
  const std::vector<double> high{3.9999999, 3.99999999};  // mean above T/2 - delta
  const auto gh = gamma_hat(high);
  CHECK(gh.clamped);
  CHECK(std::isfinite(gh.value));
  CHECK(gh.value > 0.0);
  CHECK_THROWS_AS(gamma_hat(std::vector<double>{}), CalibrationError);
}

TEST_CASE("gamma_hat on simulated data lands near the calibrated value") {
  // the estimator inverts the mean event time, so its spread is governed by
  // the sampling error of the mean; a 5-sigma band around the ideal value
  const NormalizedIntensity bar(TruthId::Lambda02);
  const auto s = simulate(bar, 500, 909090);
  const auto gh = gamma_hat(s.events);

  double sq = 0.0;
  for (double w : s.events) sq += (w - gh.mean_event) * (w - gh.mean_event);
  const double se = std::sqrt(sq / s.events.size() / s.events.size());
  const double lo_g = psi_inverse(e_theo(TruthId::Lambda02) + 5.0 * se);
  const double hi_g = psi_inverse(e_theo(TruthId::Lambda02) - 5.0 * se);
  CHECK(gh.value >= lo_g);
  CHECK(gh.value <= hi_g);
}

TEST_CASE("gamma_fixed scales the calibrated value") {
  const double base = psi_inverse(e_theo(TruthId::Lambda02));
  CHECK(gamma_fixed(1.0, TruthId::Lambda02) == Catch::Approx(base).epsilon(1e-9));
  CHECK(gamma_fixed(100.0, TruthId::Lambda02) ==
        Catch::Approx(100.0 * base).epsilon(1e-9));
  CHECK(gamma_fixed(0.01, TruthId::Lambda01) ==
        Catch::Approx(0.01 * 0.03233210521586468).margin(1e-6));
  CHECK_THROWS_AS(gamma_fixed(0.0, TruthId::Lambda01), std::invalid_argument);
}
