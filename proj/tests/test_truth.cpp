#include <catch2/catch_amalgamated.hpp>

#include "dpmix/truth.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

using namespace dpmix;

TEST_CASE("step intensity values") {
  CHECK(eval_truth(TruthId::Lambda01, 3.5) == 2.0);
  CHECK(eval_truth(TruthId::Lambda01, 0.0) == 4.0);
  CHECK(eval_truth(TruthId::Lambda01, 2.999999) == 4.0);
  CHECK(eval_truth(TruthId::Lambda01, 3.0) == 2.0);
  CHECK(eval_truth(TruthId::Lambda02, 0.0) == 1.0);
  CHECK(eval_truth(TruthId::Lambda02, 5.0) == Catch::Approx(std::exp(-2.0)));
}

TEST_CASE("domain errors outside [0, T]") {
  CHECK_THROWS_AS(eval_truth(TruthId::Lambda01, -0.1), std::domain_error);
  CHECK_THROWS_AS(eval_truth(TruthId::Lambda02, 8.0001), std::domain_error);
}

TEST_CASE("masses: closed forms and quadrature cross-check") {
  CHECK(mass(TruthId::Lambda01) == 22.0);
  CHECK(mass(TruthId::Lambda02) == Catch::Approx(2.3980944900540844).epsilon(1e-12));
  // frozen regression constant, computed by adaptive quadrature at 1e-10
  CHECK(mass(TruthId::Lambda03) == Catch::Approx(1.4540680306113922).epsilon(1e-8));
  for (TruthId id : {TruthId::Lambda01, TruthId::Lambda02, TruthId::Lambda03})
    CHECK(mass_by_quadrature(id) == Catch::Approx(mass(id)).epsilon(1e-8));
}

TEST_CASE("first moments of the normalized intensities") {
  CHECK(e_theo(TruthId::Lambda01) == Catch::Approx(73.0 / 22.0).epsilon(1e-12));
  CHECK(e_theo(TruthId::Lambda02) == Catch::Approx(2.160045055376889).epsilon(1e-10));
  // frozen from the independent quadrature oracle
  CHECK(e_theo(TruthId::Lambda03) == Catch::Approx(1.3235917396357877).epsilon(1e-8));
  for (TruthId id : {TruthId::Lambda01, TruthId::Lambda02, TruthId::Lambda03}) {
    CHECK(e_theo(id) > 0.0);
    CHECK(e_theo(id) < 8.0);
  }
}

TEST_CASE("normalized intensities integrate to one") {
  using boost::math::quadrature::gauss_kronrod;
  for (TruthId id : {TruthId::Lambda01, TruthId::Lambda02, TruthId::Lambda03}) {
    const NormalizedIntensity bar(id);
    const auto f = [&](double t) { return bar.eval_bar(t); };
    const double total = gauss_kronrod<double, 61>::integrate(f, 0.0, 3.0, 15, 1e-12) +
                         gauss_kronrod<double, 61>::integrate(f, 3.0, 8.0, 15, 1e-12);
    CHECK(total == Catch::Approx(1.0).margin(1e-8));
  }
}

TEST_CASE("third intensity is continuous at the junction and non-increasing") {
  const double left = eval_truth(TruthId::Lambda03, 3.0);
  const double right = eval_truth(TruthId::Lambda03, std::nextafter(3.0, 4.0));
  CHECK(std::abs(left - right) < 1e-9);

  double prev = eval_truth(TruthId::Lambda03, 0.0);
  for (int i = 1; i <= 800; ++i) {
    const double v = eval_truth(TruthId::Lambda03, 8.0 * i / 800.0);
    CHECK(v <= prev + 1e-12);
    CHECK(v >= 0.0);
    prev = v;
  }
  // linear branch: value arccos(Phi(3)) at 3, arccos(Phi(3))/6 at 8
  const double c = std::acos(standard_normal_cdf(3.0));
  CHECK(eval_truth(TruthId::Lambda03, 8.0) == Catch::Approx(c / 6.0).epsilon(1e-12));
}

TEST_CASE("standard normal cdf is accurate") {
  CHECK(standard_normal_cdf(0.0) == Catch::Approx(0.5).margin(1e-15));
  CHECK(standard_normal_cdf(1.0) == Catch::Approx(0.841344746068542948585).margin(1e-12));
  CHECK(standard_normal_cdf(3.0) == Catch::Approx(0.998650101968369905473).margin(1e-12));
  CHECK(standard_normal_cdf(-3.0) == Catch::Approx(1.0 - 0.998650101968369905473).margin(1e-12));
}
