#include <catch2/catch_amalgamated.hpp>

#include "dpmix/rng.hpp"
#include "testutil.hpp"

#include <boost/math/special_functions/gamma.hpp>

using dpmix::Rng;

TEST_CASE("streams are deterministic and tag-separated") {
  Rng a = Rng::stream(42, {1, 2});
  Rng b = Rng::stream(42, {1, 2});
  Rng c = Rng::stream(42, {1, 3});
  bool identical = true, different = false;
  for (int i = 0; i < 64; ++i) {
    const auto xa = a.bits(), xb = b.bits(), xc = c.bits();
    identical = identical && (xa == xb);
    different = different || (xa != xc);
  }
  CHECK(identical);
  CHECK(different);
}

TEST_CASE("uniform stays in [0,1) and uniform_open in (0,1)") {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    const double v = rng.uniform_open();
    REQUIRE(v > 0.0);
    REQUIRE(v < 1.0);
  }
}

TEST_CASE("gamma variates match their first two moments") {
  Rng rng(11);
  for (const auto& [shape, rate] : {std::pair{0.1, 0.1}, {2.0, 0.5}, {17.3, 3.0}}) {
    const int n = 200000;
    std::vector<double> x(n);
    for (auto& v : x) v = rng.gamma(shape, rate);
    const double m = testutil::mean(x);
    const double var = testutil::variance(x);
    const double se_mean = std::sqrt(shape / (rate * rate) / n);
    CHECK(std::abs(m - shape / rate) < 5.0 * se_mean);
    CHECK(std::abs(var - shape / (rate * rate)) < 0.05 * shape / (rate * rate));
  }
}

TEST_CASE("gamma sample distribution passes KS against the cdf") {
  Rng rng(13);
  for (const double shape : {0.5, 1.0, 4.2}) {
    std::vector<double> x(50000);
    for (auto& v : x) v = rng.gamma(shape, 2.0);
    const auto ks = testutil::ks_test(
        x, [&](double t) { return boost::math::gamma_p(shape, 2.0 * t); });
    CHECK(ks.p_value > 0.001);
  }
}

TEST_CASE("beta(1, A) uses the inverse-cdf path correctly") {
  Rng rng(17);
  const double A = 10.0;
  std::vector<double> x(100000);
  for (auto& v : x) v = rng.beta(1.0, A);
  CHECK(std::abs(testutil::mean(x) - 1.0 / (1.0 + A)) < 0.003);
  const auto ks = testutil::ks_test(
      x, [&](double t) { return 1.0 - std::pow(1.0 - t, A); });
  CHECK(ks.p_value > 0.001);
}

TEST_CASE("normal variates pass KS") {
  Rng rng(19);
  std::vector<double> x(100000);
  for (auto& v : x) v = rng.normal();
  const auto ks = testutil::ks_test(
      x, [](double t) { return 0.5 * std::erfc(-t / 1.4142135623730951); });
  CHECK(ks.p_value > 0.001);
}

TEST_CASE("dirichlet draws live on the simplex") {
  Rng rng(23);
  const std::vector<double> alpha{3.0, 1.0, 0.5, 7.0};
  for (int i = 0; i < 100; ++i) {
    const auto w = rng.dirichlet(alpha);
    double total = 0.0;
    for (double v : w) {
      REQUIRE(v > 0.0);
      total += v;
    }
    REQUIRE(std::abs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("categorical respects weight ratios") {
  Rng rng(29);
  const std::vector<double> w{1.0, 3.0, 0.0, 6.0};
  std::vector<int> counts(4, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[rng.categorical(w)];
  CHECK(counts[2] == 0);
  CHECK(std::abs(counts[0] / static_cast<double>(n) - 0.1) < 0.01);
  CHECK(std::abs(counts[1] / static_cast<double>(n) - 0.3) < 0.01);
  CHECK(std::abs(counts[3] / static_cast<double>(n) - 0.6) < 0.01);
}
