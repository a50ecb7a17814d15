#include <catch2/catch_amalgamated.hpp>

#include "dpmix/point_process.hpp"
#include "testutil.hpp"

#include <boost/math/distributions/poisson.hpp>
#include <cstdio>
#include <filesystem>

using namespace dpmix;

namespace {
std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}
}  // namespace

TEST_CASE("homogeneous count law") {
  const auto flat = [](double) { return 1.0 / 8.0; };
  const auto s = simulate(flat, 1000, 8.0, 12345);
  const double dev = std::abs(static_cast<double>(s.events.size()) - 1000.0);
  CHECK(dev <= 4.0 * std::sqrt(1000.0));
  for (std::size_t i = 1; i < s.events.size(); ++i)
    REQUIRE(s.events[i] > s.events[i - 1]);
  for (double w : s.events) REQUIRE((w >= 0.0 && w <= 8.0));
}

TEST_CASE("n = 0 gives an empty, valid sample") {
  const NormalizedIntensity bar(TruthId::Lambda01);
  const auto s = simulate(bar, 0, 7);
  CHECK(s.events.empty());
  CHECK(s.n == 0);
}

TEST_CASE("identical seeds reproduce the event sequence") {
  const NormalizedIntensity bar(TruthId::Lambda02);
  const auto a = simulate(bar, 500, 99);
  const auto b = simulate(bar, 500, 99);
  const auto c = simulate(bar, 500, 100);
  CHECK(a.events == b.events);
  CHECK(a.events != c.events);
  CHECK(a.truth == TruthId::Lambda02);
}

TEST_CASE("unbounded or invalid intensities are rejected") {
  const auto spike = [](double t) { return t < 1e-3 ? 1.0 / t : 0.1; };
  CHECK_THROWS_AS(simulate(spike, 100, 8.0, 1), std::invalid_argument);
}

TEST_CASE("thinning count distribution: chi-square over 200 replicates") {
  // constant normalized intensity: acceptance step is vacuous, counts are
  // Poisson(n)
  const auto flat = [](double) { return 1.0 / 8.0; };
  const int n = 500, reps = 200;
  std::vector<double> counts(reps);
  for (int r = 0; r < reps; ++r)
    counts[r] = static_cast<double>(simulate(flat, n, 8.0, 1000 + r).events.size());

  boost::math::poisson_distribution<double> pois(n);
  const int bins = 8;
  std::vector<double> edges(bins - 1);
  for (int b = 1; b < bins; ++b)
    edges[b - 1] = boost::math::quantile(pois, b / static_cast<double>(bins));
  std::vector<double> observed(bins, 0.0), expected(bins, 0.0);
  for (double c : counts) {
    int b = 0;
    while (b < bins - 1 && c > edges[b]) ++b;
    observed[b] += 1.0;
  }
  double prev = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double cum =
        b + 1 < bins ? boost::math::cdf(pois, std::floor(edges[b])) : 1.0;
    expected[b] = (cum - prev) * reps;
    prev = cum;
  }
  const auto res = testutil::chi2_gof(observed, expected);
  CHECK(res.p_value > 0.001);
}

TEST_CASE("time rescaling: transformed points are unit-rate Poisson") {
  // Lambda02 has closed-form cumulative intensity
  const NormalizedIntensity bar(TruthId::Lambda02);
  const double M = mass(TruthId::Lambda02);
  const auto cum = [&](double t) { return (1.0 - std::exp(-0.4 * t)) / (0.4 * M); };
  std::vector<double> gaps;
  for (int r = 0; r < 20; ++r) {
    const auto s = simulate(bar, 300, 777 + r);
    double prev = 0.0;
    for (double w : s.events) {
      const double z = 300.0 * cum(w);
      gaps.push_back(z - prev);
      prev = z;
    }
  }
  const auto ks = testutil::ks_test(gaps, [](double t) { return 1.0 - std::exp(-t); });
  CHECK(ks.p_value > 0.001);
}

TEST_CASE("realized counts near n for the reference truths") {
  // normalized scaling: expected count equals n, not n * mass
  const NormalizedIntensity bar(TruthId::Lambda01);
  const auto s = simulate(bar, 500, 4242);
  CHECK(std::abs(static_cast<double>(s.events.size()) - 500.0) <=
        4.0 * std::sqrt(500.0));
}

TEST_CASE("save/load round trip is bit exact") {
  PointProcessSample s;
  s.events = {0.1234567890123456789, 3.99999999999999, 7.5};
  s.n = 42;
  s.horizon = 8.0;
  s.seed = 777;
  s.truth = TruthId::Lambda03;
  const auto path = temp_path("dpmix_events_roundtrip.txt");
  save_events(s, path);
  const auto loaded = load_events(path);
  CHECK(loaded.events == s.events);
  CHECK(loaded.n == s.n);
  CHECK(loaded.horizon == s.horizon);
  CHECK(loaded.seed == s.seed);
  CHECK(loaded.truth == s.truth);
  std::remove(path.c_str());
}

TEST_CASE("header-only file loads as an empty sample") {
  const auto path = temp_path("dpmix_events_empty.txt");
  {
    std::ofstream out(path);
    out << "# T=8 n=100 seed=5\n";
  }
  const auto loaded = load_events(path);
  CHECK(loaded.events.empty());
  CHECK(loaded.n == 100);
  std::remove(path.c_str());
}

TEST_CASE("ingestion errors name the offending line") {
  const auto path = temp_path("dpmix_events_bad.txt");

  {
    std::ofstream out(path);
    out << "# T=8 n=10 seed=1\n1.0\n9.0\n";
  }
  CHECK_THROWS_WITH(load_events(path),
                    Catch::Matchers::ContainsSubstring("outside horizon") &&
                        Catch::Matchers::ContainsSubstring("line 3"));

  {
    std::ofstream out(path);
    out << "# T=8 n=10 seed=1\n2.0\n1.0\n";
  }
  CHECK_THROWS_WITH(load_events(path),
                    Catch::Matchers::ContainsSubstring("not sorted"));

  {
    std::ofstream out(path);
    out << "# T=8 n=10 seed=1\n2.0\n2.0\n";
  }
  CHECK_THROWS_WITH(load_events(path),
                    Catch::Matchers::ContainsSubstring("duplicate"));

  {
    std::ofstream out(path);
    out << "# T=8 n=10 seed=1\nnot-a-number\n";
  }
  CHECK_THROWS_WITH(load_events(path),
                    Catch::Matchers::ContainsSubstring("malformed row at line 2"));

  {
    std::ofstream out(path);
    out << "1.0\n2.0\n";
  }
  CHECK_THROWS_WITH(load_events(path),
                    Catch::Matchers::ContainsSubstring("header"));

  std::remove(path.c_str());
}
