#include <catch2/catch_amalgamated.hpp>

#include "dpmix/study.hpp"

#include <filesystem>
#include <fstream>

using namespace dpmix;

namespace {
ExperimentConfig small_config(const std::string& outdir) {
  ExperimentConfig config;
  config.truths = {TruthId::Lambda01};
  config.ns = {500};
  config.strategies = {{Strategy::EmpiricalBayes, 1.0, 0.1, "empirical"}};
  config.chain.n_iter = 120;
  config.chain.burn_in = 40;
  config.chain.record_grid = uniform_grid(8.0, 256);
  config.outdir = outdir;
  config.master_seed = 77;
  return config;
}
}  // namespace

TEST_CASE("hierarchical prior moments: mean gamma_hat, sd sigma") {
  const auto [a, b] = hierarchical_prior(0.66, 0.1);
  CHECK(a / b == Catch::Approx(0.66).epsilon(1e-12));
  CHECK(std::sqrt(a) / b == Catch::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("dataset seeds are pure functions of (master, truth, n)") {
  CHECK(dataset_seed(1, TruthId::Lambda01, 500) == dataset_seed(1, TruthId::Lambda01, 500));
  CHECK(dataset_seed(1, TruthId::Lambda01, 500) != dataset_seed(1, TruthId::Lambda01, 1000));
  CHECK(dataset_seed(1, TruthId::Lambda01, 500) != dataset_seed(2, TruthId::Lambda01, 500));
  CHECK(dataset_seed(1, TruthId::Lambda01, 500) != dataset_seed(1, TruthId::Lambda02, 500));
}

TEST_CASE("single-cell study produces records and files") {
  const auto outdir =
      (std::filesystem::temp_directory_path() / "dpmix_study_test").string();
  std::filesystem::remove_all(outdir);
  const auto config = small_config(outdir);

  const auto records = run_study(config);
  REQUIRE(records.size() == 1);
  const auto& r = records[0];
  CHECK(r.status == "ok");
  CHECK(r.truth == TruthId::Lambda01);
  CHECK(r.n == 500);
  CHECK(r.n_events > 400);
  CHECK(r.d_l1 >= 0.0);
  CHECK(r.d_l2 == Catch::Approx(std::sqrt(r.d_l2_sq)));
  CHECK(r.mass_mean == Catch::Approx(1.0).margin(0.2));

  // exactly the four per-run artifacts: events, trace, bands, summary
  CHECK(std::filesystem::exists(outdir + "/lambda1_n500/events.txt"));
  CHECK(std::filesystem::exists(outdir + "/lambda1_n500/empirical/trace.csv"));
  CHECK(std::filesystem::exists(outdir + "/lambda1_n500/empirical/bands.csv"));
  CHECK(std::filesystem::exists(outdir + "/summary.csv"));
  CHECK_FALSE(std::filesystem::exists(outdir + "/lambda1_n500/empirical/lambda_grid.csv"));

  // determinism: identical master seed reproduces the summary numbers
  const auto records2 = run_study(config);
  CHECK(records2[0].d_l1 == r.d_l1);
  CHECK(records2[0].mass_mean == r.mass_mean);
  CHECK(records2[0].mean_k_nonempty == r.mean_k_nonempty);

  // trace header as documented
  std::ifstream trace(outdir + "/lambda1_n500/empirical/trace.csv");
  std::string header;
  std::getline(trace, header);
  CHECK(header == "sweep,K_star,K_nonempty,A,gamma,M,ar_accept_rate");

  std::filesystem::remove_all(outdir);
}

TEST_CASE("save_grid emits the lambda grid artifact") {
  const auto outdir =
      (std::filesystem::temp_directory_path() / "dpmix_study_grid").string();
  std::filesystem::remove_all(outdir);
  auto config = small_config(outdir);
  config.save_grid = true;
  config.chain.n_iter = 30;
  config.chain.burn_in = 20;
  run_study(config);
  std::ifstream grid_file(outdir + "/lambda1_n500/empirical/lambda_grid.csv");
  REQUIRE(grid_file.good());
  std::string line;
  int rows = 0;
  while (std::getline(grid_file, line)) ++rows;
  CHECK(rows == 10);
  std::filesystem::remove_all(outdir);
}

TEST_CASE("cell errors are recorded without aborting the study") {
  const auto outdir =
      (std::filesystem::temp_directory_path() / "dpmix_study_err").string();
  std::filesystem::remove_all(outdir);
  auto config = small_config(outdir);
  config.strategies = {{Strategy::FixedGamma, 1e-7, 0.1, "fixed_small"},
                       {Strategy::EmpiricalBayes, 1.0, 0.1, "empirical"}};
  // a zero proposal budget makes every accept-reject step overflow; the
  // study must record the failures and keep going
  config.chain.ar_max_proposals = 0;
  const auto failed = run_study(config);
  REQUIRE(failed.size() == 2);
  for (const auto& r : failed) {
    CHECK(r.status != "ok");
    CHECK(std::isnan(r.d_l1));
  }

  config.chain.ar_max_proposals = 1000000;
  const auto healthy = run_study(config);
  CHECK(healthy[0].status == "ok");  // even the absurd rate completes now
  CHECK(healthy[1].status == "ok");
  std::filesystem::remove_all(outdir);
}

TEST_CASE("study runs cells in parallel deterministically") {
  const auto outdir =
      (std::filesystem::temp_directory_path() / "dpmix_study_par").string();
  std::filesystem::remove_all(outdir);
  auto config = small_config(outdir);
  config.truths = {TruthId::Lambda01, TruthId::Lambda02};
  config.strategies = {{Strategy::EmpiricalBayes, 1.0, 0.1, "empirical"},
                       {Strategy::Hierarchical, 1.0, 0.1, "hierarchical"}};
  config.chain.n_iter = 60;
  config.chain.burn_in = 30;

  config.threads = 1;
  const auto serial = run_study(config);
  config.threads = 4;
  const auto parallel = run_study(config);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].d_l1 == parallel[i].d_l1);
    CHECK(serial[i].strategy == parallel[i].strategy);
  }
  std::filesystem::remove_all(outdir);
}

TEST_CASE("summary distances are stable under grid refinement") {
  // recording uses forked substreams, so the chain's draws are identical for
  // any grid; the distances may move only by discretization error
  const NormalizedIntensity bar(TruthId::Lambda02);
  const auto sample = simulate(bar, 500, 2024);
  HyperState hyper;
  hyper.gamma = gamma_hat(sample.events).value;
  const BaseMeasure base(BaseFamily::InvShiftedGamma, 2.0, hyper.gamma, 8.0);

  double d_coarse = 0.0, d_fine = 0.0;
  for (const int points : {4096, 8192}) {
    ChainConfig chain;
    chain.n_iter = 600;
    chain.burn_in = 300;
    chain.seed = 99;
    chain.record_grid = uniform_grid(8.0, points);
    const auto trace = run_chain(sample, chain, hyper, base);
    const auto bands = summarize(trace.lambda, trace.grid, 0.1, 0.9);
    GridFunction truth_fn;
    truth_fn.grid = trace.grid;
    for (double t : trace.grid) truth_fn.values.push_back(bar.eval_bar(t));
    (points == 4096 ? d_coarse : d_fine) =
        distance(bands.median, truth_fn, DistanceKind::L1);
  }
  CHECK(std::abs(d_coarse - d_fine) < 1e-3);
}

TEST_CASE("reference strategy defaults carry the per-truth constants") {
  const auto s1 = default_strategies(TruthId::Lambda01);
  REQUIRE(s1.size() == 4);
  CHECK(s1[1].rho == 0.01);
  CHECK(s1[2].sigma_gamma == 0.005);
  CHECK(s1[3].sigma_gamma == 0.001);
  const auto s2 = default_strategies(TruthId::Lambda02);
  CHECK(s2[1].rho == 100.0);
  CHECK(s2[2].sigma_gamma == 0.1);
  CHECK(s2[3].sigma_gamma == 0.01);
  const auto s3 = default_strategies(TruthId::Lambda03);
  CHECK(s3[1].rho == 30.0);
}

TEST_CASE("sentinel strategy parameters resolve per truth") {
  StrategySpec fixed{Strategy::FixedGamma, -1.0, 0.1, "fixed"};
  CHECK(resolve_strategy(fixed, TruthId::Lambda01).rho == 0.01);
  CHECK(resolve_strategy(fixed, TruthId::Lambda02).rho == 100.0);

  StrategySpec hier{Strategy::Hierarchical, 1.0, -1.0, "hierarchical"};
  CHECK(resolve_strategy(hier, TruthId::Lambda02).sigma_gamma == 0.1);
  hier.label = "hierarchical2";
  CHECK(resolve_strategy(hier, TruthId::Lambda02).sigma_gamma == 0.01);

  StrategySpec explicit_rho{Strategy::FixedGamma, 7.0, 0.1, "fixed"};
  CHECK(resolve_strategy(explicit_rho, TruthId::Lambda01).rho == 7.0);
}
