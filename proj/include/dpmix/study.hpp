#ifndef DPMIX_STUDY_HPP
#define DPMIX_STUDY_HPP

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "dpmix/calibration.hpp"
#include "dpmix/gibbs.hpp"
#include "dpmix/point_process.hpp"
#include "dpmix/summary.hpp"
#include "dpmix/truth.hpp"

namespace dpmix {

struct StrategySpec {
  Strategy kind = Strategy::EmpiricalBayes;
  double rho = 1.0;          // fixed-gamma factor; <= 0 means per-truth reference
  double sigma_gamma = 0.1;  // hierarchical prior sd; <= 0 means per-truth reference
  std::string label = "empirical";
};

// Perturbation factors and hierarchical prior spreads used in the reference
// study, per truth intensity.
inline double reference_rho(TruthId id) {
  switch (id) {
    case TruthId::Lambda01: return 0.01;
    case TruthId::Lambda02: return 100.0;
    case TruthId::Lambda03: return 30.0;
  }
  throw std::logic_error("reference_rho: bad id");
}

inline double reference_sigma_gamma(TruthId id, bool concentrated) {
  switch (id) {
    case TruthId::Lambda01: return concentrated ? 0.001 : 0.005;
    case TruthId::Lambda02: return concentrated ? 0.01 : 0.1;
    case TruthId::Lambda03: return concentrated ? 0.01 : 0.1;
  }
  throw std::logic_error("reference_sigma_gamma: bad id");
}

struct ExperimentConfig {
  std::vector<TruthId> truths = {TruthId::Lambda01, TruthId::Lambda02,
                                 TruthId::Lambda03};
  std::vector<std::int64_t> ns = {500, 1000, 2000};
  // empty means: the four reference strategies with per-truth rho/sigma
  std::vector<StrategySpec> strategies;
  ChainConfig chain;
  double shape_a = 2.0;
  std::string outdir = "study_out";
  std::uint64_t master_seed = 20240801;
  int threads = 1;
  bool save_grid = false;
  double q_low = 0.1, q_high = 0.9;
};

struct SummaryRecord {
  std::string dataset;
  TruthId truth = TruthId::Lambda01;
  std::int64_t n = 0;
  long n_events = 0;
  std::string strategy;
  double gamma_value = std::numeric_limits<double>::quiet_NaN();
  double a_gamma = std::numeric_limits<double>::quiet_NaN();
  double b_gamma = std::numeric_limits<double>::quiet_NaN();
  double d_l1 = std::numeric_limits<double>::quiet_NaN();
  double d_l2_sq = std::numeric_limits<double>::quiet_NaN();
  double d_l2 = std::numeric_limits<double>::quiet_NaN();
  double d_sup = std::numeric_limits<double>::quiet_NaN();
  double mean_k_nonempty = std::numeric_limits<double>::quiet_NaN();
  double mass_mean = std::numeric_limits<double>::quiet_NaN();
  double wall_seconds = 0.0;
  std::string status = "ok";
};

inline std::uint64_t dataset_seed(std::uint64_t master, TruthId truth, std::int64_t n) {
  return derive_seed(master, {0x64617461ULL, static_cast<std::uint64_t>(truth),
                              static_cast<std::uint64_t>(n)});
}

inline std::uint64_t chain_seed(std::uint64_t master, TruthId truth, std::int64_t n,
                                std::size_t strategy_index) {
  return derive_seed(master, {0x636861696eULL, static_cast<std::uint64_t>(truth),
                              static_cast<std::uint64_t>(n),
                              static_cast<std::uint64_t>(strategy_index)});
}

// Gamma prior with mean gamma_hat and standard deviation sigma:
// a = (gamma_hat/sigma)^2, b = gamma_hat/sigma^2.
inline std::pair<double, double> hierarchical_prior(double gamma_hat_value,
                                                    double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("hierarchical_prior: sigma must be > 0");
  const double a = (gamma_hat_value / sigma) * (gamma_hat_value / sigma);
  const double b = gamma_hat_value / (sigma * sigma);
  return {a, b};
}

namespace io {

inline void write_trace_csv(const ChainTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "sweep,K_star,K_nonempty,A,gamma,M,ar_accept_rate\n";
  char buf[256];
  for (std::size_t i = 0; i < trace.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%ld,%d,%d,%.10g,%.10g,%.10g,%.6g\n",
                  trace.sweeps[i], trace.k_star[i], trace.k_nonempty[i],
                  trace.concentration[i], trace.gamma[i], trace.mass[i],
                  trace.ar_rate[i]);
    out << buf;
  }
}

inline void write_lambda_grid_csv(const ChainTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  char buf[32];
  for (const auto& row : trace.lambda) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.8g", row[j]);
      out << buf << (j + 1 < row.size() ? "," : "\n");
    }
  }
}

inline void write_bands_csv(const BandSummary& bands,
                            const std::vector<double>& truth_values,
                            const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "grid,low,median,high,truth\n";
  char buf[256];
  for (std::size_t j = 0; j < bands.median.grid.size(); ++j) {
    std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g,%.10g,%.10g\n",
                  bands.median.grid[j], bands.low.values[j],
                  bands.median.values[j], bands.high.values[j], truth_values[j]);
    out << buf;
  }
}

inline void write_summary_csv(const std::vector<SummaryRecord>& records,
                              const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "dataset,truth,n,N_T,strategy,gamma,a_gamma,b_gamma,d_l1,d_l2_sq,d_l2,"
         "d_sup,mean_K_nonempty,M_mean,wall_seconds,status\n";
  char buf[512];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf),
                  "%s,%s,%lld,%ld,%s,%.8g,%.8g,%.8g,%.8g,%.8g,%.8g,%.8g,%.6g,"
                  "%.8g,%.3f,%s\n",
                  r.dataset.c_str(), truth_name(r.truth),
                  static_cast<long long>(r.n), r.n_events, r.strategy.c_str(),
                  r.gamma_value, r.a_gamma, r.b_gamma, r.d_l1, r.d_l2_sq, r.d_l2,
                  r.d_sup, r.mean_k_nonempty, r.mass_mean, r.wall_seconds,
                  r.status.c_str());
    out << buf;
  }
}

}  // namespace io

// Calibrate the rate hyperparameter (or its prior) for one strategy on one
// dataset. Only the inverse-shifted family supports these calibrations.
inline HyperState calibrate_strategy(const PointProcessSample& sample,
                                     const StrategySpec& spec, double shape_a) {
  HyperState hyper;
  hyper.strategy = spec.kind;
  const double T = sample.horizon;
  switch (spec.kind) {
    case Strategy::EmpiricalBayes: {
      hyper.gamma = gamma_hat(sample.events, shape_a, T).value;
      break;
    }
    case Strategy::FixedGamma: {
      if (!sample.truth)
        throw std::invalid_argument("fixed-gamma strategy needs a dataset truth id");
      hyper.gamma = gamma_fixed(spec.rho, *sample.truth, shape_a, T);
      break;
    }
    case Strategy::Hierarchical: {
      const double gh = gamma_hat(sample.events, shape_a, T).value;
      const auto [a_g, b_g] = hierarchical_prior(gh, spec.sigma_gamma);
      hyper.a_gamma = a_g;
      hyper.b_gamma = b_g;
      hyper.gamma = a_g / b_g;  // prior mean, equals gamma_hat
      break;
    }
  }
  return hyper;
}

inline SummaryRecord run_cell(const PointProcessSample& sample,
                              const StrategySpec& spec,
                              const ExperimentConfig& config,
                              std::size_t strategy_index,
                              const std::optional<std::string>& cell_dir) {
  SummaryRecord rec;
  rec.truth = sample.truth.value_or(TruthId::Lambda01);
  rec.n = sample.n;
  rec.n_events = static_cast<long>(sample.events.size());
  rec.strategy = spec.label;
  rec.dataset = std::string(truth_name(rec.truth)) + "_n" + std::to_string(sample.n);

  const auto t0 = std::chrono::steady_clock::now();
  try {
    HyperState hyper = calibrate_strategy(sample, spec, config.shape_a);
    rec.gamma_value = hyper.gamma;
    if (spec.kind == Strategy::Hierarchical) {
      rec.a_gamma = hyper.a_gamma;
      rec.b_gamma = hyper.b_gamma;
    }
    BaseMeasure base(BaseFamily::InvShiftedGamma, config.shape_a, hyper.gamma,
                     sample.horizon);
    ChainConfig chain = config.chain;
    chain.seed = chain_seed(config.master_seed, rec.truth, sample.n, strategy_index);
    const ChainTrace trace = run_chain(sample, chain, hyper, base);
    if (trace.size() == 0) throw GibbsError("empty trace (no retained sweeps)");

    const BandSummary bands =
        summarize(trace.lambda, trace.grid, config.q_low, config.q_high);
    const NormalizedIntensity truth(rec.truth);
    GridFunction truth_fn;
    truth_fn.grid = trace.grid;
    truth_fn.values.resize(trace.grid.size());
    for (std::size_t j = 0; j < trace.grid.size(); ++j)
      truth_fn.values[j] = truth.eval_bar(trace.grid[j]);

    rec.d_l1 = distance(bands.median, truth_fn, DistanceKind::L1);
    rec.d_l2_sq = distance(bands.median, truth_fn, DistanceKind::L2);
    rec.d_l2 = std::sqrt(rec.d_l2_sq);
    rec.d_sup = distance(bands.median, truth_fn, DistanceKind::Sup);

    double k_sum = 0.0, m_sum = 0.0;
    for (std::size_t i = 0; i < trace.size(); ++i) {
      k_sum += trace.k_nonempty[i];
      m_sum += trace.mass[i];
    }
    rec.mean_k_nonempty = k_sum / static_cast<double>(trace.size());
    rec.mass_mean = m_sum / static_cast<double>(trace.size());

    if (cell_dir) {
      std::filesystem::create_directories(*cell_dir);
      io::write_trace_csv(trace, *cell_dir + "/trace.csv");
      io::write_bands_csv(bands, truth_fn.values, *cell_dir + "/bands.csv");
      if (config.save_grid)
        io::write_lambda_grid_csv(trace, *cell_dir + "/lambda_grid.csv");
    }
  } catch (const std::exception& e) {
    rec.status = e.what();
  }
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

inline std::vector<StrategySpec> default_strategies(TruthId truth) {
  return {
      {Strategy::EmpiricalBayes, 1.0, 0.1, "empirical"},
      {Strategy::FixedGamma, reference_rho(truth), 0.1, "fixed"},
      {Strategy::Hierarchical, 1.0, reference_sigma_gamma(truth, false), "hierarchical"},
      {Strategy::Hierarchical, 1.0, reference_sigma_gamma(truth, true), "hierarchical2"},
  };
}

// Fill <= 0 sentinels with the per-truth reference constants; "hierarchical2"
// labels pick the concentrated prior spread.
inline StrategySpec resolve_strategy(StrategySpec spec, TruthId truth) {
  if (spec.kind == Strategy::FixedGamma && spec.rho <= 0.0)
    spec.rho = reference_rho(truth);
  if (spec.kind == Strategy::Hierarchical && spec.sigma_gamma <= 0.0)
    spec.sigma_gamma = reference_sigma_gamma(truth, spec.label == "hierarchical2");
  return spec;
}

// The full study: per (truth, n) dataset simulated once with a derived seed,
// then one chain per strategy; cells run on a small worker pool and write
// their own files, the master summary is assembled after the pool drains.
inline std::vector<SummaryRecord> run_study(const ExperimentConfig& config) {
  struct Cell {
    PointProcessSample sample;
    StrategySpec spec;
    std::size_t strategy_index;
    std::optional<std::string> dir;
  };
  std::vector<Cell> cells;

  const bool to_disk = !config.outdir.empty();
  for (TruthId truth : config.truths) {
    const NormalizedIntensity bar(truth);
    for (std::int64_t n : config.ns) {
      PointProcessSample sample =
          simulate(bar, n, dataset_seed(config.master_seed, truth, n));
      const std::string ds_dir =
          config.outdir + "/" + truth_name(truth) + "_n" + std::to_string(n);
      if (to_disk) {
        std::filesystem::create_directories(ds_dir);
        save_events(sample, ds_dir + "/events.txt");
      }
      const auto strategies = config.strategies.empty() ? default_strategies(truth)
                                                        : config.strategies;
      for (std::size_t si = 0; si < strategies.size(); ++si) {
        std::optional<std::string> dir;
        if (to_disk) dir = ds_dir + "/" + strategies[si].label;
        cells.push_back({sample, resolve_strategy(strategies[si], truth), si, dir});
      }
    }
  }

  std::vector<SummaryRecord> records(cells.size());
  std::atomic<std::size_t> next{0};
  const int workers = std::max(1, config.threads);
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      records[i] = run_cell(cells[i].sample, cells[i].spec, config,
                            cells[i].strategy_index, cells[i].dir);
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  if (to_disk) {
    std::filesystem::create_directories(config.outdir);
    io::write_summary_csv(records, config.outdir + "/summary.csv");
  }
  return records;
}

}  // namespace dpmix

#endif  // DPMIX_STUDY_HPP
