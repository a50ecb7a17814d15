// Command-line harness: simulate event data, fit a single chain, reproduce
// the full calibration study, evaluate the calibration map, and run the
// Gaussian density estimator.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dpmix/calibration.hpp"
#include "dpmix/gaussian_dpm.hpp"
#include "dpmix/gibbs.hpp"
#include "dpmix/point_process.hpp"
#include "dpmix/study.hpp"
#include "dpmix/summary.hpp"

namespace {

dpmix::StrategySpec parse_strategy(const std::string& name, double rho,
                                   double sigma_gamma) {
  dpmix::StrategySpec spec;
  spec.rho = rho;
  spec.sigma_gamma = sigma_gamma;
  spec.label = name;
  if (name == "empirical") {
    spec.kind = dpmix::Strategy::EmpiricalBayes;
  } else if (name == "fixed") {
    spec.kind = dpmix::Strategy::FixedGamma;
  } else if (name == "hierarchical" || name == "hierarchical2") {
    spec.kind = dpmix::Strategy::Hierarchical;
  } else {
    throw CLI::ValidationError("--strategy must be empirical, fixed, or hierarchical");
  }
  return spec;
}

std::vector<double> read_column(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<double> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    try {
      out.push_back(std::stod(line));
    } catch (const std::exception&) {
      throw std::runtime_error(path + ": malformed value at line " +
                               std::to_string(line_no));
    }
  }
  return out;
}

void write_density_trace(const dpmix::DensityTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "sweep,K_star,K_nonempty,sigma\n";
  char buf[128];
  for (std::size_t i = 0; i < trace.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%ld,%d,%d,%.10g\n", trace.sweeps[i],
                  trace.k_star[i], trace.k_nonempty[i], trace.sigma[i]);
    out << buf;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dirichlet-process mixture estimation of monotone intensities"};
  app.require_subcommand(1);
  app.set_config("--config", "", "flat key=value config file mirroring the flags");

  // --- simulate ---------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "draw an inhomogeneous Poisson sample");
  std::string sim_truth = "lambda1", sim_out = "events.txt";
  std::int64_t sim_n = 500;
  std::uint64_t sim_seed = 1;
  sim->add_option("--truth", sim_truth, "truth intensity: lambda1|lambda2|lambda3");
  sim->add_option("--n", sim_n, "scaling factor (expected event count)");
  sim->add_option("--seed", sim_seed, "RNG seed");
  sim->add_option("--out", sim_out, "output events file");

  // --- fit --------------------------------------------------------------
  auto* fit = app.add_subcommand("fit", "run one chain on an event file");
  std::string fit_events, fit_strategy = "empirical", fit_outdir = "fit_out";
  double fit_rho = 1.0, fit_sigma = 0.1, fit_zeta = 1.0, fit_a = 2.0;
  double fit_qlow = 0.1, fit_qhigh = 0.9;
  int fit_sweeps = 5000, fit_burnin = 2500, fit_thin = 1, fit_grid = 4096;
  std::uint64_t fit_seed = 1;
  bool fit_no_grid = false;
  fit->add_option("--events", fit_events, "events file from `simulate`")->required();
  fit->add_option("--strategy", fit_strategy, "empirical|fixed|hierarchical");
  fit->add_option("--rho", fit_rho, "fixed-gamma perturbation factor");
  fit->add_option("--sigma-gamma", fit_sigma, "hierarchical prior sd of gamma");
  fit->add_option("--sweeps", fit_sweeps, "total Gibbs sweeps");
  fit->add_option("--burn-in", fit_burnin, "burn-in sweeps");
  fit->add_option("--thin", fit_thin, "recording stride");
  fit->add_option("--zeta", fit_zeta, "slice threshold in (0,1]");
  fit->add_option("--a", fit_a, "base measure shape (> 1)");
  fit->add_option("--seed", fit_seed, "chain seed");
  fit->add_option("--grid-points", fit_grid, "recording grid size");
  fit->add_option("--q-low", fit_qlow, "lower band quantile");
  fit->add_option("--q-high", fit_qhigh, "upper band quantile");
  fit->add_option("--outdir", fit_outdir, "output directory");
  fit->add_flag("--no-grid", fit_no_grid, "skip lambda_grid.csv");

  // --- study ------------------------------------------------------------
  auto* study = app.add_subcommand("study", "full calibration study");
  std::string study_outdir = "study_out";
  std::vector<std::string> study_truths = {"lambda1", "lambda2", "lambda3"};
  std::vector<std::int64_t> study_ns = {500, 1000, 2000};
  std::vector<std::string> study_strategies;  // empty: the four reference ones
  int study_sweeps = 5000, study_burnin = 2500, study_threads = 1;
  std::uint64_t study_seed = 20240801;
  double study_rho = -1.0, study_sigma = -1.0;
  bool study_save_grid = false;
  study->add_option("--outdir", study_outdir, "output directory");
  study->add_option("--truths", study_truths, "subset of lambda1 lambda2 lambda3");
  study->add_option("--ns", study_ns, "scaling factors");
  study->add_option("--strategies", study_strategies,
                    "subset of empirical fixed hierarchical hierarchical2 "
                    "(default: all four)");
  study->add_option("--sweeps", study_sweeps, "total Gibbs sweeps per chain");
  study->add_option("--burn-in", study_burnin, "burn-in sweeps");
  study->add_option("--master-seed", study_seed, "master seed");
  study->add_option("--threads", study_threads, "worker threads");
  study->add_option("--rho", study_rho,
                    "override the per-truth fixed-gamma factor");
  study->add_option("--sigma-gamma", study_sigma,
                    "override the per-truth hierarchical sd");
  study->add_flag("--save-grid", study_save_grid, "write lambda_grid.csv per cell");

  // --- psi ----------------------------------------------------------------
  auto* psi_cmd = app.add_subcommand("psi", "evaluate or invert the calibration map");
  double psi_gamma = -1.0, psi_target = -1.0, psi_a = 2.0, psi_T = 8.0;
  psi_cmd->add_option("--gamma", psi_gamma, "evaluate Psi at this rate");
  psi_cmd->add_option("--invert", psi_target, "solve Psi(gamma) = target");
  psi_cmd->add_option("--a", psi_a, "base measure shape");
  psi_cmd->add_option("--T", psi_T, "horizon");

  // --- density ------------------------------------------------------------
  auto* dens = app.add_subcommand("density", "Gaussian mixture density estimator");
  std::string dens_data, dens_outdir = "density_out", dens_variant = "mean-variance";
  int dens_sweeps = 4000, dens_burnin = 2000, dens_thin = 1, dens_grid = 1024;
  double dens_alpha = 1.0, dens_nu1 = 1.0, dens_nu2 = 1.0;
  double dens_qlow = 0.1, dens_qhigh = 0.9;
  std::uint64_t dens_seed = 1;
  dens->add_option("--data", dens_data, "one observation per line")->required();
  dens->add_option("--sweeps", dens_sweeps, "total sweeps");
  dens->add_option("--burn-in", dens_burnin, "burn-in sweeps");
  dens->add_option("--thin", dens_thin, "recording stride");
  dens->add_option("--alpha", dens_alpha, "DP total mass");
  dens->add_option("--nu1", dens_nu1, "inverse-gamma shape for sigma^2");
  dens->add_option("--nu2", dens_nu2, "inverse-gamma rate for sigma^2");
  dens->add_option("--eb-variant", dens_variant, "mean-variance|mean-range");
  dens->add_option("--seed", dens_seed, "chain seed");
  dens->add_option("--grid-points", dens_grid, "recording grid size");
  dens->add_option("--q-low", dens_qlow, "lower band quantile");
  dens->add_option("--q-high", dens_qhigh, "upper band quantile");
  dens->add_option("--outdir", dens_outdir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      const dpmix::NormalizedIntensity bar(dpmix::truth_from_name(sim_truth));
      const auto sample = dpmix::simulate(bar, sim_n, sim_seed);
      dpmix::save_events(sample, sim_out);
      std::printf("wrote %zu events to %s\n", sample.events.size(), sim_out.c_str());
      return 0;
    }

    if (fit->parsed()) {
      const auto sample = dpmix::load_events(fit_events);
      if (sample.events.empty()) throw std::runtime_error("fit: no events loaded");
      const auto spec = parse_strategy(fit_strategy, fit_rho, fit_sigma);
      auto hyper = dpmix::calibrate_strategy(sample, spec, fit_a);
      if (spec.kind == dpmix::Strategy::EmpiricalBayes) {
        const auto gh = dpmix::gamma_hat(sample.events, fit_a, sample.horizon);
        if (gh.clamped)
          std::fprintf(stderr,
                       "warning: mean event time %.6g clamped before inversion\n",
                       gh.mean_event);
      }
      dpmix::BaseMeasure base(dpmix::BaseFamily::InvShiftedGamma, fit_a, hyper.gamma,
                              sample.horizon);
      dpmix::ChainConfig chain;
      chain.n_iter = fit_sweeps;
      chain.burn_in = fit_burnin;
      chain.thin = fit_thin;
      chain.zeta = fit_zeta;
      chain.seed = fit_seed;
      chain.record_grid = dpmix::uniform_grid(sample.horizon, fit_grid);
      const auto trace = dpmix::run_chain(sample, chain, hyper, base);
      if (trace.size() == 0) throw std::runtime_error("fit: no retained sweeps");

      std::filesystem::create_directories(fit_outdir);
      dpmix::io::write_trace_csv(trace, fit_outdir + "/trace.csv");
      if (!fit_no_grid)
        dpmix::io::write_lambda_grid_csv(trace, fit_outdir + "/lambda_grid.csv");
      const auto bands = dpmix::summarize(trace.lambda, trace.grid, fit_qlow, fit_qhigh);
      std::vector<double> truth_values(trace.grid.size(), 0.0);
      if (sample.truth) {
        const dpmix::NormalizedIntensity bar(*sample.truth);
        for (std::size_t j = 0; j < trace.grid.size(); ++j)
          truth_values[j] = bar.eval_bar(trace.grid[j]);
      }
      dpmix::io::write_bands_csv(bands, truth_values, fit_outdir + "/bands.csv");
      std::printf("gamma=%.6g  mean K_nonempty=%.3f  retained=%zu  -> %s\n",
                  hyper.gamma,
                  [&] {
                    double s = 0.0;
                    for (int k : trace.k_nonempty) s += k;
                    return s / trace.size();
                  }(),
                  trace.size(), fit_outdir.c_str());
      return 0;
    }

    if (study->parsed()) {
      dpmix::ExperimentConfig config;
      config.truths.clear();
      for (const auto& t : study_truths)
        config.truths.push_back(dpmix::truth_from_name(t));
      config.ns = study_ns;
      config.chain.n_iter = study_sweeps;
      config.chain.burn_in = study_burnin;
      config.outdir = study_outdir;
      config.master_seed = study_seed;
      config.threads = study_threads;
      config.save_grid = study_save_grid;
      if (!study_strategies.empty()) {
        // explicit strategy subset; non-positive rho/sigma fall back to the
        // per-truth reference constants cell by cell
        config.strategies.clear();
        for (const auto& name : study_strategies) {
          dpmix::StrategySpec spec =
              parse_strategy(name == "hierarchical2" ? "hierarchical" : name,
                             study_rho, study_sigma);
          spec.label = name;
          config.strategies.push_back(spec);
        }
      }
      const auto records = dpmix::run_study(config);
      int failed = 0;
      for (const auto& r : records) {
        std::printf("%-8s %-14s n=%-5lld l1=%-8.4g l2sq=%-9.4g sup=%-8.4g [%s]\n",
                    dpmix::truth_name(r.truth), r.strategy.c_str(),
                    static_cast<long long>(r.n), r.d_l1, r.d_l2_sq, r.d_sup,
                    r.status.c_str());
        if (r.status != "ok") ++failed;
      }
      std::printf("summary written to %s/summary.csv (%d/%zu cells failed)\n",
                  study_outdir.c_str(), failed, records.size());
      return 0;
    }

    if (psi_cmd->parsed()) {
      if (psi_gamma > 0.0)
        std::printf("psi(%.10g) = %.10g\n", psi_gamma,
                    dpmix::psi(psi_gamma, psi_a, psi_T));
      if (psi_target > 0.0)
        std::printf("psi_inverse(%.10g) = %.10g\n", psi_target,
                    dpmix::psi_inverse(psi_target, psi_a, psi_T));
      if (psi_gamma <= 0.0 && psi_target <= 0.0)
        throw CLI::ValidationError("psi: pass --gamma and/or --invert");
      return 0;
    }

    if (dens->parsed()) {
      const auto data = read_column(dens_data);
      const auto variant = dens_variant == "mean-range"
                               ? dpmix::EbVariant::MeanRange
                               : dpmix::EbVariant::MeanVariance;
      const auto base = dpmix::eb_hyper(data, variant);
      dpmix::DensityChainConfig config;
      config.n_iter = dens_sweeps;
      config.burn_in = dens_burnin;
      config.thin = dens_thin;
      config.seed = dens_seed;
      config.alpha = dens_alpha;
      config.nu1 = dens_nu1;
      config.nu2 = dens_nu2;
      config.grid.resize(dens_grid);
      const double lo = base.m - 5.0 * std::sqrt(base.s2);
      const double hi = base.m + 5.0 * std::sqrt(base.s2);
      for (int i = 0; i < dens_grid; ++i)
        config.grid[i] = lo + (hi - lo) * i / (dens_grid - 1.0);
      const auto trace = dpmix::run_density_chain(data, base, config);
      if (trace.size() == 0) throw std::runtime_error("density: no retained sweeps");

      std::filesystem::create_directories(dens_outdir);
      write_density_trace(trace, dens_outdir + "/trace.csv");
      const auto bands =
          dpmix::summarize(trace.density, trace.grid, dens_qlow, dens_qhigh);
      std::ofstream out(dens_outdir + "/bands.csv");
      out << "grid,low,median,high\n";
      char buf[160];
      for (std::size_t j = 0; j < trace.grid.size(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g,%.10g\n", trace.grid[j],
                      bands.low.values[j], bands.median.values[j],
                      bands.high.values[j]);
        out << buf;
      }
      std::printf("base (m=%.4g, s2=%.4g)  mean sigma=%.4g  retained=%zu  -> %s\n",
                  base.m, base.s2,
                  [&] {
                    double s = 0.0;
                    for (double v : trace.sigma) s += v;
                    return s / trace.size();
                  }(),
                  trace.size(), dens_outdir.c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
