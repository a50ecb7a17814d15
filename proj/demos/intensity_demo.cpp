// End-to-end example: simulate events from the exponential benchmark, fit the
// empirical-Bayes chain, and print the posterior band at a few time points.

#include <cstdio>

#include "dpmix/calibration.hpp"
#include "dpmix/gibbs.hpp"
#include "dpmix/point_process.hpp"
#include "dpmix/summary.hpp"

int main() {
  const dpmix::NormalizedIntensity bar(dpmix::TruthId::Lambda02);
  const auto sample = dpmix::simulate(bar, 1000, 7);
  std::printf("simulated %zu events on [0, %g]\n", sample.events.size(),
              sample.horizon);

  dpmix::HyperState hyper;
  const auto gh = dpmix::gamma_hat(sample.events);
  hyper.gamma = gh.value;
  std::printf("empirical calibration: mean event time %.4f -> gamma = %.4f\n",
              gh.mean_event, gh.value);

  dpmix::BaseMeasure base(dpmix::BaseFamily::InvShiftedGamma, 2.0, hyper.gamma,
                          sample.horizon);
  dpmix::ChainConfig config;
  config.n_iter = 2000;
  config.burn_in = 1000;
  config.seed = 7;
  config.record_grid = dpmix::uniform_grid(sample.horizon, 512);

  const auto trace = dpmix::run_chain(sample, config, hyper, base);
  const auto bands = dpmix::summarize(trace.lambda, trace.grid);

  std::printf("%6s %10s %10s %10s %10s\n", "t", "low", "median", "high", "truth");
  for (const double t : {0.0, 1.0, 2.0, 4.0, 6.0, 8.0}) {
    std::size_t j = 0;
    while (j + 1 < trace.grid.size() && trace.grid[j] < t) ++j;
    std::printf("%6.1f %10.4f %10.4f %10.4f %10.4f\n", t, bands.low.values[j],
                bands.median.values[j], bands.high.values[j], bar.eval_bar(t));
  }
  return 0;
}
