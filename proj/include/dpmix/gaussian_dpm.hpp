#ifndef DPMIX_GAUSSIAN_DPM_HPP
#define DPMIX_GAUSSIAN_DPM_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "dpmix/rng.hpp"
#include "dpmix/slice_core.hpp"

namespace dpmix {

// Base measure N(m, s^2) of the location mixture.
struct GaussianBase {
  double m;
  double s2;

  GaussianBase(double mean, double var) : m(mean), s2(var) {
    if (!(s2 > 0.0)) throw std::invalid_argument("GaussianBase: s^2 must be > 0");
  }
};

enum class EbVariant { MeanVariance, MeanRange };

// Empirical-Bayes hyperparameters: (sample mean, sample variance with divisor
// n), or (sample mean, range^2) under the range variant.
template <class Data>
GaussianBase eb_hyper(const Data& data, EbVariant variant = EbVariant::MeanVariance) {
  const std::size_t n = data.size();
  if (n < 2) throw std::invalid_argument("eb_hyper: need at least 2 observations");
  double mean = 0.0;
  for (double x : data) mean += x;
  mean /= static_cast<double>(n);
  if (variant == EbVariant::MeanRange) {
    const auto [lo, hi] = std::minmax_element(data.begin(), data.end());
    const double range = *hi - *lo;
    if (!(range > 0.0)) throw std::invalid_argument("eb_hyper: zero range");
    return {mean, range * range};
  }
  double ss = 0.0;
  for (double x : data) ss += (x - mean) * (x - mean);
  const double var = ss / static_cast<double>(n);
  if (!(var > 0.0)) throw std::invalid_argument("eb_hyper: zero variance");
  return {mean, var};
}

// Affine prior transport between Gaussian base measures: an atom drawn from
// N(m_k, s_l^2) maps to rho (theta' - m_k) + m ~ N(m, s^2), rho = (s^2/s_l^2)^{1/2}.
inline double transform_gaussian_atoms(double theta_prime, const GaussianBase& from,
                                       const GaussianBase& to) {
  const double rho = std::sqrt(to.s2 / from.s2);
  return rho * (theta_prime - from.m) + to.m;
}

struct GaussMixtureState {
  std::vector<double> weights;
  std::vector<double> atoms;  // component locations, real line
  std::vector<int> alloc;
  std::vector<double> slices;
  double remainder = 1.0;
  int n_nonempty = 0;
  double sigma = 1.0;  // shared scale

  int k_star() const { return static_cast<int>(weights.size()); }
};

struct DensityChainConfig {
  int n_iter = 4000;
  int burn_in = 2000;
  int thin = 1;
  double zeta = 1.0;
  std::uint64_t seed = 1;
  double alpha = 1.0;  // DP total mass
  double nu1 = 1.0, nu2 = 1.0;
  std::vector<double> grid;  // defaults to data range +- 4 prior sd, 1024 pts
  double record_tail_eps = 1e-8;

  void validate() const {
    if (n_iter < 0 || burn_in < 0 || burn_in > n_iter)
      throw std::invalid_argument("DensityChainConfig: need 0 <= burn_in <= n_iter");
    if (thin < 1) throw std::invalid_argument("DensityChainConfig: thin must be >= 1");
    if (!(zeta > 0.0 && zeta <= 1.0))
      throw std::invalid_argument("DensityChainConfig: zeta must be in (0, 1]");
    if (!(alpha > 0.0 && nu1 > 0.0 && nu2 > 0.0))
      throw std::invalid_argument("DensityChainConfig: alpha, nu1, nu2 must be > 0");
  }
};

struct RecordedComponent {
  double weight;
  double location;
};

struct DensityTrace {
  std::vector<double> grid;
  std::vector<long> sweeps;
  std::vector<std::vector<double>> density;
  std::vector<int> k_star;
  std::vector<int> k_nonempty;
  std::vector<double> sigma;
  std::vector<std::vector<RecordedComponent>> components;

  std::size_t size() const { return sweeps.size(); }
};

inline double gaussian_kernel(double theta, double x, double sigma) {
  const double z = (x - theta) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * 2.5066282746310005024);
}

namespace detail {

inline double conjugate_location_draw(const GaussianBase& base, double sum_x,
                                      int n_k, double sigma2, Rng& rng) {
  const double prec = 1.0 / base.s2 + static_cast<double>(n_k) / sigma2;
  const double v = 1.0 / prec;
  const double mean = v * (base.m / base.s2 + sum_x / sigma2);
  return rng.normal(mean, std::sqrt(v));
}

}  // namespace detail

// Conjugate slice Gibbs for the Dirichlet-process location mixture with a
// shared inverse-gamma scale: per sweep, slices, stick extension, allocation
// under the Gaussian kernel, conjugate normal draws for non-empty locations,
// Dirichlet weights, then sigma^2 ~ IG(nu1 + n/2, nu2 + sum_i (x_i - theta_{c_i})^2 / 2).
inline DensityTrace run_density_chain(const std::vector<double>& data,
                                      const GaussianBase& base,
                                      const DensityChainConfig& config) {
  config.validate();
  if (data.empty()) throw std::invalid_argument("run_density_chain: data empty");
  for (double x : data)
    if (!std::isfinite(x))
      throw std::invalid_argument("run_density_chain: non-finite observation");

  const std::size_t n = data.size();
  Rng rng = Rng::stream(config.seed, {0x64656e73697479ULL});

  DensityTrace trace;
  if (config.grid.empty()) {
    const auto [lo, hi] = std::minmax_element(data.begin(), data.end());
    const double pad = 4.0 * std::sqrt(base.s2);
    trace.grid.resize(1024);
    for (std::size_t i = 0; i < trace.grid.size(); ++i)
      trace.grid[i] = *lo - pad + (*hi - *lo + 2.0 * pad) * i / (trace.grid.size() - 1.0);
  } else {
    trace.grid = config.grid;
  }

  GaussMixtureState state;
  state.sigma = std::sqrt(config.nu2 / config.nu1);
  state.alloc.resize(n);
  state.slices.assign(n, 0.0);
  state.weights.assign(n, 0.0);
  state.atoms.assign(n, 0.0);
  state.n_nonempty = static_cast<int>(n);
  for (std::size_t i = 0; i < n; ++i) {
    state.alloc[i] = static_cast<int>(i);
    state.atoms[i] = detail::conjugate_location_draw(base, data[i], 1,
                                                     state.sigma * state.sigma, rng);
  }
  detail::dirichlet_weights(state, config.alpha, rng);

  const auto prior_atom = [&](Rng& r) { return r.normal(base.m, std::sqrt(base.s2)); };

  for (int sweep = 1; sweep <= config.n_iter; ++sweep) {
    detail::slice_update(state, config.zeta, rng);
    detail::stick_extend(state, config.alpha, prior_atom, rng);
    const int k_star_now = state.k_star();
    detail::allocate(state, data, config.zeta,
                     [&](double theta, double x) {
                       return gaussian_kernel(theta, x, state.sigma);
                     },
                     rng);

    const auto counts = detail::cluster_counts(state);
    std::vector<double> sums(state.n_nonempty, 0.0);
    for (std::size_t i = 0; i < n; ++i) sums[state.alloc[i]] += data[i];
    const double sigma2 = state.sigma * state.sigma;
    for (int k = 0; k < state.n_nonempty; ++k)
      state.atoms[k] =
          detail::conjugate_location_draw(base, sums[k], counts[k], sigma2, rng);

    detail::dirichlet_weights(state, config.alpha, rng);

    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = data[i] - state.atoms[state.alloc[i]];
      ss += d * d;
    }
    const double precision_draw =
        rng.gamma(config.nu1 + 0.5 * static_cast<double>(n), config.nu2 + 0.5 * ss);
    state.sigma = std::sqrt(1.0 / precision_draw);

    if (sweep > config.burn_in && (sweep - config.burn_in - 1) % config.thin == 0) {
      GaussMixtureState full = state;
      Rng fork = Rng::stream(config.seed,
                             {0x7265636f7264ULL, static_cast<std::uint64_t>(sweep)});
      while (full.remainder >= config.record_tail_eps) {
        const double v = fork.beta(1.0, config.alpha);
        full.weights.push_back(v * full.remainder);
        full.atoms.push_back(prior_atom(fork));
        full.remainder *= (1.0 - v);
      }
      std::vector<double> row(trace.grid.size(), 0.0);
      std::vector<RecordedComponent> comps(full.weights.size());
      for (std::size_t k = 0; k < full.weights.size(); ++k) {
        comps[k] = {full.weights[k], full.atoms[k]};
        for (std::size_t j = 0; j < trace.grid.size(); ++j)
          row[j] += full.weights[k] *
                    gaussian_kernel(full.atoms[k], trace.grid[j], full.sigma);
      }
      trace.sweeps.push_back(sweep);
      trace.density.push_back(std::move(row));
      trace.k_star.push_back(k_star_now);
      trace.k_nonempty.push_back(state.n_nonempty);
      trace.sigma.push_back(state.sigma);
      trace.components.push_back(std::move(comps));
    }
  }
  return trace;
}

}  // namespace dpmix

#endif  // DPMIX_GAUSSIAN_DPM_HPP
