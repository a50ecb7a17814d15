#ifndef DPMIX_GIBBS_HPP
#define DPMIX_GIBBS_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpmix/base_measure.hpp"
#include "dpmix/mixture.hpp"
#include "dpmix/point_process.hpp"
#include "dpmix/rng.hpp"
#include "dpmix/slice_core.hpp"

namespace dpmix {

struct GibbsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when the atom accept-reject exceeds its proposal cap instead of
// hanging; the acceptance rate (Wmax/theta)^{n_k} can be dramatically low
// for small base rates with large clusters.
struct ArOverflowError : GibbsError {
  using GibbsError::GibbsError;
};

struct ChainConfig {
  int n_iter = 5000;
  int burn_in = 2500;
  int thin = 1;
  double zeta = 1.0;           // slice threshold; 1 gives the plain slice sampler
  std::uint64_t seed = 1;
  std::vector<double> record_grid;  // defaults to 4096 uniform points on [0, T]
  long ar_max_proposals = 1000000;
  double record_tail_eps = 1e-8;

  void validate() const {
    if (n_iter < 0 || burn_in < 0 || burn_in > n_iter)
      throw std::invalid_argument("ChainConfig: need 0 <= burn_in <= n_iter");
    if (thin < 1) throw std::invalid_argument("ChainConfig: thin must be >= 1");
    if (!(zeta > 0.0 && zeta <= 1.0))
      throw std::invalid_argument("ChainConfig: zeta must be in (0, 1]");
  }
};

struct ChainTrace {
  std::vector<double> grid;
  std::vector<long> sweeps;
  std::vector<std::vector<double>> lambda;  // one row of grid values per record
  std::vector<int> k_star;
  std::vector<int> k_nonempty;
  std::vector<double> concentration;
  std::vector<double> gamma;
  std::vector<double> mass;
  std::vector<double> ar_rate;

  std::size_t size() const { return sweeps.size(); }
};

inline std::vector<double> uniform_grid(double T, std::size_t points) {
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i)
    g[i] = T * static_cast<double>(i) / static_cast<double>(points - 1);
  return g;
}

// --- single-site updates --------------------------------------------------

inline void update_slices(MixtureState& state, double zeta, Rng& rng) {
  detail::slice_update(state, zeta, rng);
}

inline int extend_sticks(MixtureState& state, double concentration,
                         const BaseMeasure& base, Rng& rng) {
  return detail::stick_extend(state, concentration,
                              [&](Rng& r) { return sample(base, r); }, rng);
}

inline double uniform_kernel(double theta, double w) {
  return w <= theta ? 1.0 / theta : 0.0;
}

inline void update_allocations(MixtureState& state, const std::vector<double>& events,
                               double zeta, Rng& rng) {
  detail::allocate(state, events, zeta, uniform_kernel, rng);
}

struct ArStats {
  long proposals = 0;
  long accepts = 0;

  double rate() const {
    return proposals > 0 ? static_cast<double>(accepts) / proposals : 1.0;
  }
};

namespace detail {

// theta ~ density proportional to theta^{-n} on [lo, T], by inverse CDF,
// stable for arbitrarily large n (the (lo/T)^{n-1} term may underflow to 0,
// which only removes mass already below double resolution).
inline double sample_power_law(double lo, double T, long n, Rng& rng) {
  const double u = rng.uniform_open();
  if (n == 1) return lo * std::exp(u * std::log(T / lo));
  const double s = static_cast<double>(n - 1);
  const double tail = std::pow(lo / T, s);
  const double theta = lo * std::pow((1.0 - u) + u * tail, -1.0 / s);
  return std::min(theta, T);
}

}  // namespace detail

namespace detail {

// Probability mass of the base measure on (c, T], in complement space so it
// stays meaningful when the lower cdf is saturated.
inline double base_tail_mass(const BaseMeasure& base, double c) {
  const double a = base.shape_a, gam = base.rate_gamma, T = base.horizon;
  if (c >= T) return 0.0;
  if (base.family == BaseFamily::InvShiftedGamma)
    return boost::math::gamma_q(a, gam * theta_to_u(c, T));
  return (boost::math::gamma_q(a, gam * c) - boost::math::gamma_q(a, gam * T)) /
         boost::math::gamma_p(a, gam * T);
}

// Pre-computed split-domain envelope of the atom conditional
// p(theta) ∝ g(theta) (lo/theta)^n on [lo, T]:
//   on [lo, c]  p <= max_{[lo,c]} g * (lo/theta)^n   (power-law component),
//   on (c, T]   p <= (lo/c)^n * g(theta)             (base tail component).
// The split point is picked from a geometric ladder to minimize the total
// envelope mass, which directly maximizes the acceptance rate.
struct AtomEnvelope {
  double lo, c = 0.0, log_c = 0.0;
  long n;
  double g_max_head = 0.0, log_g_max_head = 0.0;
  double mass_head = 0.0, mass_tail = 0.0;

  AtomEnvelope(const BaseMeasure& base, double lo_, long n_) : lo(lo_), n(n_) {
    const double mode = density_mode(base);
    double best = std::numeric_limits<double>::infinity();
    for (double kappa = 5.0;; kappa *= 4.0) {
      const double cand = std::min(lo * (1.0 + kappa / static_cast<double>(n)),
                                   base.horizon);
      const double g_head = density(base, std::clamp(mode, lo, cand));
      double pow_integral;  // int_lo^cand (lo/theta)^n dtheta
      if (n == 1)
        pow_integral = lo * std::log(cand / lo);
      else
        pow_integral = lo / (n - 1.0) *
                       (1.0 - std::pow(lo / cand, static_cast<double>(n - 1)));
      const double m_head = g_head * pow_integral;
      const double m_tail =
          cand < base.horizon
              ? std::pow(lo / cand, static_cast<double>(n)) *
                    base_tail_mass(base, cand)
              : 0.0;
      if (m_head + m_tail > 0.0 && m_head + m_tail < best) {
        best = m_head + m_tail;
        c = cand;
        log_c = std::log(cand);
        g_max_head = g_head;
        log_g_max_head = std::log(g_head);
        mass_head = m_head;
        mass_tail = m_tail;
      }
      if (cand >= base.horizon) break;
    }
  }

  bool usable() const { return mass_head + mass_tail > 0.0; }
};

}  // namespace detail

// Exact draw from p(theta_k | .) ∝ g_gamma(theta) theta^{-n_k} on [Wmax, T].
// Proposals alternate between two exact rejection schemes: (a) theta ~ G
// truncated to [Wmax, T], accepted with (Wmax/theta)^{n_k}, and (b) the
// split-domain envelope above, accepted with g(theta)/max g on the head and
// (c/theta)^{n_k} on the tail. Scheme (a) wins when the truncated base
// measure concentrates just above Wmax; scheme (b) stays efficient when it
// does not, where (a)'s acceptance rate would be dramatically low.
inline ArStats update_nonempty_atoms(MixtureState& state,
                                     const std::vector<double>& events,
                                     const BaseMeasure& base, Rng& rng,
                                     long max_proposals = 1000000) {
  const auto counts = detail::cluster_counts(state);
  std::vector<double> wmax(state.n_nonempty, 0.0);
  for (std::size_t i = 0; i < events.size(); ++i)
    wmax[state.alloc[i]] = std::max(wmax[state.alloc[i]], events[i]);

  ArStats stats;
  for (int k = 0; k < state.n_nonempty; ++k) {
    if (wmax[k] >= base.horizon) {  // degenerate interval [T, T]
      state.atoms[k] = base.horizon;
      continue;
    }
    const double lo = wmax[k];
    const double log_lo = std::log(lo);
    const detail::AtomEnvelope env(base, lo, counts[k]);

    long tries = 0;
    bool accepted = false;
    while (!accepted) {
      if (++tries > max_proposals) {
        throw ArOverflowError(
            "atom accept-reject exceeded " + std::to_string(max_proposals) +
            " proposals (cluster " + std::to_string(k) + ", n_k=" +
            std::to_string(counts[k]) + ", Wmax=" + std::to_string(lo) +
            ", gamma=" + std::to_string(base.rate_gamma) + ")");
      }
      ++stats.proposals;
      double theta, log_accept;
      if (tries % 2 == 1 || !env.usable()) {
        theta = sample_truncated_above(base, lo, rng);
        log_accept = counts[k] * (log_lo - std::log(theta));
      } else if (rng.uniform() * (env.mass_head + env.mass_tail) < env.mass_head) {
        theta = detail::sample_power_law(lo, env.c, counts[k], rng);
        log_accept = std::log(density(base, theta)) - env.log_g_max_head;
      } else {
        theta = sample_truncated_above(base, env.c, rng);
        log_accept = counts[k] * (env.log_c - std::log(theta));
      }
      if (std::log(rng.uniform_open()) < log_accept) {
        state.atoms[k] = theta;
        ++stats.accepts;
        accepted = true;
      }
    }
  }
  return stats;
}

inline void update_weights(MixtureState& state, double concentration, Rng& rng) {
  detail::dirichlet_weights(state, concentration, rng);
}

// Mixture weight of West's two-component Gamma conditional:
// pi_x / (1 - pi_x) = (a_A + K - 1) / (N (b_A - log x)).
inline double west_mixture_weight(double a_A, double b_A, int k_nonempty, long n_obs,
                                  double x) {
  const double odds =
      (a_A + k_nonempty - 1) / (static_cast<double>(n_obs) * (b_A - std::log(x)));
  return odds / (1.0 + odds);
}

// West (1992) two-step update of the Dirichlet concentration given the number
// of non-empty classes and the observation count.
inline double update_concentration(double A, int k_nonempty, long n_obs, double a_A,
                                   double b_A, Rng& rng) {
  if (n_obs < 1 || k_nonempty < 1)
    throw std::invalid_argument("update_concentration: need n_obs >= 1, K >= 1");
  if (!(a_A + k_nonempty - 1 > 0.0))
    throw std::invalid_argument("update_concentration: a_A + K - 1 must be > 0");
  const double x = rng.beta(A + 1.0, static_cast<double>(n_obs));
  const double rate = b_A - std::log(x);
  const double pi_x = west_mixture_weight(a_A, b_A, k_nonempty, n_obs, x);
  const double shape =
      rng.uniform() < pi_x ? a_A + k_nonempty : a_A + k_nonempty - 1;
  return rng.gamma(shape, rate);
}

// Conjugate rate update, hierarchical strategy only:
// gamma | . ~ Gamma(a_g + a K*, b_g + sum_k 1/(1/theta_k - 1/T)) over all
// represented atoms.
inline double update_gamma(const std::vector<double>& atoms, double shape_a, double T,
                           double a_g, double b_g, Rng& rng) {
  double rate = b_g;
  for (double theta : atoms) {
    if (theta >= T)
      throw GibbsError("update_gamma: atom at the horizon makes the rate infinite");
    rate += theta * T / (T - theta);
  }
  return rng.gamma(a_g + shape_a * static_cast<double>(atoms.size()), rate);
}

inline double update_mass(long n_events, long n_scale, double a_M, double b_M,
                          Rng& rng) {
  return rng.gamma(a_M + static_cast<double>(n_events),
                   b_M + static_cast<double>(n_scale));
}

// --- chain orchestration ----------------------------------------------------

struct SweepStats {
  int k_star = 0;
  ArStats ar;
};

// One full sweep. The concentration update sits between the allocation and
// the weight redraw: West's draw conditions on the partition with the weights
// marginalized out, so the weights must be regenerated from p(w | c, A) under
// the new A before the next slice update conditions on them. The gamma update
// runs while this sweep's represented empty atoms are still in the state;
// update_weights then drops the empties.
inline SweepStats gibbs_sweep(MixtureState& state, const std::vector<double>& events,
                              HyperState& hyper, BaseMeasure& base, double zeta,
                              Rng& rng, long max_proposals = 1000000) {
  SweepStats stats;
  update_slices(state, zeta, rng);
  extend_sticks(state, hyper.A, base, rng);
  update_allocations(state, events, zeta, rng);
  stats.k_star = state.k_star();
  stats.ar = update_nonempty_atoms(state, events, base, rng, max_proposals);
  hyper.A = update_concentration(hyper.A, state.n_nonempty,
                                 static_cast<long>(events.size()), hyper.a_A,
                                 hyper.b_A, rng);
  if (hyper.strategy == Strategy::Hierarchical) {
    hyper.gamma = update_gamma(state.atoms, base.shape_a, base.horizon,
                               hyper.a_gamma, hyper.b_gamma, rng);
    base.rate_gamma = hyper.gamma;
  }
  update_weights(state, hyper.A, rng);
  return stats;
}

// Initial state: one event per cluster in order of appearance, atoms from the
// exact conditional g_gamma(theta) theta^{-1} on [W_i, T] (so the feasibility
// invariant holds from the first sweep), weights ~ Dirichlet(1, ..., 1, A).
inline MixtureState init_state(const std::vector<double>& events,
                               const HyperState& hyper, const BaseMeasure& base,
                               Rng& rng, long max_proposals = 1000000) {
  MixtureState state;
  state.horizon = base.horizon;
  const std::size_t n = events.size();
  state.alloc.resize(n);
  for (std::size_t i = 0; i < n; ++i) state.alloc[i] = static_cast<int>(i);
  state.slices.assign(n, 0.0);
  state.weights.assign(n, 0.0);
  state.atoms.assign(n, 0.0);
  state.n_nonempty = static_cast<int>(n);
  update_nonempty_atoms(state, events, base, rng, max_proposals);
  update_weights(state, hyper.A, rng);
  return state;
}

namespace detail {
// Recorded draws are exact probability densities: the remainder's sticks are
// instantiated from the prior down to tail mass eps, on a copy, from a forked
// substream, so the chain's own stream is untouched by recording.
inline std::vector<double> record_lambda_row(const MixtureState& state,
                                             const HyperState& hyper,
                                             const BaseMeasure& base,
                                             const std::vector<double>& grid,
                                             double eps, std::uint64_t seed,
                                             long sweep) {
  MixtureState full = state;
  Rng fork = Rng::stream(seed, {0x7265636f7264ULL, static_cast<std::uint64_t>(sweep)});
  while (full.remainder >= eps) {
    const double v = fork.beta(1.0, hyper.A);
    full.weights.push_back(v * full.remainder);
    full.atoms.push_back(sample(base, fork));
    full.remainder *= (1.0 - v);
  }
  return eval_bar_lambda_grid(full, grid);
}
}  // namespace detail

// Full chain: slices -> stick extension -> allocation -> atom
// accept-reject -> concentration -> (gamma) -> weights -> mass, recording
// post-burn-in thinned snapshots. Deterministic for a fixed seed.
inline ChainTrace run_chain(const PointProcessSample& sample, const ChainConfig& config,
                            HyperState hyper, BaseMeasure base) {
  config.validate();
  hyper.validate();
  if (sample.events.empty()) throw std::invalid_argument("run_chain: events empty");
  if (sample.horizon != base.horizon)
    throw std::invalid_argument("run_chain: sample and base measure horizons differ");
  if (hyper.strategy == Strategy::Hierarchical &&
      base.family == BaseFamily::TruncatedGamma)
    throw std::invalid_argument(
        "run_chain: hierarchical strategy requires the InvShiftedGamma family "
        "(no conjugate rate update for the truncated gamma)");
  base.rate_gamma = hyper.gamma;

  ChainTrace trace;
  trace.grid = config.record_grid.empty() ? uniform_grid(base.horizon, 4096)
                                          : config.record_grid;

  Rng rng = Rng::stream(config.seed, {0x676962627321ULL});
  MixtureState state;
  try {
    state = init_state(sample.events, hyper, base, rng, config.ar_max_proposals);
  } catch (const ArOverflowError& e) {
    throw ArOverflowError(std::string("initialization: ") + e.what());
  } catch (const std::exception& e) {
    throw GibbsError(std::string("initialization: ") + e.what());
  }

  for (int sweep = 1; sweep <= config.n_iter; ++sweep) {
    SweepStats stats;
    try {
      stats = gibbs_sweep(state, sample.events, hyper, base, config.zeta, rng,
                          config.ar_max_proposals);
      hyper.M = update_mass(static_cast<long>(sample.events.size()), sample.n,
                            hyper.a_M, hyper.b_M, rng);
    } catch (const ArOverflowError& e) {
      throw ArOverflowError("sweep " + std::to_string(sweep) + ": " + e.what());
    } catch (const std::exception& e) {
      throw GibbsError("sweep " + std::to_string(sweep) + ": " + e.what());
    }
#ifndef NDEBUG
    state.audit(sample.events, config.zeta, /*check_slice_bound=*/false);
#endif
    if (sweep > config.burn_in && (sweep - config.burn_in - 1) % config.thin == 0) {
      trace.sweeps.push_back(sweep);
      trace.lambda.push_back(detail::record_lambda_row(
          state, hyper, base, trace.grid, config.record_tail_eps, config.seed, sweep));
      trace.k_star.push_back(stats.k_star);
      trace.k_nonempty.push_back(state.n_nonempty);
      trace.concentration.push_back(hyper.A);
      trace.gamma.push_back(hyper.gamma);
      trace.mass.push_back(hyper.M);
      trace.ar_rate.push_back(stats.ar.rate());
    }
  }
  return trace;
}

}  // namespace dpmix

#endif  // DPMIX_GIBBS_HPP
