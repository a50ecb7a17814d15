#ifndef DPMIX_MIXTURE_HPP
#define DPMIX_MIXTURE_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dpmix/base_measure.hpp"
#include "dpmix/rng.hpp"
#include "dpmix/slice_core.hpp"

namespace dpmix {

enum class Strategy { EmpiricalBayes, FixedGamma, Hierarchical };

inline const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::EmpiricalBayes: return "empirical";
    case Strategy::FixedGamma: return "fixed";
    case Strategy::Hierarchical: return "hierarchical";
  }
  throw std::logic_error("strategy_name: bad value");
}

// Stick-breaking state of the Dirichlet process mixture of uniforms.
// Clusters are ordered by appearance with represented empty clusters at the
// tail; weights sum with the remainder to one.
struct MixtureState {
  std::vector<double> weights;  // w_k, length K*
  std::vector<double> atoms;    // theta*_k in (0, T], length K*
  std::vector<int> alloc;       // c_i, per event
  std::vector<double> slices;   // u_i, per event
  double remainder = 1.0;       // r = 1 - sum(w)
  int n_nonempty = 0;           // K_N
  double horizon = 8.0;

  int k_star() const { return static_cast<int>(weights.size()); }

  void audit(const std::vector<double>& events, double zeta,
             bool check_slice_bound = true) const {
    detail::audit_state(*this, events, zeta,
                        [](double theta, double w) { return w <= theta; },
                        check_slice_bound);
  }
};

// Concentration, base rate, total mass, and their prior hyperparameters.
struct HyperState {
  double A = 10.0;
  double gamma = 1.0;
  double M = 1.0;
  double a_A = 0.1, b_A = 0.1;
  double a_gamma = 1.0, b_gamma = 1.0;
  double a_M = 0.1, b_M = 0.1;
  Strategy strategy = Strategy::EmpiricalBayes;

  void validate() const {
    for (double v : {A, gamma, M, a_A, b_A, a_gamma, b_gamma, a_M, b_M})
      if (!(v > 0.0)) throw std::invalid_argument("HyperState: fields must be > 0");
  }
};

// Stick-breaking prior draw truncated when the remainder drops below eps;
// atoms iid from the base measure, no allocations.
inline MixtureState sample_prior(double concentration, const BaseMeasure& base,
                                 double eps, Rng& rng) {
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("sample_prior: eps must be in (0, 1)");
  MixtureState state;
  state.horizon = base.horizon;
  while (state.remainder >= eps) {
    const double v = rng.beta(1.0, concentration);
    state.weights.push_back(v * state.remainder);
    state.atoms.push_back(sample(base, rng));
    state.remainder *= (1.0 - v);
  }
  return state;
}

// lambda_bar(t) = sum_k w_k 1{t < theta_k} / theta_k over represented
// clusters; the stick remainder is ignored (see eval_bar_lambda_bounds).
inline double eval_bar_lambda(const MixtureState& state, double t) {
  if (!(t >= 0.0 && t <= state.horizon))
    throw std::domain_error("eval_bar_lambda: t outside [0, T]");
  double v = 0.0;
  for (std::size_t k = 0; k < state.weights.size(); ++k)
    if (t < state.atoms[k]) v += state.weights[k] / state.atoms[k];
  return v;
}

struct DensityBounds {
  double lower;
  double upper;
};

// Interval accounting for the unresolved remainder mass: atoms hiding in the
// tail can add at most r/t at time t.
inline DensityBounds eval_bar_lambda_bounds(const MixtureState& state, double t) {
  const double v = eval_bar_lambda(state, t);
  if (state.remainder <= 1e-12) return {v, v};
  if (t <= 0.0) return {v, std::numeric_limits<double>::infinity()};
  return {v, v + state.remainder / t};
}

// Evaluate on an ascending grid in O(K + G + K log G): each cluster bumps the
// last grid point strictly below its atom, then a suffix sum accumulates.
inline std::vector<double> eval_bar_lambda_grid(const MixtureState& state,
                                                const std::vector<double>& grid) {
  std::vector<double> bump(grid.size(), 0.0);
  for (std::size_t k = 0; k < state.weights.size(); ++k) {
    const double theta = state.atoms[k];
    const auto it = std::lower_bound(grid.begin(), grid.end(), theta);
    if (it == grid.begin()) continue;  // no grid point below theta
    bump[static_cast<std::size_t>(it - grid.begin()) - 1] += state.weights[k] / theta;
  }
  double acc = 0.0;
  for (std::size_t j = grid.size(); j-- > 0;) {
    acc += bump[j];
    bump[j] = acc;
  }
  return bump;
}

inline std::vector<double> intensity_draw(const MixtureState& state, double total_mass,
                                          const std::vector<double>& grid) {
  auto v = eval_bar_lambda_grid(state, grid);
  for (double& x : v) x *= total_mass;
  return v;
}

// Snapshot serialization for resumable chains.
inline void to_json(nlohmann::json& j, const MixtureState& s) {
  j = nlohmann::json{{"w", s.weights},   {"theta", s.atoms},
                     {"c", s.alloc},     {"u", s.slices},
                     {"r", s.remainder}, {"k_nonempty", s.n_nonempty},
                     {"horizon", s.horizon}};
}

inline void from_json(const nlohmann::json& j, MixtureState& s) {
  j.at("w").get_to(s.weights);
  j.at("theta").get_to(s.atoms);
  j.at("c").get_to(s.alloc);
  j.at("u").get_to(s.slices);
  j.at("r").get_to(s.remainder);
  j.at("k_nonempty").get_to(s.n_nonempty);
  j.at("horizon").get_to(s.horizon);
}

}  // namespace dpmix

#endif  // DPMIX_MIXTURE_HPP
