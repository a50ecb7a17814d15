#ifndef DPMIX_SLICE_CORE_HPP
#define DPMIX_SLICE_CORE_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "dpmix/rng.hpp"

// Kernel-agnostic pieces of the slice sampler for stick-breaking mixtures.
// A State exposes: weights, atoms, alloc, slices, remainder, n_nonempty.
// Clusters are kept in order of appearance, non-empty ones first.

namespace dpmix::detail {

template <class State>
void slice_update(State& state, double zeta, Rng& rng) {
  for (std::size_t i = 0; i < state.alloc.size(); ++i) {
    const double cap = std::min(state.weights[state.alloc[i]], zeta);
    state.slices[i] = cap * rng.uniform_open();
  }
}

// Append prior sticks (and atoms) until the remainder drops below the
// smallest slice; returns the number appended. K* = min{k : r_k < u*}.
template <class State, class AtomSampler>
int stick_extend(State& state, double concentration, AtomSampler&& draw_atom, Rng& rng) {
  if (state.slices.empty())
    throw std::logic_error("stick_extend: no slice variables present");
  const double ustar = *std::min_element(state.slices.begin(), state.slices.end());
  if (ustar < 1e-300) throw std::runtime_error("stick_extend: degenerate slice u* < 1e-300");
  int appended = 0;
  while (state.remainder >= ustar) {
    const double v = rng.beta(1.0, concentration);
    state.weights.push_back(v * state.remainder);
    state.atoms.push_back(draw_atom(rng));
    state.remainder *= (1.0 - v);
    ++appended;
  }
  return appended;
}

// Unnormalized allocation weights of one observation over all represented
// clusters: kernel(theta_k, x) * w_k / min(zeta, w_k) on {u < min(zeta, w_k)}.
template <class State, class Kernel>
std::vector<double> allocation_weights(const State& state, double x, double u,
                                       double zeta, Kernel&& kernel) {
  std::vector<double> w(state.weights.size(), 0.0);
  for (std::size_t k = 0; k < state.weights.size(); ++k) {
    const double cap = std::min(zeta, state.weights[k]);
    if (u < cap) w[k] = kernel(state.atoms[k], x) * state.weights[k] / cap;
  }
  return w;
}

// Relabel clusters by order of first appearance in the allocation sequence;
// represented empty clusters keep their relative order at the tail.
template <class State>
void reorder_by_appearance(State& state) {
  const std::size_t K = state.weights.size();
  std::vector<int> new_label(K, -1);
  std::vector<std::size_t> order;
  order.reserve(K);
  for (int c : state.alloc) {
    if (new_label[c] < 0) {
      new_label[c] = static_cast<int>(order.size());
      order.push_back(static_cast<std::size_t>(c));
    }
  }
  state.n_nonempty = static_cast<int>(order.size());
  for (std::size_t k = 0; k < K; ++k)
    if (new_label[k] < 0) order.push_back(k);

  std::vector<double> w(K), a(K);
  for (std::size_t pos = 0; pos < K; ++pos) {
    w[pos] = state.weights[order[pos]];
    a[pos] = state.atoms[order[pos]];
  }
  state.weights = std::move(w);
  state.atoms = std::move(a);
  for (int& c : state.alloc) c = new_label[c];
}

template <class State, class Kernel>
void allocate(State& state, const std::vector<double>& data, double zeta,
              Kernel&& kernel, Rng& rng) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto probs =
        allocation_weights(state, data[i], state.slices[i], zeta, kernel);
    double total = 0.0;
    for (double p : probs) total += p;
    if (!(total > 0.0))
      throw std::runtime_error("allocate: slice produced empty support");
    state.alloc[i] = static_cast<int>(rng.categorical(probs));
  }
  reorder_by_appearance(state);
}

template <class State>
std::vector<int> cluster_counts(const State& state) {
  std::vector<int> counts(state.n_nonempty, 0);
  for (int c : state.alloc) ++counts[c];
  return counts;
}

// Joint Dirichlet(n_1, ..., n_K, A) draw of the non-empty weights and the
// remainder; represented empty clusters are dropped (the next stick
// extension regenerates them from the prior).
template <class State>
void dirichlet_weights(State& state, double concentration, Rng& rng) {
  const auto counts = cluster_counts(state);
  std::vector<double> alpha(counts.begin(), counts.end());
  alpha.push_back(concentration);
  const auto draw = rng.dirichlet(alpha);
  state.weights.assign(draw.begin(), draw.end() - 1);
  state.atoms.resize(state.n_nonempty);
  state.remainder = draw.back();
}

// Invariant audit: simplex within 1e-12, positive weights, slice consistency,
// and kernel feasibility of every allocation. The slice upper bound
// u_i < min(w_c, zeta) only holds between the slice refresh and the weight
// redraw of a sweep; pass check_slice_bound = false at sweep boundaries.
template <class State, class Feasible>
void audit_state(const State& state, const std::vector<double>& data, double zeta,
                 Feasible&& feasible, bool check_slice_bound = true) {
  if (state.weights.size() != state.atoms.size())
    throw std::logic_error("audit: weights/atoms size mismatch");
  double total = state.remainder;
  for (double w : state.weights) {
    if (!(w > 0.0)) throw std::logic_error("audit: non-positive weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::logic_error("audit: simplex violated");
  if (state.remainder < 0.0) throw std::logic_error("audit: negative remainder");
  if (state.alloc.size() != data.size() || state.slices.size() != data.size())
    throw std::logic_error("audit: allocation/slice size mismatch");
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int c = state.alloc[i];
    if (c < 0 || c >= static_cast<int>(state.weights.size()))
      throw std::logic_error("audit: allocation out of range");
    if (c >= state.n_nonempty)
      throw std::logic_error("audit: allocation points to an empty-tail cluster");
    if (!(state.slices[i] > 0.0))
      throw std::logic_error("audit: non-positive slice variable");
    if (check_slice_bound &&
        !(state.slices[i] < std::min(state.weights[c], zeta)))
      throw std::logic_error("audit: slice out of (0, min(w_c, zeta))");
    if (!feasible(state.atoms[c], data[i]))
      throw std::logic_error("audit: infeasible allocation");
  }
}

}  // namespace dpmix::detail

#endif  // DPMIX_SLICE_CORE_HPP
