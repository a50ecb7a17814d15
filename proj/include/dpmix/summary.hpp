#ifndef DPMIX_SUMMARY_HPP
#define DPMIX_SUMMARY_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace dpmix {

struct GridFunction {
  std::vector<double> grid;
  std::vector<double> values;
};

inline double trapezoid(const std::vector<double>& grid,
                        const std::vector<double>& values) {
  double acc = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    acc += 0.5 * (grid[i] - grid[i - 1]) * (values[i] + values[i - 1]);
  return acc;
}

// Empirical quantile with linear interpolation between order statistics;
// q = 0.5 gives the mean-of-order-statistics median.
inline double empirical_quantile(std::vector<double>& scratch, double q) {
  const std::size_t n = scratch.size();
  if (n == 0) throw std::invalid_argument("empirical_quantile: empty sample");
  std::sort(scratch.begin(), scratch.end());
  const double pos = q * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= n) return scratch[n - 1];
  const double frac = pos - static_cast<double>(lo);
  return scratch[lo] * (1.0 - frac) + scratch[lo + 1] * frac;
}

struct BandSummary {
  GridFunction median;
  GridFunction low;
  GridFunction high;
};

// Pointwise median and empirical quantile band across retained sweeps.
inline BandSummary summarize(const std::vector<std::vector<double>>& draws,
                             const std::vector<double>& grid, double q_low = 0.1,
                             double q_high = 0.9) {
  if (draws.empty()) throw std::invalid_argument("summarize: empty trace");
  if (!(q_low >= 0.0 && q_low <= q_high && q_high <= 1.0))
    throw std::invalid_argument("summarize: bad quantile pair");
  BandSummary out;
  out.median.grid = out.low.grid = out.high.grid = grid;
  out.median.values.resize(grid.size());
  out.low.values.resize(grid.size());
  out.high.values.resize(grid.size());
  std::vector<double> column(draws.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    for (std::size_t s = 0; s < draws.size(); ++s) column[s] = draws[s][j];
    std::vector<double> scratch = column;
    out.low.values[j] = empirical_quantile(scratch, q_low);
    scratch = column;
    out.median.values[j] = empirical_quantile(scratch, 0.5);
    scratch = column;
    out.high.values[j] = empirical_quantile(scratch, q_high);
  }
  return out;
}

// L2 follows the squared convention (trapezoid of the squared difference);
// callers wanting the norm take the square root.
enum class DistanceKind { L1, L2, Sup };

inline double distance(const GridFunction& f, const GridFunction& g, DistanceKind kind) {
  if (f.grid != g.grid) throw std::invalid_argument("distance: grid mismatch");
  if (f.values.size() != f.grid.size() || g.values.size() != g.grid.size())
    throw std::invalid_argument("distance: values/grid size mismatch");
  std::vector<double> d(f.grid.size());
  switch (kind) {
    case DistanceKind::L1:
      for (std::size_t i = 0; i < d.size(); ++i)
        d[i] = std::abs(f.values[i] - g.values[i]);
      return trapezoid(f.grid, d);
    case DistanceKind::L2:
      for (std::size_t i = 0; i < d.size(); ++i) {
        const double e = f.values[i] - g.values[i];
        d[i] = e * e;
      }
      return trapezoid(f.grid, d);
    case DistanceKind::Sup: {
      double sup = 0.0;
      for (std::size_t i = 0; i < d.size(); ++i)
        sup = std::max(sup, std::abs(f.values[i] - g.values[i]));
      return sup;
    }
  }
  throw std::logic_error("distance: bad kind");
}

}  // namespace dpmix

#endif  // DPMIX_SUMMARY_HPP
