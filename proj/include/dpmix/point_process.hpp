#ifndef DPMIX_POINT_PROCESS_HPP
#define DPMIX_POINT_PROCESS_HPP

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpmix/rng.hpp"
#include "dpmix/truth.hpp"

namespace dpmix {

struct PointProcessSample {
  std::vector<double> events;  // strictly ascending, all in [0, T]
  std::int64_t n = 0;          // scaling factor of the intensity n * lambda_bar
  double horizon = 8.0;
  std::uint64_t seed = 0;
  std::optional<TruthId> truth;
};

namespace detail {

inline double grid_sup(const std::function<double(double)>& f, double T, int points) {
  double sup = 0.0;
  for (int i = 0; i < points; ++i) {
    const double t = T * static_cast<double>(i) / (points - 1);
    const double v = f(t);
    if (!std::isfinite(v) || v < 0.0)
      throw std::invalid_argument("simulate: intensity not finite and non-negative on grid");
    sup = std::max(sup, v);
  }
  if (!(sup > 0.0)) throw std::invalid_argument("simulate: intensity vanishes on grid");
  return sup;
}

// Lewis-Shedler thinning against the constant bound n*B: homogeneous
// candidates by exponential spacings, each kept with probability
// lambda_bar(t)/B.
inline PointProcessSample thin(const std::function<double(double)>& bar_lambda,
                               double bound, std::int64_t n, double T,
                               std::uint64_t seed) {
  if (n < 0) throw std::invalid_argument("simulate: n must be >= 0");
  if (!(T > 0.0)) throw std::invalid_argument("simulate: horizon must be > 0");
  if (!std::isfinite(bound) || !(bound > 0.0))
    throw std::invalid_argument("simulate: unbounded intensity");
  PointProcessSample out;
  out.n = n;
  out.horizon = T;
  out.seed = seed;
  if (n == 0) return out;
  Rng rng = Rng::stream(seed, {0x706f697373ULL});
  const double rate = static_cast<double>(n) * bound;
  double t = 0.0;
  for (;;) {
    t += rng.exponential(rate);
    if (t > T) break;
    if (rng.uniform() * bound <= bar_lambda(t) &&
        (out.events.empty() || t > out.events.back()))
      out.events.push_back(t);
  }
  return out;
}

}  // namespace detail

// Simulate a Poisson process with intensity n * lambda_bar on [0, T].
// The thinning bound is the sup of lambda_bar over a 4096-point grid; exact
// for the monotone truth intensities, inflated by 5% for arbitrary callables.
inline PointProcessSample simulate(const NormalizedIntensity& bar_lambda,
                                   std::int64_t n, std::uint64_t seed) {
  const double T = bar_lambda.horizon();
  const auto f = [&](double t) { return bar_lambda.eval_bar(t); };
  const double bound = detail::grid_sup(f, T, 4096);
  PointProcessSample s = detail::thin(f, bound, n, T, seed);
  s.truth = bar_lambda.base.id;
  return s;
}

inline PointProcessSample simulate(const std::function<double(double)>& bar_lambda,
                                   std::int64_t n, double T, std::uint64_t seed) {
  const double bound = 1.05 * detail::grid_sup(bar_lambda, T, 4096);
  return detail::thin(bar_lambda, bound, n, T, seed);
}

// Event file format: one header line `# T=<float> n=<int> seed=<int>`
// (plus optional ` truth=<name>`), then one ascending event time per line,
// 17 significant digits so that load(save(s)) == s bit-exactly.
inline void save_events(const PointProcessSample& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_events: cannot open " + path);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "# T=%.17g n=%lld seed=%llu", s.horizon,
                static_cast<long long>(s.n), static_cast<unsigned long long>(s.seed));
  out << buf;
  if (s.truth) out << " truth=" << truth_name(*s.truth);
  out << "\n";
  for (double w : s.events) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", w);
    out << buf;
  }
  if (!out) throw std::runtime_error("save_events: write failed for " + path);
}

inline PointProcessSample load_events(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_events: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.empty() || line[0] != '#')
    throw std::runtime_error("load_events: missing header line in " + path);

  PointProcessSample s;
  bool have_T = false, have_n = false, have_seed = false;
  std::istringstream header(line.substr(1));
  std::string tok;
  while (header >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("load_events: malformed header token '" + tok + "'");
    const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    try {
      if (key == "T") {
        s.horizon = std::stod(val);
        have_T = true;
      } else if (key == "n") {
        s.n = std::stoll(val);
        have_n = true;
      } else if (key == "seed") {
        s.seed = std::stoull(val);
        have_seed = true;
      } else if (key == "truth") {
        s.truth = truth_from_name(val);
      } else {
        throw std::runtime_error("unknown key");
      }
    } catch (const std::exception&) {
      throw std::runtime_error("load_events: malformed header token '" + tok + "'");
    }
  }
  if (!have_T || !have_n || !have_seed)
    throw std::runtime_error("load_events: header must carry T=, n=, seed=");
  if (s.n < 0) throw std::runtime_error("load_events: negative n in header");

  int line_no = 1;
  double prev = -1.0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::size_t pos = 0;
    double w;
    try {
      w = std::stod(line, &pos);
    } catch (const std::exception&) {
      throw std::runtime_error("load_events: malformed row at line " +
                               std::to_string(line_no));
    }
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    if (pos != line.size())
      throw std::runtime_error("load_events: malformed row at line " +
                               std::to_string(line_no));
    if (!(w >= 0.0 && w <= s.horizon))
      throw std::runtime_error("load_events: event outside horizon at line " +
                               std::to_string(line_no));
    if (w == prev)
      throw std::runtime_error("load_events: duplicate event time at line " +
                               std::to_string(line_no));
    if (w < prev)
      throw std::runtime_error("load_events: events not sorted at line " +
                               std::to_string(line_no));
    s.events.push_back(w);
    prev = w;
  }
  return s;
}

}  // namespace dpmix

#endif  // DPMIX_POINT_PROCESS_HPP
