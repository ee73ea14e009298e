#pragma once

// Ising model representation, energy evaluation, exhaustive ground-state
// oracle and the model transforms used by the annealing pipeline
// (scaling, hardware clamping, coefficient quantization, spin-reversal
// gauges).

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace rqa {

using SpinVector = std::vector<std::int8_t>;  // entries are -1 or +1
using Gauge = std::vector<std::int8_t>;       // entries are -1 or +1

// Hardware coefficient ranges.
inline constexpr double kHRange = 2.0;  // -2 <= h <= +2
inline constexpr double kJRange = 1.0;  // -1 <= J <= +1

struct IsingModel {
  int n = 0;
  std::vector<double> h;                         // size n
  std::map<std::pair<int, int>, double> j;       // key (i, j) with i < j, 0-based

  IsingModel() = default;
  explicit IsingModel(int num_spins) : n(num_spins), h(static_cast<std::size_t>(num_spins), 0.0) {}

  // Stores a coupler in canonical form: ordered key, zeros dropped.
  void set_j(int a, int b, double value) {
    if (a == b) throw std::invalid_argument("coupler requires distinct spins");
    if (a > b) std::swap(a, b);
    if (a < 0 || b >= n) throw std::invalid_argument("coupler index out of range");
    if (value == 0.0) {
      j.erase({a, b});
    } else {
      j[{a, b}] = value;
    }
  }

  double get_j(int a, int b) const {
    if (a > b) std::swap(a, b);
    auto it = j.find({a, b});
    return it == j.end() ? 0.0 : it->second;
  }

  double max_abs_h() const {
    double m = 0.0;
    for (double v : h) m = std::max(m, std::fabs(v));
    return m;
  }
  double max_abs_j() const {
    double m = 0.0;
    for (const auto& [k, v] : j) m = std::max(m, std::fabs(v));
    return m;
  }
  double max_abs_coefficient() const { return std::max(max_abs_h(), max_abs_j()); }

  bool within_hardware_range() const {
    return max_abs_h() <= kHRange && max_abs_j() <= kJRange;
  }

  friend bool operator==(const IsingModel&, const IsingModel&) = default;
};

inline void check_spins(const IsingModel& m, const SpinVector& z) {
  if (static_cast<int>(z.size()) != m.n)
    throw std::invalid_argument("spin vector length does not match model");
}

// E(z) = sum_i h_i z_i + sum_{i<j} J_ij z_i z_j
inline double energy(const IsingModel& m, const SpinVector& z) {
  check_spins(m, z);
  double e = 0.0;
  for (int i = 0; i < m.n; ++i) e += m.h[static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(i)];
  for (const auto& [k, v] : m.j)
    e += v * z[static_cast<std::size_t>(k.first)] * z[static_cast<std::size_t>(k.second)];
  return e;
}

// State indexing convention shared by the brute-force oracle and the exact
// sampler: bit i of the index set means spin i is +1.
inline SpinVector spins_from_index(std::uint64_t idx, int n) {
  SpinVector z(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = (idx >> i) & 1 ? 1 : -1;
  return z;
}

inline std::uint64_t index_from_spins(const SpinVector& z) {
  std::uint64_t idx = 0;
  for (std::size_t i = 0; i < z.size(); ++i)
    if (z[i] > 0) idx |= std::uint64_t{1} << i;
  return idx;
}

inline constexpr int kBruteForceMaxSpins = 24;

inline void check_enumerable(const IsingModel& m) {
  if (m.n > kBruteForceMaxSpins)
    throw std::invalid_argument("model too large for exhaustive enumeration (n > 24)");
}

struct GroundState {
  double energy = 0.0;
  std::vector<SpinVector> states;  // all states within 1e-12 of the minimum
};

inline GroundState brute_force_ground(const IsingModel& m) {
  check_enumerable(m);
  constexpr double tol = 1e-12;
  GroundState g;
  g.energy = std::numeric_limits<double>::infinity();
  const std::uint64_t count = std::uint64_t{1} << m.n;
  for (std::uint64_t s = 0; s < count; ++s) {
    SpinVector z = spins_from_index(s, m.n);
    double e = energy(m, z);
    if (e < g.energy - tol) {
      g.energy = e;
      g.states.clear();
      g.states.push_back(std::move(z));
    } else if (e <= g.energy + tol) {
      if (e < g.energy) g.energy = e;
      g.states.push_back(std::move(z));
    }
  }
  // Re-filter against the final minimum.
  std::vector<SpinVector> keep;
  for (auto& z : g.states)
    if (energy(m, z) <= g.energy + tol) keep.push_back(std::move(z));
  g.states = std::move(keep);
  return g;
}

namespace detail {
inline double sum_energies_range(const IsingModel& m, std::uint64_t lo, std::uint64_t hi) {
  if (hi - lo <= 256) {
    double s = 0.0;
    for (std::uint64_t idx = lo; idx < hi; ++idx) s += energy(m, spins_from_index(idx, m.n));
    return s;
  }
  std::uint64_t mid = lo + (hi - lo) / 2;
  return sum_energies_range(m, lo, mid) + sum_energies_range(m, mid, hi);
}
}  // namespace detail

// Sum of E(z) over all 2^n states; zero for every Ising model. Pairwise
// summation keeps the accumulation error well under the 1e-9 * 2^n * max|c|
// tolerance used by the test suites.
inline double sum_all_energies(const IsingModel& m) {
  check_enumerable(m);
  return detail::sum_energies_range(m, 0, std::uint64_t{1} << m.n);
}

inline IsingModel scale(const IsingModel& m, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("scale factor must be positive");
  IsingModel out = m;
  for (double& v : out.h) v *= lambda;
  for (auto& [k, v] : out.j) v *= lambda;
  return out;
}

// Uniform division by the smallest factor that brings every coefficient
// into the hardware ranges; scaling preserves the argmin set where
// truncation would not.
inline IsingModel clamp_to_hardware(const IsingModel& m) {
  double lambda = std::max({1.0, m.max_abs_h() / kHRange, m.max_abs_j() / kJRange});
  if (lambda <= 1.0) return m;
  return scale(m, 1.0 / lambda);
}

enum class RoundMode { Nearest, Truncate };

namespace detail {
inline double quantize_value(double x, double lo, double hi, int levels, RoundMode mode) {
  double step = (hi - lo) / static_cast<double>(levels - 1);
  double pos = (x - lo) / step;
  double idx = mode == RoundMode::Nearest ? std::round(pos) : std::floor(pos);
  if (idx < 0) idx = 0;
  if (idx > levels - 1) idx = levels - 1;
  return lo + idx * step;
}
}  // namespace detail

// Rounds every coefficient onto a uniform grid of 2^bits levels spanning
// its legal range. Requires an in-range model.
inline IsingModel quantize(const IsingModel& m, int bits = 8,
                           RoundMode mode = RoundMode::Nearest) {
  if (bits < 2 || bits > 30) throw std::invalid_argument("quantize requires 2 <= bits <= 30");
  if (!m.within_hardware_range())
    throw std::invalid_argument("quantize requires a model within hardware ranges");
  int levels = 1 << bits;
  IsingModel out(m.n);
  for (int i = 0; i < m.n; ++i)
    out.h[static_cast<std::size_t>(i)] =
        detail::quantize_value(m.h[static_cast<std::size_t>(i)], -kHRange, kHRange, levels, mode);
  for (const auto& [k, v] : m.j)
    out.set_j(k.first, k.second, detail::quantize_value(v, -kJRange, kJRange, levels, mode));
  return out;
}

inline void check_gauge(const IsingModel& m, const Gauge& g) {
  if (static_cast<int>(g.size()) != m.n)
    throw std::invalid_argument("gauge length does not match model");
}

// h_i <- g_i h_i;  J_ij <- g_i g_j J_ij
inline IsingModel apply_gauge(const IsingModel& m, const Gauge& g) {
  check_gauge(m, g);
  IsingModel out(m.n);
  for (int i = 0; i < m.n; ++i)
    out.h[static_cast<std::size_t>(i)] =
        m.h[static_cast<std::size_t>(i)] * g[static_cast<std::size_t>(i)];
  for (const auto& [k, v] : m.j)
    out.set_j(k.first, k.second,
              v * g[static_cast<std::size_t>(k.first)] * g[static_cast<std::size_t>(k.second)]);
  return out;
}

// Maps a sample of the gauged model back to the original frame.
inline SpinVector ungauge(const SpinVector& z, const Gauge& g) {
  if (z.size() != g.size()) throw std::invalid_argument("gauge length does not match sample");
  SpinVector out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i)
    out[i] = static_cast<std::int8_t>(z[i] * g[i]);
  return out;
}

// JSON form: {"n": N, "h": [..], "j": [[i, j, value], ..]} with 1-based
// indices and i < j.
inline nlohmann::json ising_to_json(const IsingModel& m) {
  nlohmann::json out;
  out["n"] = m.n;
  out["h"] = m.h;
  nlohmann::json js = nlohmann::json::array();
  for (const auto& [k, v] : m.j) js.push_back({k.first + 1, k.second + 1, v});
  out["j"] = std::move(js);
  return out;
}

inline IsingModel ising_from_json(const nlohmann::json& in) {
  IsingModel m(in.at("n").get<int>());
  if (m.n < 0) throw std::invalid_argument("ising json: negative spin count");
  m.h = in.at("h").get<std::vector<double>>();
  if (static_cast<int>(m.h.size()) != m.n)
    throw std::invalid_argument("ising json: h length does not match n");
  for (const auto& entry : in.at("j")) {
    int i = entry.at(0).get<int>();
    int jj = entry.at(1).get<int>();
    double v = entry.at(2).get<double>();
    if (i < 1 || jj <= i || jj > m.n)
      throw std::invalid_argument("ising json: coupler indices must satisfy 1 <= i < j <= n");
    if (m.j.count({i - 1, jj - 1}))
      throw std::invalid_argument("ising json: duplicate coupler");
    m.set_j(i - 1, jj - 1, v);
  }
  return m;
}

}  // namespace rqa
