#pragma once

// Classical post-annealing correction. MQC merges two samples by choosing,
// independently per connected component of their disagreement region, the
// parent whose restriction contributes less energy (couplers across
// components are zero by construction, so the choices do not interact).
// SQC is a greedy single-flip descent to a 1-flip local minimum.

#include <stdexcept>
#include <vector>

#include "rqa/ising.hpp"

namespace rqa {

namespace detail {

inline std::vector<std::vector<std::pair<int, double>>> adjacency(const IsingModel& m) {
  std::vector<std::vector<std::pair<int, double>>> adj(static_cast<std::size_t>(m.n));
  for (const auto& [k, v] : m.j) {
    adj[static_cast<std::size_t>(k.first)].push_back({k.second, v});
    adj[static_cast<std::size_t>(k.second)].push_back({k.first, v});
  }
  return adj;
}

}  // namespace detail

struct DisagreementComponent {
  std::vector<int> spins;
};

inline std::vector<DisagreementComponent> disagreement_components(const IsingModel& m,
                                                                  const SpinVector& a,
                                                                  const SpinVector& b) {
  check_spins(m, a);
  check_spins(m, b);
  auto adj = detail::adjacency(m);
  std::vector<bool> differs(static_cast<std::size_t>(m.n), false);
  for (int i = 0; i < m.n; ++i)
    differs[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i)] != b[static_cast<std::size_t>(i)];

  std::vector<DisagreementComponent> comps;
  std::vector<bool> seen(static_cast<std::size_t>(m.n), false);
  for (int start = 0; start < m.n; ++start) {
    if (!differs[static_cast<std::size_t>(start)] || seen[static_cast<std::size_t>(start)]) continue;
    DisagreementComponent comp;
    std::vector<int> stack{start};
    seen[static_cast<std::size_t>(start)] = true;
    while (!stack.empty()) {
      int i = stack.back();
      stack.pop_back();
      comp.spins.push_back(i);
      for (const auto& [j, w] : adj[static_cast<std::size_t>(i)]) {
        (void)w;
        if (differs[static_cast<std::size_t>(j)] && !seen[static_cast<std::size_t>(j)]) {
          seen[static_cast<std::size_t>(j)] = true;
          stack.push_back(j);
        }
      }
    }
    comps.push_back(std::move(comp));
  }
  return comps;
}

inline SpinVector mqc_combine(const IsingModel& m, const SpinVector& a, const SpinVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("sample length mismatch");
  check_spins(m, a);
  SpinVector out = a;

  auto comps = disagreement_components(m, a, b);
  if (comps.empty()) return out;
  auto adj = detail::adjacency(m);
  std::vector<bool> differs(static_cast<std::size_t>(m.n), false);
  for (int i = 0; i < m.n; ++i)
    differs[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i)] != b[static_cast<std::size_t>(i)];

  for (const auto& comp : comps) {
    std::vector<bool> in_comp(static_cast<std::size_t>(m.n), false);
    for (int i : comp.spins) in_comp[static_cast<std::size_t>(i)] = true;

    // Energy contribution of a parent's restriction: bias terms, couplers
    // internal to the component and couplers into the agreed region.
    auto contribution = [&](const SpinVector& parent) {
      double e = 0.0;
      for (int i : comp.spins) {
        double si = parent[static_cast<std::size_t>(i)];
        e += m.h[static_cast<std::size_t>(i)] * si;
        for (const auto& [j, w] : adj[static_cast<std::size_t>(i)]) {
          if (in_comp[static_cast<std::size_t>(j)]) {
            if (j > i) e += w * si * parent[static_cast<std::size_t>(j)];
          } else if (!differs[static_cast<std::size_t>(j)]) {
            e += w * si * a[static_cast<std::size_t>(j)];
          }
          // Other components contribute nothing: J across components is zero.
        }
      }
      return e;
    };

    const SpinVector& pick = contribution(b) < contribution(a) ? b : a;
    for (int i : comp.spins) out[static_cast<std::size_t>(i)] = pick[static_cast<std::size_t>(i)];
  }
  return out;
}

// Left-fold pairwise reduction in batch order; the result's energy never
// exceeds the batch minimum.
inline SpinVector mqc_tournament(const IsingModel& m, const std::vector<SpinVector>& batch) {
  if (batch.empty()) throw std::invalid_argument("mqc tournament requires a non-empty batch");
  SpinVector winner = batch.front();
  for (std::size_t i = 1; i < batch.size(); ++i) winner = mqc_combine(m, winner, batch[i]);
  return winner;
}

// Sweeps in index order, flipping any spin whose flip strictly lowers the
// energy; ties never flip. Terminates at the first clean sweep, with a
// 10*N sweep guard against pathological float behavior.
inline SpinVector sqc(const IsingModel& m, const SpinVector& z) {
  check_spins(m, z);
  auto adj = detail::adjacency(m);
  SpinVector s = z;
  int max_sweeps = 10 * std::max(1, m.n);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool flipped = false;
    for (int i = 0; i < m.n; ++i) {
      double local = m.h[static_cast<std::size_t>(i)];
      for (const auto& [j, w] : adj[static_cast<std::size_t>(i)])
        local += w * s[static_cast<std::size_t>(j)];
      double delta = -2.0 * s[static_cast<std::size_t>(i)] * local;
      if (delta < 0.0) {
        s[static_cast<std::size_t>(i)] = static_cast<std::int8_t>(-s[static_cast<std::size_t>(i)]);
        flipped = true;
      }
    }
    if (!flipped) break;
  }
  return s;
}

}  // namespace rqa
