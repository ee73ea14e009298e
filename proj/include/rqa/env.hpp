#pragma once

// Stochastic environment standing in for a quantum processing unit. Both
// samplers draw from (an approximation of) the Boltzmann law of the
// submitted model: ExactBoltzmann enumerates the state space, Metropolis
// runs independent single-spin-flip anneals. The request pipeline mirrors
// hardware submission: clamp to coefficient ranges, optionally quantize,
// and distribute reads over random spin-reversal gauges.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "rqa/ising.hpp"
#include "rqa/postprocess.hpp"
#include "rqa/rng.hpp"

namespace rqa {

enum class SamplerKind { ExactBoltzmann, Metropolis };

struct EnvConfig {
  SamplerKind kind = SamplerKind::Metropolis;
  double beta_eff = 1.0;  // ExactBoltzmann inverse temperature
  int sweeps = 50;        // Metropolis sweeps per read
  double beta_start = 0.1;
  double beta_end = 2.0;
  int gauges = 2;
  std::optional<int> quantize_bits;
  RoundMode quantize_mode = RoundMode::Nearest;
  std::uint64_t seed = 0;

  void validate() const {
    if (gauges < 1) throw std::invalid_argument("env requires at least one gauge");
    if (kind == SamplerKind::Metropolis) {
      if (sweeps < 1) throw std::invalid_argument("env requires at least one sweep");
      if (!(beta_start < beta_end))
        throw std::invalid_argument("schedule requires beta_start < beta_end");
      if (!(beta_start > 0)) throw std::invalid_argument("schedule requires beta_start > 0");
    }
  }
};

struct SampleBatch {
  std::vector<SpinVector> samples;               // in the original (ungauged) frame
  std::vector<double> energies;                  // against the post-clamp/quantize model
  std::vector<std::pair<int, int>> provenance;   // (gauge index, read index)
  std::uint64_t work = 0;                        // spin updates / state evaluations
};

inline constexpr int kExactSamplerMaxSpins = 20;

// Probabilities proportional to exp(-beta_eff * E(z)), indexed by the
// shared state convention (bit i set = spin i is +1). Normalized to 1.
inline std::vector<double> exact_boltzmann_distribution(const IsingModel& m, double beta_eff) {
  if (m.n > kExactSamplerMaxSpins)
    throw std::invalid_argument("model too large for the exact sampler (n > 20)");
  const std::uint64_t count = std::uint64_t{1} << m.n;
  std::vector<double> e(count);
  double emin = 0.0;
  for (std::uint64_t s = 0; s < count; ++s) {
    e[s] = energy(m, spins_from_index(s, m.n));
    if (s == 0 || e[s] < emin) emin = e[s];
  }
  std::vector<double> p(count);
  double total = 0.0;
  for (std::uint64_t s = 0; s < count; ++s) {
    p[s] = std::exp(-beta_eff * (e[s] - emin));
    total += p[s];
  }
  for (double& v : p) v /= total;
  return p;
}

namespace detail {

inline SpinVector metropolis_read(const IsingModel& m,
                                  const std::vector<std::vector<std::pair<int, double>>>& adj,
                                  const EnvConfig& cfg, std::mt19937_64& gen) {
  SpinVector s(static_cast<std::size_t>(m.n));
  for (auto& v : s) v = rng::uniform01(gen) < 0.5 ? -1 : 1;
  double ratio = cfg.beta_end / cfg.beta_start;
  for (int sweep = 0; sweep < cfg.sweeps; ++sweep) {
    double frac = cfg.sweeps == 1 ? 1.0 : static_cast<double>(sweep) / (cfg.sweeps - 1);
    double beta = cfg.beta_start * std::pow(ratio, frac);
    for (int i = 0; i < m.n; ++i) {
      double local = m.h[static_cast<std::size_t>(i)];
      for (const auto& [j, w] : adj[static_cast<std::size_t>(i)])
        local += w * s[static_cast<std::size_t>(j)];
      double delta = -2.0 * s[static_cast<std::size_t>(i)] * local;
      if (delta <= 0.0 || rng::uniform01(gen) < std::exp(-beta * delta)) {
        s[static_cast<std::size_t>(i)] = static_cast<std::int8_t>(-s[static_cast<std::size_t>(i)]);
      }
    }
  }
  return s;
}

}  // namespace detail

inline nlohmann::json sample_batch_to_json(const SampleBatch& batch) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& z : batch.samples) {
    nlohmann::json s = nlohmann::json::array();
    for (auto v : z) s.push_back(static_cast<int>(v));
    samples.push_back(std::move(s));
  }
  nlohmann::json prov = nlohmann::json::array();
  for (const auto& [g, r] : batch.provenance) prov.push_back({g, r});
  return nlohmann::json{{"samples", std::move(samples)},
                        {"energies", batch.energies},
                        {"provenance", std::move(prov)}};
}

inline SampleBatch sample(const IsingModel& model, int num_reads, const EnvConfig& cfg) {
  cfg.validate();
  if (num_reads < 1) throw std::invalid_argument("sample requires at least one read");
  if (cfg.kind == SamplerKind::ExactBoltzmann && model.n > kExactSamplerMaxSpins)
    throw std::invalid_argument("model too large for the exact sampler (n > 20)");

  IsingModel prepared = clamp_to_hardware(model);
  if (cfg.quantize_bits) prepared = quantize(prepared, *cfg.quantize_bits, cfg.quantize_mode);

  SampleBatch batch;
  batch.samples.reserve(static_cast<std::size_t>(num_reads));

  int base = num_reads / cfg.gauges;
  int extra = num_reads % cfg.gauges;
  for (int g = 0; g < cfg.gauges; ++g) {
    int reads = base + (g < extra ? 1 : 0);
    if (reads == 0) continue;

    Gauge gauge(static_cast<std::size_t>(prepared.n));
    {
      auto ggen = rng::make_engine(rng::derive_seed(cfg.seed, "gauge", static_cast<std::uint64_t>(g)));
      for (auto& s : gauge) s = rng::uniform01(ggen) < 0.5 ? -1 : 1;
    }
    IsingModel gauged = apply_gauge(prepared, gauge);

    if (cfg.kind == SamplerKind::ExactBoltzmann) {
      std::vector<double> dist = exact_boltzmann_distribution(gauged, cfg.beta_eff);
      std::vector<double> cdf(dist.size());
      double acc = 0.0;
      for (std::size_t s = 0; s < dist.size(); ++s) {
        acc += dist[s];
        cdf[s] = acc;
      }
      batch.work += dist.size();
      for (int r = 0; r < reads; ++r) {
        auto gen = rng::make_engine(
            rng::derive_seed(cfg.seed, "read", static_cast<std::uint64_t>(g), static_cast<std::uint64_t>(r)));
        double u = rng::uniform01(gen);
        std::size_t idx = std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
        if (idx >= dist.size()) idx = dist.size() - 1;
        SpinVector z = ungauge(spins_from_index(idx, gauged.n), gauge);
        batch.energies.push_back(energy(prepared, z));
        batch.samples.push_back(std::move(z));
        batch.provenance.push_back({g, r});
        ++batch.work;
      }
    } else {
      auto adj = detail::adjacency(gauged);
      for (int r = 0; r < reads; ++r) {
        auto gen = rng::make_engine(
            rng::derive_seed(cfg.seed, "read", static_cast<std::uint64_t>(g), static_cast<std::uint64_t>(r)));
        SpinVector z = ungauge(detail::metropolis_read(gauged, adj, cfg, gen), gauge);
        batch.energies.push_back(energy(prepared, z));
        batch.samples.push_back(std::move(z));
        batch.provenance.push_back({g, r});
      }
      batch.work += static_cast<std::uint64_t>(reads) * cfg.sweeps * std::max(1, prepared.n);
    }
  }
  return batch;
}

}  // namespace rqa
