#pragma once

// The three solution pipelines. QA samples the influence-free encoding and
// keeps the best read. SMQC adds the MQC tournament and SQC descent. RQA
// runs the reinforcement loop: re-encode with the automaton's influence
// factors, post-process each episode's batch into a champion, feed the
// satisfied-clause set back as the multi-action update, and finally merge
// the hall of fame.
//
// All persisted timing figures are deterministic modeled costs derived
// from counted work (spin updates, LP tableau operations); wall-clock time
// is returned in-memory only, so identical runs serialize identically.

#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rqa/automaton.hpp"
#include "rqa/cnf.hpp"
#include "rqa/encoder.hpp"
#include "rqa/env.hpp"
#include "rqa/postprocess.hpp"
#include "rqa/rng.hpp"

namespace rqa {

enum class Pipeline { QA, SMQC, RQA };
enum class TakenSet { Satisfied, Unsatisfied };

inline std::string pipeline_name(Pipeline p) {
  switch (p) {
    case Pipeline::QA: return "qa";
    case Pipeline::SMQC: return "smqc";
    case Pipeline::RQA: return "rqa";
  }
  return "?";
}

inline Pipeline pipeline_from_name(const std::string& name) {
  if (name == "qa") return Pipeline::QA;
  if (name == "smqc") return Pipeline::SMQC;
  if (name == "rqa") return Pipeline::RQA;
  throw std::invalid_argument("unknown method: " + name);
}

struct AgentConfig {
  int episodes = 10;  // T
  double theta1 = 0.1;
  double theta2 = 0.0;
  TakenSet taken_set = TakenSet::Satisfied;
  PairPolicy pair_policy = PairPolicy::ClauseInternal;
};

// Work units per modeled millisecond; all runtime_ms/cost_ms figures are
// counted work divided by this constant.
inline constexpr double kWorkPerMs = 1e5;

struct EpisodeRecord {
  int t = 0;
  AutomatonState automaton;  // the state whose probabilities produced rho
  std::vector<double> rho;
  Encoding qmi;
  SpinVector z;            // episode champion after post-processing
  std::vector<int> unsat;  // Phi_t, 0-based clause indices
  double beta = 0.0;
  double cost_ms = 0.0;
};

struct RunResult {
  Pipeline pipeline{};
  Assignment assignment;
  int unsat_count = 0;
  std::vector<EpisodeRecord> episodes;
  std::vector<SpinVector> hall_of_fame;  // RQA only
  long long total_reads = 0;
  double cost_ms = 0.0;
  double wall_ms = 0.0;  // measured; not serialized
};

namespace detail {

struct WallTimer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

// Best sample by (unsatisfied clause count, energy, batch order).
inline std::size_t best_sample_index(const CnfFormula& f, const Encoding& enc,
                                     const SampleBatch& batch) {
  std::size_t best = 0;
  int best_unsat = -1;
  for (std::size_t i = 0; i < batch.samples.size(); ++i) {
    int unsat = static_cast<int>(unsatisfied_clauses(f, decode(batch.samples[i], enc.varmap)).size());
    if (best_unsat < 0 || unsat < best_unsat ||
        (unsat == best_unsat && batch.energies[i] < batch.energies[best])) {
      best = i;
      best_unsat = unsat;
    }
  }
  return best;
}

inline std::uint64_t postprocess_work(std::size_t batch_size, int n) {
  return static_cast<std::uint64_t>(batch_size) * n * 10 + static_cast<std::uint64_t>(n) * n;
}

}  // namespace detail

inline RunResult run_qa(const CnfFormula& f, const EnvConfig& env, int budget_reads,
                        std::uint64_t seed) {
  if (budget_reads < 1) throw std::invalid_argument("read budget must be positive");
  detail::WallTimer timer;

  Encoding enc = encode(f, std::vector<double>(static_cast<std::size_t>(f.num_clauses()), 0.0));
  EnvConfig cfg = env;
  cfg.seed = rng::derive_seed(seed, "env", 1);
  SampleBatch batch = sample(enc.model, budget_reads, cfg);

  std::size_t best = detail::best_sample_index(f, enc, batch);
  Assignment a = decode(batch.samples[best], enc.varmap);
  std::vector<int> unsat = unsatisfied_clauses(f, a);

  std::uint64_t work = enc.lp_work + batch.work +
                       static_cast<std::uint64_t>(batch.samples.size()) * f.num_clauses();

  RunResult res;
  res.pipeline = Pipeline::QA;
  res.assignment = std::move(a);
  res.unsat_count = static_cast<int>(unsat.size());
  res.total_reads = budget_reads;
  res.cost_ms = static_cast<double>(work) / kWorkPerMs;

  EpisodeRecord ep;
  ep.t = 1;
  ep.automaton = AutomatonState::uniform(f.num_clauses());
  ep.rho.assign(static_cast<std::size_t>(f.num_clauses()), 0.0);
  ep.qmi = std::move(enc);
  ep.z = batch.samples[best];
  ep.unsat = std::move(unsat);
  ep.beta = 1.0 - static_cast<double>(res.unsat_count) / f.num_clauses();
  ep.cost_ms = res.cost_ms;
  res.episodes.push_back(std::move(ep));

  res.wall_ms = timer.elapsed_ms();
  return res;
}

inline RunResult run_smqc(const CnfFormula& f, const EnvConfig& env, int budget_reads,
                          std::uint64_t seed) {
  if (budget_reads < 1) throw std::invalid_argument("read budget must be positive");
  detail::WallTimer timer;

  Encoding enc = encode(f, std::vector<double>(static_cast<std::size_t>(f.num_clauses()), 0.0));
  EnvConfig cfg = env;
  cfg.seed = rng::derive_seed(seed, "env", 1);
  SampleBatch batch = sample(enc.model, budget_reads, cfg);

  SpinVector winner = sqc(enc.model, mqc_tournament(enc.model, batch.samples));
  Assignment a = decode(winner, enc.varmap);
  std::vector<int> unsat = unsatisfied_clauses(f, a);

  std::uint64_t work =
      enc.lp_work + batch.work + detail::postprocess_work(batch.samples.size(), enc.model.n);

  RunResult res;
  res.pipeline = Pipeline::SMQC;
  res.assignment = std::move(a);
  res.unsat_count = static_cast<int>(unsat.size());
  res.total_reads = budget_reads;
  res.cost_ms = static_cast<double>(work) / kWorkPerMs;

  EpisodeRecord ep;
  ep.t = 1;
  ep.automaton = AutomatonState::uniform(f.num_clauses());
  ep.rho.assign(static_cast<std::size_t>(f.num_clauses()), 0.0);
  ep.qmi = std::move(enc);
  ep.z = std::move(winner);
  ep.unsat = std::move(unsat);
  ep.beta = 1.0 - static_cast<double>(res.unsat_count) / f.num_clauses();
  ep.cost_ms = res.cost_ms;
  res.episodes.push_back(std::move(ep));

  res.wall_ms = timer.elapsed_ms();
  return res;
}

inline RunResult run_rqa(const CnfFormula& f, const EnvConfig& env, int budget_reads,
                         const AgentConfig& agent, std::uint64_t seed) {
  const int T = agent.episodes;
  if (T < 1) throw std::invalid_argument("episode count must be positive");
  if (budget_reads < T)
    throw std::invalid_argument("read budget must be at least the episode count");
  detail::WallTimer timer;

  const int M = f.num_clauses();
  AutomatonState state = AutomatonState::uniform(M, agent.theta1, agent.theta2);

  RunResult res;
  res.pipeline = Pipeline::RQA;

  const int base_reads = budget_reads / T;
  const int extra_reads = budget_reads % T;  // granted to episode 1

  std::uint64_t total_work = 0;
  const Encoding* last_qmi = nullptr;

  for (int t = 1; t <= T; ++t) {
    std::vector<double> rho = influence_factors(state, M);
    Encoding enc = encode(f, rho, agent.pair_policy);

    EnvConfig cfg = env;
    cfg.seed = rng::derive_seed(seed, "env", static_cast<std::uint64_t>(t));
    int reads = base_reads + (t == 1 ? extra_reads : 0);
    SampleBatch batch = sample(enc.model, reads, cfg);
    res.total_reads += reads;

    // Episode champion: the MQC+SQC merge competes with the raw reads, best
    // by (unsatisfied count, energy, order); the merge wins ties.
    SpinVector merged = sqc(enc.model, mqc_tournament(enc.model, batch.samples));
    SpinVector champion = merged;
    {
      int best_unsat =
          static_cast<int>(unsatisfied_clauses(f, decode(merged, enc.varmap)).size());
      double best_energy = energy(enc.model, merged);
      for (std::size_t i = 0; i < batch.samples.size(); ++i) {
        int unsat_i = static_cast<int>(
            unsatisfied_clauses(f, decode(batch.samples[i], enc.varmap)).size());
        if (unsat_i < best_unsat ||
            (unsat_i == best_unsat && batch.energies[i] < best_energy)) {
          best_unsat = unsat_i;
          best_energy = batch.energies[i];
          champion = batch.samples[i];
        }
      }
    }
    std::vector<int> unsat = unsatisfied_clauses(f, decode(champion, enc.varmap));
    double beta = 1.0 - static_cast<double>(unsat.size()) / M;

    std::vector<int> taken;
    if (agent.taken_set == TakenSet::Satisfied) {
      std::vector<bool> bad(static_cast<std::size_t>(M), false);
      for (int i : unsat) bad[static_cast<std::size_t>(i)] = true;
      for (int i = 0; i < M; ++i)
        if (!bad[static_cast<std::size_t>(i)]) taken.push_back(i);
    } else {
      taken = unsat;
    }
    AutomatonState pre_update = state;
    state = update_multi(state, Feedback{std::move(taken), beta});

    std::uint64_t ep_work =
        enc.lp_work + batch.work + detail::postprocess_work(batch.samples.size(), enc.model.n);
    total_work += ep_work;

    res.hall_of_fame.push_back(champion);

    EpisodeRecord ep;
    ep.t = t;
    ep.automaton = std::move(pre_update);
    ep.rho = std::move(rho);
    ep.qmi = std::move(enc);
    ep.z = std::move(champion);
    ep.unsat = std::move(unsat);
    ep.beta = beta;
    ep.cost_ms = static_cast<double>(ep_work) / kWorkPerMs;
    res.episodes.push_back(std::move(ep));
    last_qmi = &res.episodes.back().qmi;

    if (res.episodes.back().unsat.empty()) break;  // all clauses satisfied
  }

  // Merge the hall of fame under the last episode's QMI.
  const IsingModel& final_model = last_qmi->model;
  SpinVector final_z = sqc(final_model, mqc_tournament(final_model, res.hall_of_fame));
  total_work += detail::postprocess_work(res.hall_of_fame.size(), final_model.n);

  res.assignment = decode(final_z, last_qmi->varmap);
  res.unsat_count = static_cast<int>(unsatisfied_clauses(f, res.assignment).size());
  res.cost_ms = static_cast<double>(total_work) / kWorkPerMs;
  res.wall_ms = timer.elapsed_ms();
  return res;
}

inline RunResult run_pipeline(Pipeline p, const CnfFormula& f, const EnvConfig& env,
                              int budget_reads, const AgentConfig& agent, std::uint64_t seed) {
  switch (p) {
    case Pipeline::QA: return run_qa(f, env, budget_reads, seed);
    case Pipeline::SMQC: return run_smqc(f, env, budget_reads, seed);
    case Pipeline::RQA: return run_rqa(f, env, budget_reads, agent, seed);
  }
  throw std::logic_error("unreachable");
}

inline nlohmann::json spins_to_json(const SpinVector& z) {
  nlohmann::json out = nlohmann::json::array();
  for (auto s : z) out.push_back(static_cast<int>(s));
  return out;
}

inline nlohmann::json run_result_to_json(const RunResult& r) {
  nlohmann::json out;
  out["pipeline"] = pipeline_name(r.pipeline);
  nlohmann::json assign = nlohmann::json::array();
  for (auto v : r.assignment) assign.push_back(v != 0);
  out["assignment"] = std::move(assign);
  out["unsat_count"] = r.unsat_count;
  out["total_reads"] = r.total_reads;
  out["cost_ms"] = r.cost_ms;
  nlohmann::json eps = nlohmann::json::array();
  for (const auto& ep : r.episodes) {
    nlohmann::json e;
    e["t"] = ep.t;
    e["automaton"] = automaton_to_json(ep.automaton);
    e["rho"] = ep.rho;
    e["qmi"] = encoding_to_json(ep.qmi);
    e["z"] = spins_to_json(ep.z);
    e["unsat"] = ep.unsat;
    e["beta"] = ep.beta;
    e["cost_ms"] = ep.cost_ms;
    eps.push_back(std::move(e));
  }
  out["episodes"] = std::move(eps);
  if (r.pipeline == Pipeline::RQA) {
    nlohmann::json hall = nlohmann::json::array();
    for (const auto& z : r.hall_of_fame) hall.push_back(spins_to_json(z));
    out["hall_of_fame"] = std::move(hall);
  }
  return out;
}

}  // namespace rqa
