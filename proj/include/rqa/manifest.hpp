#pragma once

// Run manifests: a flat `key = value` document that fully determines a
// bench run. Presets fill unset keys; command-line flags overwrite parsed
// values before planning.

#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rqa/bench.hpp"

namespace rqa {

class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Manifest {
  std::map<std::string, std::string> kv;

  bool has(const std::string& key) const { return kv.count(key) > 0; }

  void set_default(const std::string& key, const std::string& value) {
    kv.emplace(key, value);
  }

  std::string get(const std::string& key, const std::string& fallback) const {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
  }

  std::string require(const std::string& key) const {
    auto it = kv.find(key);
    if (it == kv.end()) throw ManifestError("manifest is missing key: " + key);
    return it->second;
  }

  long long get_int(const std::string& key, long long fallback) const {
    if (!has(key)) return fallback;
    try {
      return std::stoll(require(key));
    } catch (const std::exception&) {
      throw ManifestError("manifest key is not an integer: " + key);
    }
  }

  double get_double(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    try {
      return std::stod(require(key));
    } catch (const std::exception&) {
      throw ManifestError("manifest key is not a number: " + key);
    }
  }

  bool get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    std::string v = require(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ManifestError("manifest key is not a boolean: " + key);
  }

  std::vector<std::string> get_list(const std::string& key) const {
    std::vector<std::string> out;
    std::string v = require(key);
    std::string item;
    std::istringstream ss(v);
    while (std::getline(ss, item, ',')) {
      std::size_t a = item.find_first_not_of(" \t");
      std::size_t b = item.find_last_not_of(" \t");
      if (a == std::string::npos) continue;
      out.push_back(item.substr(a, b - a + 1));
    }
    if (out.empty()) throw ManifestError("manifest key has an empty list: " + key);
    return out;
  }
};

inline Manifest parse_manifest(std::istream& in) {
  Manifest m;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ManifestError("manifest line " + std::to_string(lineno) + ": expected key = value");
    auto trim = [](std::string s) {
      std::size_t a = s.find_first_not_of(" \t");
      if (a == std::string::npos) return std::string();
      std::size_t b = s.find_last_not_of(" \t");
      return s.substr(a, b - a + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ManifestError("manifest line " + std::to_string(lineno) + ": empty key");
    if (!m.kv.emplace(key, value).second)
      throw ManifestError("manifest line " + std::to_string(lineno) + ": duplicate key " + key);
  }
  return m;
}

inline Manifest parse_manifest(const std::string& text) {
  std::istringstream in(text);
  return parse_manifest(in);
}

inline Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError("cannot read manifest: " + path.string());
  return parse_manifest(in);
}

// Named presets fill defaults for everything a bench run needs; explicit
// keys always win.
inline void apply_preset(Manifest& m, const std::string& name) {
  auto d = [&m](const char* k, const char* v) { m.set_default(k, v); };
  if (name == "desk") {
    d("instances", "random3sat");
    d("count", "20");
    d("n", "20");
    d("ratio", "4.36");
    d("satisfiable_only", "true");
    d("budgets", "100,1000");
  } else if (name == "paper-shape") {
    d("instances", "random3sat");
    d("count", "30");
    d("n", "20");
    d("ratio", "4.36");
    d("satisfiable_only", "true");
    d("budgets", "100,500,1000,5000,10000");
  } else {
    throw ManifestError("unknown preset: " + name);
  }
  d("methods", "qa,smqc,rqa");
  d("episodes", "10");
  d("env", "metropolis");
  d("sweeps", "50");
  d("beta_start", "0.1");
  d("beta_end", "2.0");
  d("gauges", "2");
}

struct BenchPlan {
  std::vector<NamedInstance> corpus;
  std::vector<Pipeline> methods;
  std::vector<int> budgets;
  EnvConfig env;
  AgentConfig agent;
  int repeats = 1;
  std::uint64_t seed = 0;
  int workers = 0;
  std::string out_csv;
  std::string out_json;
};

inline EnvConfig env_from_manifest(const Manifest& m, std::uint64_t seed) {
  EnvConfig env;
  std::string kind = m.get("env", "metropolis");
  if (kind == "metropolis")
    env.kind = SamplerKind::Metropolis;
  else if (kind == "exact")
    env.kind = SamplerKind::ExactBoltzmann;
  else
    throw ManifestError("unknown env kind: " + kind);
  env.beta_eff = m.get_double("beta_eff", 1.0);
  env.sweeps = static_cast<int>(m.get_int("sweeps", 50));
  env.beta_start = m.get_double("beta_start", 0.1);
  env.beta_end = m.get_double("beta_end", 2.0);
  env.gauges = static_cast<int>(m.get_int("gauges", 2));
  if (m.has("quantize_bits")) {
    env.quantize_bits = static_cast<int>(m.get_int("quantize_bits", 8));
    std::string mode = m.get("quantize_mode", "nearest");
    if (mode == "nearest")
      env.quantize_mode = RoundMode::Nearest;
    else if (mode == "truncate")
      env.quantize_mode = RoundMode::Truncate;
    else
      throw ManifestError("unknown quantize_mode: " + mode);
  }
  env.seed = seed;
  env.validate();
  return env;
}

inline AgentConfig agent_from_manifest(const Manifest& m) {
  AgentConfig agent;
  agent.episodes = static_cast<int>(m.get_int("episodes", 10));
  agent.theta1 = m.get_double("theta1", 0.1);
  agent.theta2 = m.get_double("theta2", 0.0);
  std::string taken = m.get("taken_set", "satisfied");
  if (taken == "satisfied")
    agent.taken_set = TakenSet::Satisfied;
  else if (taken == "unsatisfied")
    agent.taken_set = TakenSet::Unsatisfied;
  else
    throw ManifestError("unknown taken_set: " + taken);
  std::string policy = m.get("pair_policy", "clause_internal");
  if (policy == "clause_internal")
    agent.pair_policy = PairPolicy::ClauseInternal;
  else if (policy == "all_pairs")
    agent.pair_policy = PairPolicy::AllPairs;
  else
    throw ManifestError("unknown pair_policy: " + policy);
  return agent;
}

inline std::vector<NamedInstance> corpus_from_manifest(const Manifest& m, std::uint64_t seed) {
  std::vector<NamedInstance> corpus;
  std::string source = m.get("instances", "random3sat");
  if (source == "random3sat") {
    int count = static_cast<int>(m.get_int("count", 20));
    int n = static_cast<int>(m.get_int("n", 20));
    double ratio = m.get_double("ratio", 4.36);
    bool sat_only = m.get_bool("satisfiable_only", true);
    char name[64];
    if (sat_only) {
      std::vector<CnfFormula> suite = gen_satisfiable_3sat_suite(count, n, ratio, seed);
      for (int i = 0; i < count; ++i) {
        std::snprintf(name, sizeof name, "r3sat-n%d-i%03d", n, i);
        corpus.push_back({name, std::move(suite[static_cast<std::size_t>(i)])});
      }
    } else {
      for (int i = 0; i < count; ++i) {
        std::snprintf(name, sizeof name, "r3sat-n%d-i%03d", n, i);
        corpus.push_back({name, gen_random_3sat(n, ratio, rng::derive_seed(seed, "inst",
                                                                           static_cast<std::uint64_t>(i)))});
      }
    }
  } else if (source == "factoring") {
    int bit_limit = static_cast<int>(m.get_int("bit_limit", 6));
    int var_limit = static_cast<int>(m.get_int("var_limit", 63));
    for (auto& inst : gen_corpus_factoring(bit_limit, var_limit))
      corpus.push_back({"factor-" + std::to_string(inst.q_hat), std::move(inst.cnf)});
  } else if (source == "dimacs_dir") {
    std::filesystem::path dir = m.require("dir");
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      auto ext = entry.path().extension().string();
      if (ext == ".cnf" || ext == ".dimacs") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ManifestError("no .cnf files in " + dir.string());
    for (const auto& p : files) {
      std::ifstream in(p);
      if (!in) throw ManifestError("cannot read " + p.string());
      corpus.push_back({p.filename().string(), parse_dimacs(in)});
    }
  } else {
    throw ManifestError("unknown instance source: " + source);
  }
  return corpus;
}

inline BenchPlan bench_plan_from_manifest(Manifest m) {
  if (m.has("preset")) apply_preset(m, m.require("preset"));
  m.set_default("methods", "qa,smqc,rqa");
  m.set_default("budgets", "100,1000");

  BenchPlan plan;
  plan.seed = static_cast<std::uint64_t>(m.get_int("seed", 0));
  plan.corpus = corpus_from_manifest(m, plan.seed);
  for (const std::string& name : m.get_list("methods"))
    plan.methods.push_back(pipeline_from_name(name));
  for (const std::string& b : m.get_list("budgets")) plan.budgets.push_back(std::stoi(b));
  plan.env = env_from_manifest(m, plan.seed);
  plan.agent = agent_from_manifest(m);
  plan.repeats = static_cast<int>(m.get_int("repeats", 1));
  plan.workers = static_cast<int>(m.get_int("workers", 0));
  plan.out_csv = m.get("out_csv", "");
  plan.out_json = m.get("out_json", "");
  return plan;
}

inline ExperimentReport run_bench_plan(const BenchPlan& plan) {
  return run_experiment(plan.corpus, plan.methods, plan.budgets, plan.env, plan.agent,
                        plan.repeats, plan.seed, plan.workers);
}

}  // namespace rqa
