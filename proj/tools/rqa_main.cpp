// rqa: SAT -> Ising workbench driver.
//
// Subcommands: encode (CNF to Ising JSON), solve (run one pipeline on one
// instance), bench (manifest-driven experiment grid), gen (benchmark
// instance generation). All randomness derives from one seed; persisted
// outputs are byte-reproducible for equal inputs.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rqa/agent.hpp"
#include "rqa/bench.hpp"
#include "rqa/cnf.hpp"
#include "rqa/encoder.hpp"
#include "rqa/manifest.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitError = 2;

std::uint64_t fallback_seed() {
  if (const char* env = std::getenv("RQA_FORGE_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw std::runtime_error("RQA_FORGE_SEED is not an integer");
    }
  }
  return 0;
}

void refuse_overwrite(const fs::path& path, bool force) {
  if (!path.empty() && fs::exists(path) && !force)
    throw std::runtime_error(path.string() + " exists; pass --force to overwrite");
}

void write_file(const fs::path& path, const std::string& content, bool force) {
  refuse_overwrite(path, force);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("short write to " + path.string());
}

rqa::CnfFormula load_cnf(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return rqa::parse_dimacs(in);
}

std::vector<double> load_rho(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<double> rho;
  double v;
  while (in >> v) rho.push_back(v);
  return rho;
}

struct EnvFlags {
  std::string kind = "metropolis";
  double beta_eff = 1.0;
  int sweeps = 50;
  double beta_start = 0.1;
  double beta_end = 2.0;
  int gauges = 2;
  int quantize_bits = 0;  // 0 = off

  void add_options(CLI::App* cmd) {
    cmd->add_option("--env", kind, "sampler kind: exact | metropolis")
        ->check(CLI::IsMember({"exact", "metropolis"}));
    cmd->add_option("--beta-eff", beta_eff, "exact sampler inverse temperature");
    cmd->add_option("--sweeps", sweeps, "metropolis sweeps per read");
    cmd->add_option("--beta-start", beta_start, "metropolis schedule start (inverse temperature)");
    cmd->add_option("--beta-end", beta_end, "metropolis schedule end (inverse temperature)");
    cmd->add_option("--gauges", gauges, "spin-reversal gauges per request");
    cmd->add_option("--quantize-bits", quantize_bits, "coefficient quantization bits (0 = off)");
  }

  rqa::EnvConfig to_config(std::uint64_t seed) const {
    rqa::EnvConfig cfg;
    cfg.kind = kind == "exact" ? rqa::SamplerKind::ExactBoltzmann : rqa::SamplerKind::Metropolis;
    cfg.beta_eff = beta_eff;
    cfg.sweeps = sweeps;
    cfg.beta_start = beta_start;
    cfg.beta_end = beta_end;
    cfg.gauges = gauges;
    if (quantize_bits > 0) cfg.quantize_bits = quantize_bits;
    cfg.seed = seed;
    cfg.validate();
    return cfg;
  }
};

int cmd_encode(const fs::path& in, const std::optional<fs::path>& rho_path, const fs::path& out,
               bool force) {
  rqa::CnfFormula f = load_cnf(in);
  std::vector<double> rho(static_cast<std::size_t>(f.num_clauses()), 0.0);
  if (rho_path) {
    rho = load_rho(*rho_path);
    if (static_cast<int>(rho.size()) != f.num_clauses())
      throw std::runtime_error("rho file has " + std::to_string(rho.size()) + " entries, formula has " +
                               std::to_string(f.num_clauses()) + " clauses");
  }
  rqa::Encoding enc = rqa::encode(f, rho);
  write_file(out, rqa::encoding_to_json(enc).dump(2) + "\n", force);

  double min_d = enc.margins.empty() ? 0.0 : enc.margins.front();
  double sum_d = 0.0;
  for (double d : enc.margins) {
    min_d = std::min(min_d, d);
    sum_d += d;
  }
  std::cout << "encoded " << in.string() << ": " << f.num_vars << " vars, " << f.num_clauses()
            << " clauses\n";
  std::cout << "margins: min " << min_d << ", mean " << sum_d / enc.margins.size() << "\n";
  if (enc.fallback_applied) std::cout << "note: influence factors shifted to restore feasibility\n";
  return 0;
}

int cmd_solve(const fs::path& in, const std::string& method, int budget, int episodes,
              double theta1, double theta2, const std::string& taken_set, const EnvFlags& env,
              std::uint64_t seed, const std::optional<fs::path>& out, bool force) {
  if (out) refuse_overwrite(*out, force);
  rqa::CnfFormula f = load_cnf(in);
  rqa::AgentConfig agent;
  agent.episodes = episodes;
  agent.theta1 = theta1;
  agent.theta2 = theta2;
  agent.taken_set =
      taken_set == "unsatisfied" ? rqa::TakenSet::Unsatisfied : rqa::TakenSet::Satisfied;

  rqa::RunResult r = rqa::run_pipeline(rqa::pipeline_from_name(method), f, env.to_config(seed),
                                       budget, agent, seed);

  if (out) {
    nlohmann::json doc = rqa::run_result_to_json(r);
    doc["instance"] = in.string();
    doc["method"] = method;
    doc["budget"] = budget;
    doc["seed"] = seed;
    doc["config"] = {{"episodes", episodes},
                     {"theta1", theta1},
                     {"theta2", theta2},
                     {"taken_set", taken_set},
                     {"env", env.kind},
                     {"beta_eff", env.beta_eff},
                     {"sweeps", env.sweeps},
                     {"beta_start", env.beta_start},
                     {"beta_end", env.beta_end},
                     {"gauges", env.gauges},
                     {"quantize_bits", env.quantize_bits}};
    write_file(*out, doc.dump(2) + "\n", force);
  }
  std::cout << "unsatisfied clauses: " << r.unsat_count << " of " << f.num_clauses() << "\n";
  std::cout << "reads used: " << r.total_reads << ", modeled cost: " << r.cost_ms
            << " ms, wall: " << r.wall_ms << " ms\n";
  return r.unsat_count == 0 ? 0 : 1;
}

struct BenchOverrides {
  std::uint64_t seed = 0;
  std::string preset, out_csv, out_json, taken_set, env;
  int workers = 0, episodes = 10, sweeps = 50, gauges = 2, quantize_bits = 0;
  double theta1 = 0.1, theta2 = 0.0, beta_start = 0.1, beta_end = 2.0, beta_eff = 1.0;
};

int cmd_bench(const fs::path& manifest_path, const CLI::App* cmd, const BenchOverrides& o,
              bool force) {
  rqa::Manifest m = rqa::load_manifest(manifest_path);
  // Flags override manifest fields.
  auto override_str = [&](const char* flag, const char* key, const std::string& v) {
    if (cmd->count(flag)) m.kv[key] = v;
  };
  override_str("--seed", "seed", std::to_string(o.seed));
  override_str("--preset", "preset", o.preset);
  override_str("--out-csv", "out_csv", o.out_csv);
  override_str("--out-json", "out_json", o.out_json);
  override_str("--workers", "workers", std::to_string(o.workers));
  override_str("--episodes", "episodes", std::to_string(o.episodes));
  override_str("--theta1", "theta1", std::to_string(o.theta1));
  override_str("--theta2", "theta2", std::to_string(o.theta2));
  override_str("--taken-set", "taken_set", o.taken_set);
  override_str("--env", "env", o.env);
  override_str("--sweeps", "sweeps", std::to_string(o.sweeps));
  override_str("--beta-start", "beta_start", std::to_string(o.beta_start));
  override_str("--beta-end", "beta_end", std::to_string(o.beta_end));
  override_str("--beta-eff", "beta_eff", std::to_string(o.beta_eff));
  override_str("--gauges", "gauges", std::to_string(o.gauges));
  override_str("--quantize-bits", "quantize_bits", std::to_string(o.quantize_bits));
  if (!m.has("seed")) m.kv["seed"] = std::to_string(fallback_seed());

  refuse_overwrite(m.get("out_csv", ""), force);
  refuse_overwrite(m.get("out_json", ""), force);
  rqa::BenchPlan plan = rqa::bench_plan_from_manifest(m);
  rqa::ExperimentReport report = rqa::run_bench_plan(plan);

  if (!plan.out_csv.empty()) write_file(plan.out_csv, rqa::report_to_csv(report), force);
  if (!plan.out_json.empty()) {
    nlohmann::json doc = rqa::report_to_json(report);
    nlohmann::json echo;
    for (const auto& [k, v] : m.kv) {
      // Execution-only keys do not influence the results.
      if (k == "workers" || k == "out_csv" || k == "out_json") continue;
      echo[k] = v;
    }
    doc["manifest"] = std::move(echo);
    write_file(plan.out_json, doc.dump(2) + "\n", force);
  }
  std::cout << rqa::summary_table(report);
  return 0;
}

int cmd_gen_factoring(std::uint64_t q, int n1, int n2, const fs::path& out_dir, bool force) {
  // Default registers are symmetric and wide enough for any factor pair of
  // a two-prime composite (both factors fit in bits(q) - 1).
  if (n1 == 0) n1 = std::max(2, rqa::bit_width(q) - 1);
  if (n2 == 0) n2 = std::max(2, rqa::bit_width(q) - 1);
  rqa::FactoringInstance inst = rqa::gen_factoring(q, n1, n2);
  fs::create_directories(out_dir);
  fs::path cnf_path = out_dir / ("factor-" + std::to_string(q) + ".cnf");
  // Fall back to the unsimplified circuit when propagation solved the
  // instance outright; an empty formula has no DIMACS form.
  const rqa::CnfFormula& cnf = inst.cnf.num_clauses() >= 1 ? inst.cnf : inst.raw;
  write_file(cnf_path, rqa::serialize_dimacs(cnf), force);

  std::string manifest = "instances = dimacs_dir\ndir = " + out_dir.string() + "\n";
  manifest += "# factoring target " + std::to_string(q) + ", registers " + std::to_string(n1) +
              "x" + std::to_string(n2) + " bits\n";
  write_file(out_dir / "manifest.txt", manifest, true);

  std::cout << "wrote " << cnf_path.string() << " (" << cnf.num_vars << " vars, "
            << cnf.num_clauses() << " clauses)\n";
  return 0;
}

int cmd_gen_random3sat(int n, double ratio, int count, std::uint64_t seed, bool satisfiable_only,
                       const fs::path& out_dir, bool force) {
  fs::create_directories(out_dir);
  std::vector<rqa::CnfFormula> suite;
  if (satisfiable_only) {
    suite = rqa::gen_satisfiable_3sat_suite(count, n, ratio, seed);
  } else {
    for (int i = 0; i < count; ++i)
      suite.push_back(rqa::gen_random_3sat(n, ratio, rqa::rng::derive_seed(seed, "inst",
                                                                           static_cast<std::uint64_t>(i))));
  }
  for (int i = 0; i < count; ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "r3sat-n%d-i%03d.cnf", n, i);
    write_file(out_dir / name, rqa::serialize_dimacs(suite[static_cast<std::size_t>(i)]), force);
  }
  std::string manifest = "instances = dimacs_dir\ndir = " + out_dir.string() + "\nseed = " +
                         std::to_string(seed) + "\n";
  write_file(out_dir / "manifest.txt", manifest, true);
  std::cout << "wrote " << count << " instances to " << out_dir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SAT -> Ising annealing workbench"};
  app.require_subcommand(1);

  // encode
  auto* encode = app.add_subcommand("encode", "reduce a DIMACS CNF to an Ising model JSON");
  fs::path enc_in, enc_out;
  std::string enc_rho;
  bool enc_force = false;
  encode->add_option("--in", enc_in, "input DIMACS file")->required();
  encode->add_option("--rho", enc_rho, "influence factor file, one value per clause");
  encode->add_option("--out", enc_out, "output model JSON")->required();
  encode->add_flag("--force", enc_force, "overwrite existing outputs");

  // solve
  auto* solve = app.add_subcommand("solve", "run one pipeline on one instance");
  fs::path solve_in;
  std::string solve_method = "rqa";
  int solve_budget = 100;
  int solve_episodes = 10;
  double solve_theta1 = 0.1, solve_theta2 = 0.0;
  std::string solve_taken = "satisfied";
  std::string solve_out;
  std::uint64_t solve_seed = 0;
  bool solve_force = false;
  EnvFlags solve_env;
  solve->add_option("--in", solve_in, "input DIMACS file")->required();
  solve->add_option("--method", solve_method, "qa | smqc | rqa")
      ->check(CLI::IsMember({"qa", "smqc", "rqa"}));
  solve->add_option("--budget", solve_budget, "total read budget");
  solve->add_option("--episodes", solve_episodes, "RQA episode limit T");
  solve->add_option("--theta1", solve_theta1, "reward learning factor");
  solve->add_option("--theta2", solve_theta2, "penalty learning factor");
  solve->add_option("--taken-set", solve_taken, "satisfied | unsatisfied")
      ->check(CLI::IsMember({"satisfied", "unsatisfied"}));
  solve->add_option("--seed", solve_seed, "run seed (falls back to RQA_FORGE_SEED)");
  solve->add_option("--out", solve_out, "write the run record JSON here");
  solve->add_flag("--force", solve_force, "overwrite existing outputs");
  solve_env.add_options(solve);

  // bench
  auto* bench = app.add_subcommand("bench", "run an experiment grid from a manifest");
  fs::path bench_manifest;
  BenchOverrides bo;
  bool bench_force = false;
  bench->add_option("--manifest", bench_manifest, "manifest file")->required();
  bench->add_option("--seed", bo.seed, "override the manifest seed");
  bench->add_option("--preset", bo.preset, "desk | paper-shape");
  bench->add_option("--out-csv", bo.out_csv, "override out_csv");
  bench->add_option("--out-json", bo.out_json, "override out_json");
  bench->add_option("--workers", bo.workers, "parallel cells (0 = hardware)");
  bench->add_option("--episodes", bo.episodes, "override episodes");
  bench->add_option("--theta1", bo.theta1, "override theta1");
  bench->add_option("--theta2", bo.theta2, "override theta2");
  bench->add_option("--taken-set", bo.taken_set, "override taken_set")
      ->check(CLI::IsMember({"satisfied", "unsatisfied"}));
  bench->add_option("--env", bo.env, "override env kind")
      ->check(CLI::IsMember({"exact", "metropolis"}));
  bench->add_option("--sweeps", bo.sweeps, "override sweeps");
  bench->add_option("--beta-start", bo.beta_start, "override beta_start");
  bench->add_option("--beta-end", bo.beta_end, "override beta_end");
  bench->add_option("--beta-eff", bo.beta_eff, "override beta_eff");
  bench->add_option("--gauges", bo.gauges, "override gauges");
  bench->add_option("--quantize-bits", bo.quantize_bits, "override quantize_bits");
  bench->add_flag("--force", bench_force, "overwrite existing outputs");

  // gen
  auto* gen = app.add_subcommand("gen", "generate benchmark instances");
  gen->require_subcommand(1);
  auto* gen_factoring = gen->add_subcommand("factoring", "factoring target -> CNF");
  std::uint64_t gf_q = 15;
  int gf_n1 = 0, gf_n2 = 0;
  fs::path gf_out = ".";
  bool gf_force = false;
  gen_factoring->add_option("--q", gf_q, "pseudo-prime target")->required();
  gen_factoring->add_option("--n1", gf_n1, "first register width (default: derived)");
  gen_factoring->add_option("--n2", gf_n2, "second register width (default: derived)");
  gen_factoring->add_option("--out", gf_out, "output directory")->required();
  gen_factoring->add_flag("--force", gf_force, "overwrite existing outputs");

  auto* gen_r3 = gen->add_subcommand("random3sat", "uniform random 3-SAT suite");
  int gr_n = 50, gr_count = 10;
  double gr_ratio = 4.36;
  std::uint64_t gr_seed = 0;
  bool gr_sat_only = false, gr_force = false;
  fs::path gr_out = ".";
  gen_r3->add_option("--n", gr_n, "variable count");
  gen_r3->add_option("--ratio", gr_ratio, "clause-to-variable ratio");
  gen_r3->add_option("--count", gr_count, "number of instances");
  gen_r3->add_option("--seed", gr_seed, "generator seed");
  gen_r3->add_flag("--satisfiable-only", gr_sat_only, "keep only satisfiable instances");
  gen_r3->add_option("--out", gr_out, "output directory")->required();
  gen_r3->add_flag("--force", gr_force, "overwrite existing outputs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (*encode) {
      std::optional<fs::path> rho;
      if (!enc_rho.empty()) rho = enc_rho;
      return cmd_encode(enc_in, rho, enc_out, enc_force);
    }
    if (*solve) {
      if (!solve->count("--seed")) solve_seed = fallback_seed();
      std::optional<fs::path> out;
      if (!solve_out.empty()) out = solve_out;
      return cmd_solve(solve_in, solve_method, solve_budget, solve_episodes, solve_theta1,
                       solve_theta2, solve_taken, solve_env, solve_seed, out, solve_force);
    }
    if (*bench) {
      return cmd_bench(bench_manifest, bench, bo, bench_force);
    }
    if (*gen_factoring) return cmd_gen_factoring(gf_q, gf_n1, gf_n2, gf_out, gf_force);
    if (*gen_r3) {
      if (!gen_r3->count("--seed")) gr_seed = fallback_seed();
      return cmd_gen_random3sat(gr_n, gr_ratio, gr_count, gr_seed, gr_sat_only, gr_out, gr_force);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
