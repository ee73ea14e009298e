#pragma once

// Benchmark instance generation and the experiment harness. Factoring
// instances build a ripple-carry shift-and-add multiplier, pin the output
// bits to the target, convert gates to CNF via Tseitin auxiliaries, and run
// the simplifier over the result. Random 3-SAT samples the uniform
// fixed-width model at a configurable clause ratio. The harness fans
// (instance x method x budget) cells over worker threads with seeds derived
// per cell, so reports do not depend on the worker count.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "rqa/agent.hpp"
#include "rqa/cnf.hpp"
#include "rqa/rng.hpp"

namespace rqa {

// ---------------------------------------------------------------------------
// DPLL model search (unit propagation + branching on the most frequent
// variable). Used for satisfiability certificates and model enumeration;
// no clause learning.

namespace detail {

enum class PropagateOutcome { Conflict, AllSatisfied, Open };

inline PropagateOutcome dpll_propagate(const CnfFormula& f, std::vector<std::int8_t>& val) {
  bool changed = true;
  while (changed) {
    changed = false;
    bool open = false;
    for (const Clause& c : f.clauses) {
      int unassigned = 0;
      Literal unit{};
      bool sat = false;
      for (const Literal& l : c.lits) {
        std::int8_t v = val[static_cast<std::size_t>(l.var)];
        if (v < 0) {
          ++unassigned;
          unit = l;
        } else if ((v == 1) != l.neg) {
          sat = true;
          break;
        }
      }
      if (sat) continue;
      if (unassigned == 0) return PropagateOutcome::Conflict;
      if (unassigned == 1) {
        val[static_cast<std::size_t>(unit.var)] = unit.neg ? 0 : 1;
        changed = true;
      } else {
        open = true;
      }
    }
    if (!changed && !open) return PropagateOutcome::AllSatisfied;
  }
  return PropagateOutcome::Open;
}

inline int dpll_pick_branch(const CnfFormula& f, const std::vector<std::int8_t>& val) {
  std::vector<int> score(val.size(), 0);
  for (const Clause& c : f.clauses) {
    bool sat = false;
    for (const Literal& l : c.lits) {
      std::int8_t v = val[static_cast<std::size_t>(l.var)];
      if (v >= 0 && (v == 1) != l.neg) {
        sat = true;
        break;
      }
    }
    if (sat) continue;
    for (const Literal& l : c.lits)
      if (val[static_cast<std::size_t>(l.var)] < 0) ++score[static_cast<std::size_t>(l.var)];
  }
  int best = -1;
  for (std::size_t v = 0; v < score.size(); ++v)
    if (score[v] > 0 && (best < 0 || score[v] > score[static_cast<std::size_t>(best)]))
      best = static_cast<int>(v);
  return best;
}

// Enumerates models; the callback returns false to stop the search. When
// every clause is satisfied under a partial assignment, the remaining
// variables are expanded both ways so that complete models are reported.
inline bool dpll_enumerate(const CnfFormula& f, std::vector<std::int8_t>& val,
                           const std::function<bool(const Assignment&)>& cb) {
  std::vector<std::int8_t> saved = val;
  PropagateOutcome out = dpll_propagate(f, val);
  if (out == PropagateOutcome::Conflict) {
    val = saved;
    return true;
  }
  if (out == PropagateOutcome::AllSatisfied) {
    int free_var = -1;
    for (std::size_t v = 0; v < val.size(); ++v)
      if (val[v] < 0) {
        free_var = static_cast<int>(v);
        break;
      }
    bool keep_going = true;
    if (free_var < 0) {
      Assignment a(val.size());
      for (std::size_t v = 0; v < val.size(); ++v) a[v] = val[v] == 1;
      keep_going = cb(a);
    } else {
      for (std::int8_t choice : {std::int8_t{0}, std::int8_t{1}}) {
        val[static_cast<std::size_t>(free_var)] = choice;
        keep_going = dpll_enumerate(f, val, cb);
        if (!keep_going) break;
      }
    }
    val = saved;
    return keep_going;
  }

  int var = dpll_pick_branch(f, val);
  if (var < 0) {  // open clauses but no scored variable: cannot happen
    val = saved;
    return true;
  }
  bool keep_going = true;
  for (std::int8_t choice : {std::int8_t{0}, std::int8_t{1}}) {
    val[static_cast<std::size_t>(var)] = choice;
    keep_going = dpll_enumerate(f, val, cb);
    val[static_cast<std::size_t>(var)] = -1;
    if (!keep_going) break;
  }
  val = saved;
  return keep_going;
}

}  // namespace detail

inline void for_each_model(const CnfFormula& f,
                           const std::function<bool(const Assignment&)>& cb) {
  std::vector<std::int8_t> val(static_cast<std::size_t>(f.num_vars), -1);
  detail::dpll_enumerate(f, val, cb);
}

inline std::optional<Assignment> find_model(const CnfFormula& f) {
  std::optional<Assignment> found;
  for_each_model(f, [&](const Assignment& a) {
    found = a;
    return false;
  });
  return found;
}

// ---------------------------------------------------------------------------
// Factoring -> SAT

inline int bit_width(std::uint64_t x) {
  int w = 0;
  while (x) {
    ++w;
    x >>= 1;
  }
  return w;
}

struct FactoringInstance {
  std::uint64_t q_hat = 0;
  int n1 = 0, n2 = 0;
  CnfFormula cnf;  // simplified
  CnfFormula raw;  // full Tseitin circuit before simplification
  struct BitRef {
    int var = -1;    // variable in cnf, 0-based; -1 when absent
    int fixed = -1;  // 0/1 when the bit was decided by propagation
  };
  std::vector<BitRef> x1_bits, x2_bits;
  bool trivially_unsat = false;
};

namespace detail {

struct TseitinBuilder {
  int next_var = 0;
  std::vector<Clause> clauses;
  int const_false_wire = -1;

  int fresh() { return next_var++; }

  void add_clause(std::initializer_list<Literal> lits) {
    Clause c{lits};
    canonicalize_clause(c);
    clauses.push_back(std::move(c));
  }

  int mk_and(int a, int b) {
    int c = fresh();
    add_clause({{c, true}, {a, false}});
    add_clause({{c, true}, {b, false}});
    add_clause({{c, false}, {a, true}, {b, true}});
    return c;
  }
  int mk_or(int a, int b) {
    int c = fresh();
    add_clause({{c, false}, {a, true}});
    add_clause({{c, false}, {b, true}});
    add_clause({{c, true}, {a, false}, {b, false}});
    return c;
  }
  int mk_xor(int a, int b) {
    int c = fresh();
    add_clause({{c, true}, {a, false}, {b, false}});
    add_clause({{c, true}, {a, true}, {b, true}});
    add_clause({{c, false}, {a, true}, {b, false}});
    add_clause({{c, false}, {a, false}, {b, true}});
    return c;
  }
  int const_false() {
    if (const_false_wire < 0) {
      const_false_wire = fresh();
      add_clause({{const_false_wire, true}});
    }
    return const_false_wire;
  }

  // Sums one to three wires; returns (sum, carry) with carry = -1 when no
  // carry wire is needed.
  std::pair<int, int> add_bits(const std::vector<int>& ins) {
    if (ins.size() == 1) return {ins[0], -1};
    if (ins.size() == 2) return {mk_xor(ins[0], ins[1]), mk_and(ins[0], ins[1])};
    int t = mk_xor(ins[0], ins[1]);
    int sum = mk_xor(t, ins[2]);
    int c1 = mk_and(ins[0], ins[1]);
    int c2 = mk_and(t, ins[2]);
    return {sum, mk_or(c1, c2)};
  }
};

}  // namespace detail

inline FactoringInstance gen_factoring(std::uint64_t q_hat, int n1, int n2) {
  if (q_hat < 4) throw std::invalid_argument("factoring target must be at least 4");
  if (n1 < 2 || n2 < 2) throw std::invalid_argument("factor registers need at least 2 bits");
  if (bit_width(q_hat) > n1 + n2)
    throw std::invalid_argument("factoring target too wide for the register widths");

  detail::TseitinBuilder tb;
  std::vector<int> x1(static_cast<std::size_t>(n1)), x2(static_cast<std::size_t>(n2));
  for (auto& v : x1) v = tb.fresh();
  for (auto& v : x2) v = tb.fresh();

  // Registers represent integers >= 2: some bit above bit zero is set.
  {
    Clause c1, c2;
    for (int i = 1; i < n1; ++i) c1.lits.push_back({x1[static_cast<std::size_t>(i)], false});
    for (int i = 1; i < n2; ++i) c2.lits.push_back({x2[static_cast<std::size_t>(i)], false});
    canonicalize_clause(c1);
    canonicalize_clause(c2);
    tb.clauses.push_back(std::move(c1));
    tb.clauses.push_back(std::move(c2));
  }

  // Shift-and-add multiplier: accumulate partial-product rows with
  // ripple-carry adders.
  const int out_bits = n1 + n2;
  std::vector<int> acc(static_cast<std::size_t>(out_bits), -1);
  auto pp = [&](int i, int j) {
    return tb.mk_and(x1[static_cast<std::size_t>(i)], x2[static_cast<std::size_t>(j)]);
  };
  for (int j = 0; j < n2; ++j) acc[static_cast<std::size_t>(j)] = pp(0, j);
  for (int i = 1; i < n1; ++i) {
    int carry = -1;
    for (int pos = i; pos < out_bits; ++pos) {
      int j = pos - i;
      std::vector<int> ins;
      if (acc[static_cast<std::size_t>(pos)] >= 0) ins.push_back(acc[static_cast<std::size_t>(pos)]);
      if (j < n2) ins.push_back(pp(i, j));
      if (carry >= 0) ins.push_back(carry);
      carry = -1;
      if (ins.empty()) {
        if (j >= n2) break;
        continue;
      }
      auto [sum, cout] = tb.add_bits(ins);
      acc[static_cast<std::size_t>(pos)] = sum;
      carry = cout;
      if (j >= n2 && carry < 0) break;
    }
  }

  // Output bits equal the target's bits (XNOR conjunction against
  // constants folds to unit clauses).
  for (int k = 0; k < out_bits; ++k) {
    bool bit = (q_hat >> k) & 1;
    int wire = acc[static_cast<std::size_t>(k)];
    if (wire < 0) wire = tb.const_false();
    tb.add_clause({{wire, !bit}});
  }

  CnfFormula raw;
  raw.num_vars = tb.next_var;
  raw.clauses = std::move(tb.clauses);

  SimplifyResult s = simplify(raw);

  FactoringInstance inst;
  inst.q_hat = q_hat;
  inst.n1 = n1;
  inst.n2 = n2;
  inst.raw = raw;
  if (s.unsat) {
    inst.trivially_unsat = true;
    inst.cnf = parse_dimacs(std::string("p cnf 1 2\n1 0\n-1 0\n"));
    inst.x1_bits.assign(static_cast<std::size_t>(n1), {});
    inst.x2_bits.assign(static_cast<std::size_t>(n2), {});
    return inst;
  }
  inst.cnf = s.formula;
  std::vector<int> old_to_new(static_cast<std::size_t>(raw.num_vars), -1);
  for (std::size_t k = 0; k < s.new_to_old.size(); ++k)
    old_to_new[static_cast<std::size_t>(s.new_to_old[k])] = static_cast<int>(k);
  auto bit_ref = [&](int old_var) {
    FactoringInstance::BitRef ref;
    if (s.assigned[static_cast<std::size_t>(old_var)].has_value())
      ref.fixed = *s.assigned[static_cast<std::size_t>(old_var)] ? 1 : 0;
    else
      ref.var = old_to_new[static_cast<std::size_t>(old_var)];
    return ref;
  };
  for (int i = 0; i < n1; ++i) inst.x1_bits.push_back(bit_ref(x1[static_cast<std::size_t>(i)]));
  for (int i = 0; i < n2; ++i) inst.x2_bits.push_back(bit_ref(x2[static_cast<std::size_t>(i)]));
  return inst;
}

inline std::pair<std::uint64_t, std::uint64_t> decode_factors(const FactoringInstance& inst,
                                                              const Assignment& model) {
  auto value = [&](const std::vector<FactoringInstance::BitRef>& bits) {
    std::uint64_t v = 0;
    for (std::size_t k = 0; k < bits.size(); ++k) {
      bool bit = false;
      if (bits[k].fixed >= 0) {
        bit = bits[k].fixed == 1;
      } else if (bits[k].var >= 0) {
        if (bits[k].var >= static_cast<int>(model.size()))
          throw std::invalid_argument("model too short for factor decode");
        bit = model[static_cast<std::size_t>(bits[k].var)] != 0;
      }
      if (bit) v |= std::uint64_t{1} << k;
    }
    return v;
  };
  return {value(inst.x1_bits), value(inst.x2_bits)};
}

inline bool is_prime(std::uint64_t x) {
  if (x < 2) return false;
  for (std::uint64_t d = 2; d * d <= x; ++d)
    if (x % d == 0) return false;
  return true;
}

// Products of prime pairs whose simplified CNF stays within var_limit
// variables, in ascending (q_hat, smaller factor) order.
inline std::vector<FactoringInstance> gen_corpus_factoring(int bit_limit, int var_limit) {
  if (bit_limit < 3) throw std::invalid_argument("bit limit must be at least 3");
  std::vector<FactoringInstance> corpus;
  std::uint64_t max_q = (std::uint64_t{1} << bit_limit) - 1;
  std::vector<std::uint64_t> primes;
  for (std::uint64_t p = 2; p <= max_q / 2; ++p)
    if (is_prime(p)) primes.push_back(p);

  std::vector<std::pair<std::uint64_t, std::pair<std::uint64_t, std::uint64_t>>> targets;
  for (std::size_t a = 0; a < primes.size(); ++a) {
    for (std::size_t b = a; b < primes.size(); ++b) {
      std::uint64_t q = primes[a] * primes[b];
      if (q > max_q) break;
      targets.push_back({q, {primes[a], primes[b]}});
    }
  }
  std::sort(targets.begin(), targets.end());

  for (const auto& [q, pq] : targets) {
    int n1 = std::max(2, bit_width(pq.first));
    int n2 = std::max(2, bit_width(pq.second));
    FactoringInstance inst = gen_factoring(q, n1, n2);
    if (inst.trivially_unsat) continue;
    if (inst.cnf.num_clauses() < 1) continue;
    if (inst.cnf.num_vars > var_limit) continue;
    corpus.push_back(std::move(inst));
  }
  return corpus;
}

// ---------------------------------------------------------------------------
// Uniform random 3-SAT

inline CnfFormula gen_random_3sat(int n_vars, double ratio, std::uint64_t seed) {
  if (n_vars < 3) throw std::invalid_argument("random 3-SAT needs at least 3 variables");
  if (!(ratio > 0)) throw std::invalid_argument("clause ratio must be positive");
  long long m = std::llround(ratio * n_vars);
  if (m < 1) throw std::invalid_argument("clause ratio rounds to zero clauses");
  double distinct = static_cast<double>(n_vars) * (n_vars - 1) * (n_vars - 2) / 6.0 * 8.0;
  if (static_cast<double>(m) > distinct)
    throw std::invalid_argument("clause ratio exceeds the number of distinct clauses");

  auto gen = rng::make_engine(rng::derive_seed(seed, "random3sat"));
  CnfFormula f;
  f.num_vars = n_vars;
  std::set<std::vector<Literal>> seen;
  while (static_cast<long long>(f.clauses.size()) < m) {
    Clause c;
    while (c.width() < 3) {
      int v = static_cast<int>(rng::uniform_int(gen, 0, n_vars - 1));
      bool dup = false;
      for (const Literal& l : c.lits) dup = dup || l.var == v;
      if (!dup) c.lits.push_back(Literal{v, rng::uniform01(gen) < 0.5});
    }
    canonicalize_clause(c);
    if (!seen.insert(c.lits).second) continue;
    f.clauses.push_back(std::move(c));
  }
  return f;
}

// Deterministic satisfiable suite: walks candidate seeds derived from the
// base seed and keeps formulas that a DPLL certificate accepts.
inline std::vector<CnfFormula> gen_satisfiable_3sat_suite(int count, int n_vars, double ratio,
                                                          std::uint64_t seed) {
  std::vector<CnfFormula> out;
  for (std::uint64_t k = 0; static_cast<int>(out.size()) < count; ++k) {
    CnfFormula f = gen_random_3sat(n_vars, ratio, rng::derive_seed(seed, "suite", k));
    if (find_model(f).has_value()) out.push_back(std::move(f));
    if (k > 10000ull * static_cast<std::uint64_t>(count))
      throw std::runtime_error("satisfiable suite generation is not converging");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Experiment harness

struct NamedInstance {
  std::string name;
  CnfFormula formula;
};

struct ExperimentCell {
  std::string instance;
  Pipeline method{};
  int budget = 0;
  int unsat_min = 0;
  int unsat_max = 0;
  double unsat_mean = 0.0;
  double unsat_var = 0.0;
  double runtime_ms = 0.0;  // deterministic modeled cost
  double wall_ms = 0.0;     // measured; never serialized
};

struct MethodBudgetStats {
  Pipeline method{};
  int budget = 0;
  int unsat_min = 0;
  int unsat_max = 0;
  double unsat_mean = 0.0;
  double unsat_var = 0.0;
  double runtime_ms_mean = 0.0;
  double wall_ms_mean = 0.0;
};

struct ExperimentReport {
  std::vector<ExperimentCell> cells;       // one per instance x method x budget
  std::vector<MethodBudgetStats> summary;  // aggregated over instances and repeats
};

inline ExperimentReport run_experiment(const std::vector<NamedInstance>& corpus,
                                       const std::vector<Pipeline>& methods,
                                       const std::vector<int>& budgets, const EnvConfig& env,
                                       const AgentConfig& agent, int repeats, std::uint64_t seed,
                                       int workers = 0) {
  if (corpus.empty() || methods.empty() || budgets.empty())
    throw std::invalid_argument("experiment requires instances, methods and budgets");
  if (repeats < 1) throw std::invalid_argument("repeats must be positive");

  struct CellRaw {
    std::vector<int> unsat;
    double cost_sum = 0.0;
    double wall_sum = 0.0;
  };

  struct Task {
    std::size_t instance_idx;
    std::size_t method_idx;
    std::size_t budget_idx;
  };
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < corpus.size(); ++i)
    for (std::size_t m = 0; m < methods.size(); ++m)
      for (std::size_t b = 0; b < budgets.size(); ++b) tasks.push_back({i, m, b});

  std::vector<CellRaw> raw(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t idx = next.fetch_add(1);
      if (idx >= tasks.size()) return;
      const Task& t = tasks[idx];
      CellRaw& cell = raw[idx];
      for (int rep = 0; rep < repeats; ++rep) {
        // Budget and method deliberately omitted from the seed derivation:
        // higher budgets replay lower-budget read streams as prefixes, and
        // methods are compared on common random numbers.
        std::uint64_t run_seed =
            rng::derive_seed(seed, "run", t.instance_idx, static_cast<std::uint64_t>(rep));
        RunResult r = run_pipeline(methods[t.method_idx], corpus[t.instance_idx].formula, env,
                                   budgets[t.budget_idx], agent, run_seed);
        cell.unsat.push_back(r.unsat_count);
        cell.cost_sum += r.cost_ms;
        cell.wall_sum += r.wall_ms;
      }
    }
  };

  int nthreads = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
  nthreads = std::max(1, std::min<int>(nthreads, static_cast<int>(tasks.size())));
  {
    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
  }

  auto stats = [](const std::vector<int>& xs, int& mn, int& mx, double& mean, double& var) {
    mn = xs.front();
    mx = xs.front();
    double sum = 0.0;
    for (int x : xs) {
      mn = std::min(mn, x);
      mx = std::max(mx, x);
      sum += x;
    }
    mean = sum / static_cast<double>(xs.size());
    double acc = 0.0;
    for (int x : xs) acc += (x - mean) * (x - mean);
    var = acc / static_cast<double>(xs.size());
  };

  ExperimentReport report;
  for (std::size_t idx = 0; idx < tasks.size(); ++idx) {
    const Task& t = tasks[idx];
    ExperimentCell cell;
    cell.instance = corpus[t.instance_idx].name;
    cell.method = methods[t.method_idx];
    cell.budget = budgets[t.budget_idx];
    stats(raw[idx].unsat, cell.unsat_min, cell.unsat_max, cell.unsat_mean, cell.unsat_var);
    cell.runtime_ms = raw[idx].cost_sum / repeats;
    cell.wall_ms = raw[idx].wall_sum / repeats;
    report.cells.push_back(std::move(cell));
  }

  for (std::size_t m = 0; m < methods.size(); ++m) {
    for (std::size_t b = 0; b < budgets.size(); ++b) {
      std::vector<int> all;
      double cost = 0.0, wall = 0.0;
      for (std::size_t idx = 0; idx < tasks.size(); ++idx) {
        if (tasks[idx].method_idx != m || tasks[idx].budget_idx != b) continue;
        all.insert(all.end(), raw[idx].unsat.begin(), raw[idx].unsat.end());
        cost += raw[idx].cost_sum;
        wall += raw[idx].wall_sum;
      }
      MethodBudgetStats s;
      s.method = methods[m];
      s.budget = budgets[b];
      stats(all, s.unsat_min, s.unsat_max, s.unsat_mean, s.unsat_var);
      s.runtime_ms_mean = cost / static_cast<double>(all.size());
      s.wall_ms_mean = wall / static_cast<double>(all.size());
      report.summary.push_back(std::move(s));
    }
  }
  return report;
}

namespace detail {
inline std::string fixed6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}
inline std::string fixed3(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  return buf;
}
}  // namespace detail

inline std::string report_to_csv(const ExperimentReport& report) {
  std::string out = "instance,method,budget,unsat_min,unsat_max,unsat_mean,unsat_var,runtime_ms\n";
  for (const auto& c : report.cells) {
    out += c.instance;
    out += ',';
    out += pipeline_name(c.method);
    out += ',';
    out += std::to_string(c.budget);
    out += ',';
    out += std::to_string(c.unsat_min);
    out += ',';
    out += std::to_string(c.unsat_max);
    out += ',';
    out += detail::fixed6(c.unsat_mean);
    out += ',';
    out += detail::fixed6(c.unsat_var);
    out += ',';
    out += detail::fixed3(c.runtime_ms);
    out += '\n';
  }
  return out;
}

inline nlohmann::json report_to_json(const ExperimentReport& report) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : report.cells) {
    cells.push_back({{"instance", c.instance},
                     {"method", pipeline_name(c.method)},
                     {"budget", c.budget},
                     {"unsat_min", c.unsat_min},
                     {"unsat_max", c.unsat_max},
                     {"unsat_mean", c.unsat_mean},
                     {"unsat_var", c.unsat_var},
                     {"runtime_ms", c.runtime_ms}});
  }
  nlohmann::json summary = nlohmann::json::array();
  for (const auto& s : report.summary) {
    summary.push_back({{"method", pipeline_name(s.method)},
                       {"budget", s.budget},
                       {"unsat_min", s.unsat_min},
                       {"unsat_max", s.unsat_max},
                       {"unsat_mean", s.unsat_mean},
                       {"unsat_var", s.unsat_var},
                       {"runtime_ms_mean", s.runtime_ms_mean}});
  }
  return nlohmann::json{{"cells", std::move(cells)}, {"summary", std::move(summary)}};
}

inline std::string summary_table(const ExperimentReport& report) {
  std::string out = "method  budget  unsat_mean  unsat_min  unsat_max  unsat_var  runtime_ms\n";
  for (const auto& s : report.summary) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-6s %7d %11.3f %10d %10d %10.3f %11.3f\n",
                  pipeline_name(s.method).c_str(), s.budget, s.unsat_mean, s.unsat_min,
                  s.unsat_max, s.unsat_var, s.runtime_ms_mean);
    out += buf;
  }
  return out;
}

}  // namespace rqa
