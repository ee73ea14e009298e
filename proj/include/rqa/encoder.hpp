#pragma once

// Reduction from CNF to Ising coefficients. Each clause contributes one
// inequality bounding its infeasible state's energy from below by a margin
// variable D_i, margins are bounded below by per-clause influence factors,
// and the LP maximizes the total margin subject to the hardware coefficient
// ranges.

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rqa/cnf.hpp"
#include "rqa/ising.hpp"
#include "rqa/lp.hpp"

namespace rqa {

// Linear form of a clause's infeasible-state energy over the clause-local
// coefficients: sum_v s_v h_v + sum_{u<v} s_u s_v J_uv, where s is the spin
// pattern falsifying every literal.
struct ClauseEnergyExpr {
  int clause_index = 0;
  std::vector<std::pair<int, int>> h_terms;        // (var, sign)
  std::vector<std::tuple<int, int, int>> j_terms;  // (u, v, sign), u < v

  double value_at(const IsingModel& m) const {
    double e = 0.0;
    for (const auto& [v, s] : h_terms) e += s * m.h[static_cast<std::size_t>(v)];
    for (const auto& [u, v, s] : j_terms) e += s * m.get_j(u, v);
    return e;
  }
};

// The infeasible state assigns -1 to positive literals and +1 to negated
// ones; e.g. (x1 v !x4 v x9) gives -h1 + h4 - h9 - J14 + J19 - J49.
inline ClauseEnergyExpr infeasible_expr(const Clause& clause, int clause_index = 0) {
  if (clause.width() < 1) throw std::invalid_argument("empty clause");
  ClauseEnergyExpr e;
  e.clause_index = clause_index;
  for (const Literal& l : clause.lits) e.h_terms.push_back({l.var, l.neg ? 1 : -1});
  for (std::size_t a = 0; a < e.h_terms.size(); ++a)
    for (std::size_t b = a + 1; b < e.h_terms.size(); ++b)
      e.j_terms.push_back({e.h_terms[a].first, e.h_terms[b].first,
                           e.h_terms[a].second * e.h_terms[b].second});
  return e;
}

enum class PairPolicy {
  ClauseInternal,  // J variables only for pairs co-occurring in some clause
  AllPairs,        // J variables for every pair of used variables
};

struct EncoderLayout {
  std::vector<int> used_vars;                    // CNF vars with occurrences, ascending
  std::map<int, int> h_col;                      // var -> LP column
  std::map<std::pair<int, int>, int> j_col;      // (u < v) -> LP column
  int d_offset = 0;                              // first margin column
  int num_clauses = 0;
};

struct BuiltLp {
  LinearProgram lp;
  EncoderLayout layout;
};

inline BuiltLp build_lp(const CnfFormula& f, const std::vector<double>& rho,
                        PairPolicy policy = PairPolicy::ClauseInternal) {
  if (static_cast<int>(rho.size()) != f.num_clauses())
    throw std::invalid_argument("influence factor count does not match clause count");

  EncoderLayout lay;
  lay.num_clauses = f.num_clauses();
  {
    std::vector<bool> used(static_cast<std::size_t>(f.num_vars), false);
    for (const Clause& c : f.clauses)
      for (const Literal& l : c.lits) used[static_cast<std::size_t>(l.var)] = true;
    for (int v = 0; v < f.num_vars; ++v)
      if (used[static_cast<std::size_t>(v)]) lay.used_vars.push_back(v);
  }
  int col = 0;
  for (int v : lay.used_vars) lay.h_col[v] = col++;
  if (policy == PairPolicy::ClauseInternal) {
    for (const Clause& c : f.clauses) {
      ClauseEnergyExpr e = infeasible_expr(c);
      for (const auto& [u, v, s] : e.j_terms) {
        (void)s;
        lay.j_col.emplace(std::pair<int, int>{u, v}, 0);
      }
    }
  } else {
    for (std::size_t a = 0; a < lay.used_vars.size(); ++a)
      for (std::size_t b = a + 1; b < lay.used_vars.size(); ++b)
        lay.j_col.emplace(std::pair<int, int>{lay.used_vars[a], lay.used_vars[b]}, 0);
  }
  for (auto& [k, c] : lay.j_col) c = col++;
  lay.d_offset = col;
  int num_vars = col + lay.num_clauses;

  LinearProgram lp(num_vars);
  for (const auto& [v, c] : lay.h_col) {
    (void)v;
    lp.lower[static_cast<std::size_t>(c)] = -kHRange;
    lp.upper[static_cast<std::size_t>(c)] = kHRange;
  }
  for (const auto& [k, c] : lay.j_col) {
    (void)k;
    lp.lower[static_cast<std::size_t>(c)] = -kJRange;
    lp.upper[static_cast<std::size_t>(c)] = kJRange;
  }
  for (int i = 0; i < lay.num_clauses; ++i)
    lp.objective[static_cast<std::size_t>(lay.d_offset + i)] = 1.0;

  for (int i = 0; i < lay.num_clauses; ++i) {
    ClauseEnergyExpr e = infeasible_expr(f.clauses[static_cast<std::size_t>(i)], i);
    std::vector<double> row(static_cast<std::size_t>(num_vars), 0.0);
    for (const auto& [v, s] : e.h_terms)
      row[static_cast<std::size_t>(lay.h_col.at(v))] = static_cast<double>(s);
    for (const auto& [u, v, s] : e.j_terms)
      row[static_cast<std::size_t>(lay.j_col.at({u, v}))] = static_cast<double>(s);
    row[static_cast<std::size_t>(lay.d_offset + i)] = -1.0;
    lp.add_constraint(std::move(row), Relation::GreaterEq, 0.0);

    std::vector<double> bound(static_cast<std::size_t>(num_vars), 0.0);
    bound[static_cast<std::size_t>(lay.d_offset + i)] = 1.0;
    lp.add_constraint(std::move(bound), Relation::GreaterEq, rho[static_cast<std::size_t>(i)]);
  }
  return BuiltLp{std::move(lp), std::move(lay)};
}

struct Encoding {
  IsingModel model;
  std::vector<double> margins;        // optimal D per clause
  std::vector<int> varmap;            // CNF var -> spin index (identity layout)
  std::vector<double> rho_effective;  // influence factors actually enforced
  std::vector<int> free_vars;         // vars in no clause; bias fixed at 0
  bool fallback_applied = false;
  int lp_iterations = 0;
  std::uint64_t lp_work = 0;
};

inline Encoding encode(const CnfFormula& f, const std::vector<double>& rho,
                       PairPolicy policy = PairPolicy::ClauseInternal) {
  BuiltLp built = build_lp(f, rho, policy);
  LpSolution sol = solve(built.lp);
  std::vector<double> rho_eff = rho;
  bool fallback = false;
  if (sol.status == LpStatus::Infeasible) {
    // Shift every influence factor down by the maximum: with rho <= 0 the
    // all-zero model with D = rho is feasible, and the ranking of clause
    // influences is preserved.
    double shift = rho.empty() ? 0.0 : *std::max_element(rho.begin(), rho.end());
    for (double& r : rho_eff) r -= shift;
    std::uint64_t prev_work = sol.work;
    int prev_iters = sol.iterations;
    built = build_lp(f, rho_eff, policy);
    sol = solve(built.lp);
    sol.work += prev_work;
    sol.iterations += prev_iters;
    fallback = true;
  }
  if (sol.status == LpStatus::Unbounded)
    throw std::logic_error("encoder LP unbounded despite bounded coefficients");
  if (sol.status != LpStatus::Optimal)
    throw std::runtime_error("encoder LP infeasible after influence-factor shift");

  Encoding enc;
  enc.model = IsingModel(f.num_vars);
  for (const auto& [v, c] : built.layout.h_col)
    enc.model.h[static_cast<std::size_t>(v)] = sol.x[static_cast<std::size_t>(c)];
  for (const auto& [k, c] : built.layout.j_col)
    enc.model.set_j(k.first, k.second, sol.x[static_cast<std::size_t>(c)]);
  enc.margins.resize(static_cast<std::size_t>(f.num_clauses()));
  for (int i = 0; i < f.num_clauses(); ++i)
    enc.margins[static_cast<std::size_t>(i)] =
        sol.x[static_cast<std::size_t>(built.layout.d_offset + i)];
  enc.varmap.resize(static_cast<std::size_t>(f.num_vars));
  for (int v = 0; v < f.num_vars; ++v) enc.varmap[static_cast<std::size_t>(v)] = v;
  enc.rho_effective = std::move(rho_eff);
  {
    std::vector<bool> used(static_cast<std::size_t>(f.num_vars), false);
    for (int v : built.layout.used_vars) used[static_cast<std::size_t>(v)] = true;
    for (int v = 0; v < f.num_vars; ++v)
      if (!used[static_cast<std::size_t>(v)]) enc.free_vars.push_back(v);
  }
  enc.fallback_applied = fallback;
  enc.lp_iterations = sol.iterations;
  enc.lp_work = sol.work;
  return enc;
}

// +1 -> true, -1 -> false through the variable map.
inline Assignment decode(const SpinVector& z, const std::vector<int>& varmap) {
  Assignment a(varmap.size());
  for (std::size_t v = 0; v < varmap.size(); ++v) {
    int spin = varmap[v];
    if (spin < 0 || spin >= static_cast<int>(z.size()))
      throw std::invalid_argument("variable map points outside the spin vector");
    a[v] = z[static_cast<std::size_t>(spin)] > 0 ? 1 : 0;
  }
  return a;
}

inline SpinVector spin_encode(const Assignment& a, const std::vector<int>& varmap) {
  if (a.size() != varmap.size()) throw std::invalid_argument("assignment length mismatch");
  SpinVector z(varmap.size(), -1);
  for (std::size_t v = 0; v < varmap.size(); ++v)
    z[static_cast<std::size_t>(varmap[v])] = a[v] ? 1 : -1;
  return z;
}

// Re-checks the margin and range invariants at the produced coefficients.
inline void verify_encoding(const CnfFormula& f, const Encoding& enc, double tol = 1e-6) {
  if (!enc.model.within_hardware_range())
    throw std::runtime_error("encoding violates hardware coefficient ranges");
  for (int i = 0; i < f.num_clauses(); ++i) {
    double e_inf = infeasible_expr(f.clauses[static_cast<std::size_t>(i)], i).value_at(enc.model);
    double d = enc.margins[static_cast<std::size_t>(i)];
    double r = enc.rho_effective[static_cast<std::size_t>(i)];
    if (d < r - tol || d > e_inf + tol)
      throw std::runtime_error("margin invariant violated for clause " + std::to_string(i));
  }
}

inline nlohmann::json encoding_to_json(const Encoding& enc) {
  nlohmann::json out = ising_to_json(enc.model);
  out["margins"] = enc.margins;
  nlohmann::json vm = nlohmann::json::array();
  for (int s : enc.varmap) vm.push_back(s + 1);
  out["varmap"] = std::move(vm);
  out["rho"] = enc.rho_effective;
  nlohmann::json fv = nlohmann::json::array();
  for (int v : enc.free_vars) fv.push_back(v + 1);
  out["free_vars"] = std::move(fv);
  out["fallback_applied"] = enc.fallback_applied;
  return out;
}

inline Encoding encoding_from_json(const nlohmann::json& in) {
  Encoding enc;
  enc.model = ising_from_json(in);
  enc.margins = in.at("margins").get<std::vector<double>>();
  for (const auto& s : in.at("varmap")) enc.varmap.push_back(s.get<int>() - 1);
  enc.rho_effective = in.at("rho").get<std::vector<double>>();
  for (const auto& v : in.at("free_vars")) enc.free_vars.push_back(v.get<int>() - 1);
  enc.fallback_applied = in.at("fallback_applied").get<bool>();
  return enc;
}

}  // namespace rqa
