#pragma once

// CNF data model, DIMACS I/O, assignment evaluation and light
// simplification (constant folding + unit propagation).

#include <algorithm>
#include <compare>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rqa {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Variable indices are 0-based internally; DIMACS 1-based at the boundary.
struct Literal {
  int var = 0;
  bool neg = false;

  friend bool operator==(const Literal&, const Literal&) = default;
  friend auto operator<=>(const Literal&, const Literal&) = default;
};

struct Clause {
  std::vector<Literal> lits;  // sorted by variable, one literal per variable

  int width() const { return static_cast<int>(lits.size()); }
  friend bool operator==(const Clause&, const Clause&) = default;
};

struct CnfFormula {
  int num_vars = 0;
  std::vector<Clause> clauses;

  int num_clauses() const { return static_cast<int>(clauses.size()); }
  friend bool operator==(const CnfFormula&, const CnfFormula&) = default;
};

using Assignment = std::vector<std::uint8_t>;  // 0 = false, 1 = true

inline bool literal_value(const Literal& l, const Assignment& a) {
  bool v = a[static_cast<std::size_t>(l.var)] != 0;
  return l.neg ? !v : v;
}

// Canonicalizes a clause in place: sort by (var, neg), drop duplicate
// literals. Returns false for a tautology (x and !x in the same clause).
inline bool canonicalize_clause(Clause& c) {
  std::sort(c.lits.begin(), c.lits.end());
  c.lits.erase(std::unique(c.lits.begin(), c.lits.end()), c.lits.end());
  for (std::size_t i = 1; i < c.lits.size(); ++i) {
    if (c.lits[i].var == c.lits[i - 1].var) return false;
  }
  return true;
}

inline CnfFormula parse_dimacs(std::istream& in) {
  std::string line;
  int lineno = 0;
  bool have_header = false;
  int n = 0, m = 0;
  std::vector<Clause> clauses;
  std::vector<Literal> cur;
  int clause_start_line = 0;

  auto fail = [&](int ln, const std::string& msg) -> void {
    throw ParseError("dimacs line " + std::to_string(ln) + ": " + msg);
  };

  auto finish_clause = [&](int ln) {
    if (cur.empty()) fail(ln, "empty clause");
    Clause c{cur};
    if (!canonicalize_clause(c)) fail(ln, "tautological clause");
    clauses.push_back(std::move(c));
    cur.clear();
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    char lead = line[first];
    if (lead == 'c') continue;
    if (lead == '%') break;  // SATLIB-style trailer
    if (lead == 'p') {
      if (have_header) fail(lineno, "duplicate header");
      std::istringstream ls(line);
      std::string p, fmt;
      ls >> p >> fmt >> n >> m;
      if (!ls || p != "p" || fmt != "cnf" || n < 1 || m < 1) fail(lineno, "malformed header");
      have_header = true;
      continue;
    }
    if (!have_header) fail(lineno, "clause before header");
    std::istringstream ls(line);
    long long tok;
    while (ls >> tok) {
      if (tok == 0) {
        finish_clause(cur.empty() ? lineno : clause_start_line);
      } else {
        if (cur.empty()) clause_start_line = lineno;
        long long v = tok < 0 ? -tok : tok;
        if (v > n) fail(lineno, "literal " + std::to_string(tok) + " exceeds declared variable count");
        cur.push_back(Literal{static_cast<int>(v - 1), tok < 0});
      }
    }
    if (ls.fail() && !ls.eof()) fail(lineno, "unexpected token");
  }

  if (!have_header) fail(lineno, "missing header");
  if (!cur.empty()) fail(clause_start_line, "clause not terminated by 0");
  if (static_cast<int>(clauses.size()) != m)
    fail(lineno, "clause count mismatch: declared " + std::to_string(m) + ", found " +
                     std::to_string(clauses.size()));
  return CnfFormula{n, std::move(clauses)};
}

inline CnfFormula parse_dimacs(const std::string& text) {
  std::istringstream in(text);
  return parse_dimacs(in);
}

inline void serialize_dimacs(const CnfFormula& f, std::ostream& out) {
  out << "p cnf " << f.num_vars << ' ' << f.clauses.size() << '\n';
  for (const Clause& c : f.clauses) {
    for (const Literal& l : c.lits) {
      out << (l.neg ? -(l.var + 1) : (l.var + 1)) << ' ';
    }
    out << "0\n";
  }
}

inline std::string serialize_dimacs(const CnfFormula& f) {
  std::ostringstream out;
  serialize_dimacs(f, out);
  return out.str();
}

// Indices (0-based) of clauses whose literals all evaluate false under a.
inline std::vector<int> unsatisfied_clauses(const CnfFormula& f, const Assignment& a) {
  if (static_cast<int>(a.size()) != f.num_vars)
    throw std::invalid_argument("assignment length does not match formula");
  std::vector<int> out;
  for (int i = 0; i < f.num_clauses(); ++i) {
    bool sat = false;
    for (const Literal& l : f.clauses[i].lits) {
      if (literal_value(l, a)) {
        sat = true;
        break;
      }
    }
    if (!sat) out.push_back(i);
  }
  return out;
}

inline bool satisfies(const CnfFormula& f, const Assignment& a) {
  return unsatisfied_clauses(f, a).empty();
}

struct SimplifyResult {
  bool unsat = false;           // propagation derived the empty clause
  CnfFormula formula;           // residual formula over remapped variables
  std::vector<int> new_to_old;  // size formula.num_vars
  // Original-variable values forced by the fixed inputs and unit
  // propagation. Variables that are neither assigned nor remapped are free.
  std::vector<std::optional<bool>> assigned;
};

// Constant folding + unit propagation to fixpoint. `fixed` may be empty or
// sized num_vars. Any model of the result extends, via `assigned`, to a
// model of the input.
inline SimplifyResult simplify(const CnfFormula& f,
                               const std::vector<std::optional<bool>>& fixed = {}) {
  if (!fixed.empty() && static_cast<int>(fixed.size()) != f.num_vars)
    throw std::invalid_argument("fixed assignment length does not match formula");

  SimplifyResult res;
  res.assigned.assign(static_cast<std::size_t>(f.num_vars), std::nullopt);
  for (std::size_t v = 0; v < fixed.size(); ++v) res.assigned[v] = fixed[v];

  std::vector<bool> satisfied(f.clauses.size(), false);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < f.clauses.size(); ++i) {
      if (satisfied[i]) continue;
      int unassigned = 0;
      Literal unit{};
      bool sat = false;
      for (const Literal& l : f.clauses[i].lits) {
        const auto& val = res.assigned[static_cast<std::size_t>(l.var)];
        if (!val.has_value()) {
          ++unassigned;
          unit = l;
        } else if (*val != l.neg) {  // literal true
          sat = true;
          break;
        }
      }
      if (sat) {
        satisfied[i] = true;
        changed = true;
        continue;
      }
      if (unassigned == 0) {
        res.unsat = true;
        return res;
      }
      if (unassigned == 1) {
        res.assigned[static_cast<std::size_t>(unit.var)] = !unit.neg;
        satisfied[i] = true;
        changed = true;
      }
    }
  }

  // Residual clauses restricted to unassigned literals.
  std::vector<int> old_to_new(static_cast<std::size_t>(f.num_vars), -1);
  std::vector<Clause> residual;
  for (std::size_t i = 0; i < f.clauses.size(); ++i) {
    if (satisfied[i]) continue;
    Clause c;
    for (const Literal& l : f.clauses[i].lits) {
      if (!res.assigned[static_cast<std::size_t>(l.var)].has_value()) c.lits.push_back(l);
    }
    residual.push_back(std::move(c));
  }
  for (const Clause& c : residual)
    for (const Literal& l : c.lits) old_to_new[static_cast<std::size_t>(l.var)] = 0;
  for (int v = 0; v < f.num_vars; ++v) {
    if (old_to_new[static_cast<std::size_t>(v)] == 0) {
      old_to_new[static_cast<std::size_t>(v)] = static_cast<int>(res.new_to_old.size());
      res.new_to_old.push_back(v);
    }
  }
  for (Clause& c : residual)
    for (Literal& l : c.lits) l.var = old_to_new[static_cast<std::size_t>(l.var)];

  res.formula.num_vars = static_cast<int>(res.new_to_old.size());
  res.formula.clauses = std::move(residual);
  return res;
}

// Lifts a model of the simplified formula back to the original variable
// space; free variables default to false.
inline Assignment extend_assignment(const SimplifyResult& s, const Assignment& reduced) {
  if (static_cast<int>(reduced.size()) != s.formula.num_vars)
    throw std::invalid_argument("reduced assignment length mismatch");
  Assignment out(s.assigned.size(), 0);
  for (std::size_t v = 0; v < s.assigned.size(); ++v) {
    if (s.assigned[v].has_value()) out[v] = *s.assigned[v] ? 1 : 0;
  }
  for (std::size_t k = 0; k < s.new_to_old.size(); ++k) {
    out[static_cast<std::size_t>(s.new_to_old[k])] = reduced[k];
  }
  return out;
}

}  // namespace rqa
