#pragma once

// Dense two-phase primal simplex with native variable bounds (nonbasic
// columns rest at either bound). Pricing is Dantzig's rule with Bland's
// rule engaged as the anti-cycling device whenever the objective stalls;
// degenerate margin LPs otherwise spend tens of thousands of pivots and
// the accumulated tableau drift corrupts the solution. Basic values are
// recomputed from the original data at the end of each phase. Singleton
// rows are folded into bounds before the tableau is built, so the
// encoder's per-clause margin constraints cost nothing.

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rqa {

inline constexpr double kLpInf = std::numeric_limits<double>::infinity();

enum class Relation { LessEq, GreaterEq, Equal };
enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpConstraint {
  std::vector<double> a;
  Relation rel = Relation::LessEq;
  double b = 0.0;
};

struct LinearProgram {
  int num_vars = 0;
  std::vector<double> objective;  // maximize objective . x
  std::vector<LpConstraint> constraints;
  std::vector<double> lower;  // -kLpInf allowed
  std::vector<double> upper;  // +kLpInf allowed

  explicit LinearProgram(int n = 0)
      : num_vars(n),
        objective(static_cast<std::size_t>(n), 0.0),
        lower(static_cast<std::size_t>(n), -kLpInf),
        upper(static_cast<std::size_t>(n), kLpInf) {}

  void add_constraint(std::vector<double> row, Relation rel, double b) {
    if (static_cast<int>(row.size()) != num_vars)
      throw std::invalid_argument("constraint row length does not match variable count");
    constraints.push_back(LpConstraint{std::move(row), rel, b});
  }
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  double objective_value = 0.0;
  int iterations = 0;
  std::uint64_t work = 0;  // tableau cells touched; feeds the cost model
};

struct SimplexConfig {
  double feas_tol = 1e-7;
  double opt_tol = 1e-9;
  double pivot_tol = 1e-11;
  std::uint64_t max_iterations = 2'000'000;
  // Consecutive non-improving pivots tolerated before Bland's rule takes
  // over the pricing; Dantzig resumes once the objective moves again.
  int bland_stall_threshold = 64;
};

class SimplexError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string lp_to_text(const LinearProgram& lp) {
  std::ostringstream out;
  auto row_text = [&](const std::vector<double>& a) {
    std::ostringstream r;
    bool first = true;
    for (int v = 0; v < lp.num_vars; ++v) {
      double c = a[static_cast<std::size_t>(v)];
      if (c == 0.0) continue;
      if (!first) r << " + ";
      r << c << "*x" << v + 1;
      first = false;
    }
    if (first) r << "0";
    return r.str();
  };
  out << "max " << row_text(lp.objective) << "\n";
  for (const auto& c : lp.constraints) {
    const char* rel = c.rel == Relation::LessEq ? "<=" : c.rel == Relation::GreaterEq ? ">=" : "=";
    out << row_text(c.a) << " " << rel << " " << c.b << "\n";
  }
  for (int v = 0; v < lp.num_vars; ++v) {
    out << lp.lower[static_cast<std::size_t>(v)] << " <= x" << v + 1 << " <= "
        << lp.upper[static_cast<std::size_t>(v)] << "\n";
  }
  return out.str();
}

namespace detail {

enum class ColState : std::uint8_t { Basic, AtLower, AtUpper };

class SimplexSolver {
 public:
  SimplexSolver(const LinearProgram& lp, const SimplexConfig& cfg) : lp_(lp), cfg_(cfg) {}

  LpSolution run() {
    validate();
    lower_ = lp_.lower;
    upper_ = lp_.upper;
    if (!presolve_singletons()) return {LpStatus::Infeasible, {}, 0.0, iterations_, work_};
    build_columns();
    build_tableau();

    if (num_artificial_ > 0) {
      phase_ = 1;
      compute_cost_row();
      if (!iterate()) throw SimplexError("phase-1 objective unbounded");  // cannot happen
      refresh_basics();
      double infeas = 0.0;
      for (int i = 0; i < m_; ++i)
        if (is_artificial(basic_[static_cast<std::size_t>(i)])) infeas += std::fabs(xb_[static_cast<std::size_t>(i)]);
      if (infeas > cfg_.feas_tol * (1.0 + bmax_))
        return {LpStatus::Infeasible, {}, 0.0, iterations_, work_};
      drive_out_artificials();
    }

    phase_ = 2;
    for (int c = 0; c < ncols_; ++c)
      if (is_artificial(c)) cap_[static_cast<std::size_t>(c)] = 0.0;
    compute_cost_row();
    if (!iterate()) return {LpStatus::Unbounded, {}, 0.0, iterations_, work_};
    refresh_basics();

    return extract();
  }

 private:
  const LinearProgram& lp_;
  SimplexConfig cfg_;

  std::vector<double> lower_, upper_;

  // Column layout: structural columns (shifted/split originals), then one
  // slack or surplus per inequality row, then artificials.
  struct VarMap {
    double shift = 0.0;
    int col_pos = -1;  // coefficient +1 on this column
    int col_neg = -1;  // coefficient -1 (split free variables)
  };
  std::vector<VarMap> vmap_;

  int m_ = 0;
  int ncols_ = 0;
  int num_structural_ = 0;
  int first_artificial_ = 0;
  int num_artificial_ = 0;
  double bmax_ = 0.0;

  std::vector<double> tab_;       // m_ x ncols_, row-major
  std::vector<double> xb_;        // basic values
  std::vector<int> basic_;        // column basic in each row
  std::vector<ColState> state_;   // per column
  std::vector<double> cap_;       // per-column upper bound in shifted space
  std::vector<double> cost_;      // objective coefficients (current phase)
  std::vector<double> red_;       // reduced costs
  int phase_ = 1;
  int iterations_ = 0;
  std::uint64_t work_ = 0;

  double& at(int r, int c) { return tab_[static_cast<std::size_t>(r) * ncols_ + c]; }

  bool is_artificial(int c) const { return c >= first_artificial_; }

  void validate() const {
    if (lp_.num_vars < 0) throw std::invalid_argument("negative variable count");
    auto n = static_cast<std::size_t>(lp_.num_vars);
    if (lp_.objective.size() != n || lp_.lower.size() != n || lp_.upper.size() != n)
      throw std::invalid_argument("objective/bounds length does not match variable count");
    for (const auto& c : lp_.constraints)
      if (c.a.size() != n) throw std::invalid_argument("constraint row length mismatch");
    for (std::size_t v = 0; v < n; ++v)
      if (lp_.lower[v] > lp_.upper[v])
        throw std::invalid_argument("variable lower bound exceeds upper bound");
  }

  // Rows with at most one nonzero coefficient become bounds. Returns false
  // on a contradiction.
  bool presolve_singletons() {
    keep_rows_.clear();
    for (std::size_t r = 0; r < lp_.constraints.size(); ++r) {
      const auto& cons = lp_.constraints[r];
      int nz = -1;
      int count = 0;
      for (int v = 0; v < lp_.num_vars; ++v) {
        if (cons.a[static_cast<std::size_t>(v)] != 0.0) {
          nz = v;
          if (++count > 1) break;
        }
      }
      if (count > 1) {
        keep_rows_.push_back(static_cast<int>(r));
        continue;
      }
      if (count == 0) {
        bool ok = cons.rel == Relation::LessEq    ? 0.0 <= cons.b + cfg_.feas_tol
                  : cons.rel == Relation::GreaterEq ? 0.0 >= cons.b - cfg_.feas_tol
                                                    : std::fabs(cons.b) <= cfg_.feas_tol;
        if (!ok) return false;
        continue;
      }
      double a = cons.a[static_cast<std::size_t>(nz)];
      double v = cons.b / a;
      auto idx = static_cast<std::size_t>(nz);
      Relation rel = cons.rel;
      if (a < 0 && rel != Relation::Equal)
        rel = rel == Relation::LessEq ? Relation::GreaterEq : Relation::LessEq;
      if (rel == Relation::LessEq || rel == Relation::Equal)
        upper_[idx] = std::min(upper_[idx], v);
      if (rel == Relation::GreaterEq || rel == Relation::Equal)
        lower_[idx] = std::max(lower_[idx], v);
    }
    for (int v = 0; v < lp_.num_vars; ++v) {
      auto idx = static_cast<std::size_t>(v);
      if (lower_[idx] > upper_[idx]) {
        if (lower_[idx] - upper_[idx] <= cfg_.feas_tol * (1.0 + std::fabs(lower_[idx])))
          upper_[idx] = lower_[idx];
        else
          return false;
      }
    }
    return true;
  }

  void build_columns() {
    vmap_.assign(static_cast<std::size_t>(lp_.num_vars), {});
    num_structural_ = 0;
    for (int v = 0; v < lp_.num_vars; ++v) {
      auto idx = static_cast<std::size_t>(v);
      VarMap& vm = vmap_[idx];
      if (lower_[idx] > -kLpInf) {
        vm.shift = lower_[idx];
        vm.col_pos = num_structural_++;
      } else if (upper_[idx] < kLpInf) {
        vm.shift = upper_[idx];
        vm.col_neg = num_structural_++;
      } else {
        vm.col_pos = num_structural_++;
        vm.col_neg = num_structural_++;
      }
    }
  }

  std::vector<int> keep_rows_;

  void build_tableau() {
    m_ = static_cast<int>(keep_rows_.size());
    int num_slack = 0;
    num_artificial_ = 0;
    std::vector<double> rhs(static_cast<std::size_t>(m_));
    std::vector<int> sign(static_cast<std::size_t>(m_), 1);
    std::vector<Relation> rel(static_cast<std::size_t>(m_));
    bmax_ = 0.0;

    for (int i = 0; i < m_; ++i) {
      const auto& cons = lp_.constraints[static_cast<std::size_t>(keep_rows_[static_cast<std::size_t>(i)])];
      double shift_sum = 0.0;
      for (int v = 0; v < lp_.num_vars; ++v)
        shift_sum += cons.a[static_cast<std::size_t>(v)] * vmap_[static_cast<std::size_t>(v)].shift;
      double b = cons.b - shift_sum;
      Relation r = cons.rel;
      int s = 1;
      if (b < 0) {
        b = -b;
        s = -1;
        if (r == Relation::LessEq) r = Relation::GreaterEq;
        else if (r == Relation::GreaterEq) r = Relation::LessEq;
      }
      rhs[static_cast<std::size_t>(i)] = b;
      sign[static_cast<std::size_t>(i)] = s;
      rel[static_cast<std::size_t>(i)] = r;
      bmax_ = std::max(bmax_, b);
      if (r != Relation::Equal) ++num_slack;
      if (r != Relation::LessEq) ++num_artificial_;
    }

    int slack_base = num_structural_;
    first_artificial_ = num_structural_ + num_slack;
    ncols_ = first_artificial_ + num_artificial_;

    tab_.assign(static_cast<std::size_t>(m_) * ncols_, 0.0);
    xb_.assign(static_cast<std::size_t>(m_), 0.0);
    basic_.assign(static_cast<std::size_t>(m_), -1);
    state_.assign(static_cast<std::size_t>(ncols_), ColState::AtLower);
    cap_.assign(static_cast<std::size_t>(ncols_), kLpInf);

    for (int v = 0; v < lp_.num_vars; ++v) {
      auto idx = static_cast<std::size_t>(v);
      const VarMap& vm = vmap_[idx];
      if (vm.col_pos >= 0 && vm.col_neg >= 0) continue;  // split: caps stay infinite
      double range = upper_[idx] - lower_[idx];
      int col = vm.col_pos >= 0 ? vm.col_pos : vm.col_neg;
      cap_[static_cast<std::size_t>(col)] = range;  // inf when one bound absent
    }

    int next_slack = slack_base;
    int next_art = first_artificial_;
    for (int i = 0; i < m_; ++i) {
      const auto& cons = lp_.constraints[static_cast<std::size_t>(keep_rows_[static_cast<std::size_t>(i)])];
      int s = sign[static_cast<std::size_t>(i)];
      for (int v = 0; v < lp_.num_vars; ++v) {
        double a = cons.a[static_cast<std::size_t>(v)] * s;
        if (a == 0.0) continue;
        const VarMap& vm = vmap_[static_cast<std::size_t>(v)];
        if (vm.col_pos >= 0) at(i, vm.col_pos) += a;
        if (vm.col_neg >= 0) at(i, vm.col_neg) -= a;
      }
      Relation r = rel[static_cast<std::size_t>(i)];
      xb_[static_cast<std::size_t>(i)] = rhs[static_cast<std::size_t>(i)];
      if (r == Relation::LessEq) {
        at(i, next_slack) = 1.0;
        basic_[static_cast<std::size_t>(i)] = next_slack;
        state_[static_cast<std::size_t>(next_slack)] = ColState::Basic;
        ++next_slack;
      } else {
        if (r == Relation::GreaterEq) at(i, next_slack++) = -1.0;
        at(i, next_art) = 1.0;
        basic_[static_cast<std::size_t>(i)] = next_art;
        state_[static_cast<std::size_t>(next_art)] = ColState::Basic;
        ++next_art;
      }
    }
  }

  void compute_cost_row() {
    cost_.assign(static_cast<std::size_t>(ncols_), 0.0);
    if (phase_ == 1) {
      for (int c = first_artificial_; c < ncols_; ++c) cost_[static_cast<std::size_t>(c)] = -1.0;
    } else {
      for (int v = 0; v < lp_.num_vars; ++v) {
        double c = lp_.objective[static_cast<std::size_t>(v)];
        if (c == 0.0) continue;
        const VarMap& vm = vmap_[static_cast<std::size_t>(v)];
        if (vm.col_pos >= 0) cost_[static_cast<std::size_t>(vm.col_pos)] += c;
        if (vm.col_neg >= 0) cost_[static_cast<std::size_t>(vm.col_neg)] -= c;
      }
    }
    red_ = cost_;
    for (int i = 0; i < m_; ++i) {
      double cb = cost_[static_cast<std::size_t>(basic_[static_cast<std::size_t>(i)])];
      if (cb == 0.0) continue;
      for (int c = 0; c < ncols_; ++c) red_[static_cast<std::size_t>(c)] -= cb * at(i, c);
    }
    work_ += static_cast<std::uint64_t>(m_) * ncols_;
  }

  // Returns false when the phase objective is unbounded.
  bool iterate() {
    for (;;) {
      if (static_cast<std::uint64_t>(iterations_) > cfg_.max_iterations)
        throw SimplexError("simplex iteration limit exceeded");

      // Entering column: Bland's rule, smallest eligible index.
      int q = -1;
      int dir = 0;
      for (int c = 0; c < ncols_; ++c) {
        auto idx = static_cast<std::size_t>(c);
        if (state_[idx] == ColState::Basic) continue;
        if (cap_[idx] <= 0.0 && state_[idx] == ColState::AtLower) continue;  // fixed column
        if (state_[idx] == ColState::AtLower && red_[idx] > cfg_.opt_tol) {
          q = c; dir = 1; break;
        }
        if (state_[idx] == ColState::AtUpper && red_[idx] < -cfg_.opt_tol) {
          q = c; dir = -1; break;
        }
      }
      if (q < 0) return true;  // optimal for this phase
      ++iterations_;

      // Ratio test with bound flips.
      double best_t = cap_[static_cast<std::size_t>(q)];
      int best_row = -1;
      ColState best_hit = ColState::AtLower;
      for (int i = 0; i < m_; ++i) {
        double d = dir * at(i, q);
        double t;
        ColState hit;
        if (d > cfg_.pivot_tol) {
          t = xb_[static_cast<std::size_t>(i)] / d;
          hit = ColState::AtLower;
        } else if (d < -cfg_.pivot_tol) {
          double cap_b = cap_[static_cast<std::size_t>(basic_[static_cast<std::size_t>(i)])];
          if (cap_b >= kLpInf) continue;
          t = (cap_b - xb_[static_cast<std::size_t>(i)]) / (-d);
          hit = ColState::AtUpper;
        } else {
          continue;
        }
        if (t < 0.0) t = 0.0;
        if (t < best_t - 1e-12) {
          best_t = t;
          best_row = i;
          best_hit = hit;
        } else if (t <= best_t + 1e-12 && best_row >= 0 &&
                   basic_[static_cast<std::size_t>(i)] < basic_[static_cast<std::size_t>(best_row)]) {
          best_row = i;
          best_hit = hit;
        } else if (t <= best_t + 1e-12 && best_row < 0 && t <= best_t) {
          // Tie against the entering column's own bound: prefer the pivot.
          best_t = t;
          best_row = i;
          best_hit = hit;
        }
      }
      work_ += static_cast<std::uint64_t>(m_);

      if (best_row < 0 && best_t >= kLpInf) return false;  // unbounded direction

      if (best_row < 0) {
        // Entering variable runs to its opposite bound; basis unchanged.
        for (int i = 0; i < m_; ++i)
          xb_[static_cast<std::size_t>(i)] -= dir * at(i, q) * best_t;
        state_[static_cast<std::size_t>(q)] =
            dir > 0 ? ColState::AtUpper : ColState::AtLower;
        continue;
      }

      pivot(best_row, q, dir, best_t, best_hit);
    }
  }

  void pivot(int lr, int q, int dir, double t, ColState leaving_state) {
    double entering_start = state_[static_cast<std::size_t>(q)] == ColState::AtUpper
                                ? cap_[static_cast<std::size_t>(q)]
                                : 0.0;
    double entering_value = entering_start + dir * t;

    for (int i = 0; i < m_; ++i) {
      if (i == lr) continue;
      xb_[static_cast<std::size_t>(i)] -= dir * at(i, q) * t;
    }

    int leaving = basic_[static_cast<std::size_t>(lr)];
    state_[static_cast<std::size_t>(leaving)] = leaving_state;

    double piv = at(lr, q);
    if (std::fabs(piv) <= cfg_.pivot_tol) throw SimplexError("ill-conditioned pivot");
    double inv = 1.0 / piv;
    for (int c = 0; c < ncols_; ++c) at(lr, c) *= inv;
    at(lr, q) = 1.0;
    for (int i = 0; i < m_; ++i) {
      if (i == lr) continue;
      double f = at(i, q);
      if (f == 0.0) continue;
      for (int c = 0; c < ncols_; ++c) at(i, c) -= f * at(lr, c);
      at(i, q) = 0.0;
      work_ += static_cast<std::uint64_t>(ncols_);
    }
    double f = red_[static_cast<std::size_t>(q)];
    if (f != 0.0) {
      for (int c = 0; c < ncols_; ++c) red_[static_cast<std::size_t>(c)] -= f * at(lr, c);
      red_[static_cast<std::size_t>(q)] = 0.0;
    }
    work_ += static_cast<std::uint64_t>(2 * ncols_);

    basic_[static_cast<std::size_t>(lr)] = q;
    state_[static_cast<std::size_t>(q)] = ColState::Basic;
    xb_[static_cast<std::size_t>(lr)] = entering_value;
  }

  void drive_out_artificials() {
    for (int i = 0; i < m_; ++i) {
      if (!is_artificial(basic_[static_cast<std::size_t>(i)])) continue;
      int best = -1;
      double best_mag = cfg_.pivot_tol;
      for (int c = 0; c < first_artificial_; ++c) {
        if (state_[static_cast<std::size_t>(c)] == ColState::Basic) continue;
        double mag = std::fabs(at(i, c));
        if (mag > best_mag) {
          best_mag = mag;
          best = c;
        }
      }
      if (best < 0) continue;  // redundant row; artificial stays basic at ~0
      // Degenerate pivot: the artificial sits at (near) zero.
      ColState entering_old = state_[static_cast<std::size_t>(best)];
      double entering_start = entering_old == ColState::AtUpper ? cap_[static_cast<std::size_t>(best)] : 0.0;
      int leaving = basic_[static_cast<std::size_t>(i)];
      state_[static_cast<std::size_t>(leaving)] = ColState::AtLower;
      double piv = at(i, best);
      double inv = 1.0 / piv;
      for (int c = 0; c < ncols_; ++c) at(i, c) *= inv;
      at(i, best) = 1.0;
      for (int r = 0; r < m_; ++r) {
        if (r == i) continue;
        double f = at(r, best);
        if (f == 0.0) continue;
        for (int c = 0; c < ncols_; ++c) at(r, c) -= f * at(i, c);
        at(r, best) = 0.0;
        work_ += static_cast<std::uint64_t>(ncols_);
      }
      basic_[static_cast<std::size_t>(i)] = best;
      state_[static_cast<std::size_t>(best)] = ColState::Basic;
      xb_[static_cast<std::size_t>(i)] = entering_start;
    }
  }

  LpSolution extract() {
    std::vector<double> colval(static_cast<std::size_t>(ncols_), 0.0);
    for (int c = 0; c < ncols_; ++c) {
      if (state_[static_cast<std::size_t>(c)] == ColState::AtUpper)
        colval[static_cast<std::size_t>(c)] = cap_[static_cast<std::size_t>(c)];
    }
    for (int i = 0; i < m_; ++i)
      colval[static_cast<std::size_t>(basic_[static_cast<std::size_t>(i)])] =
          xb_[static_cast<std::size_t>(i)];

    LpSolution sol;
    sol.status = LpStatus::Optimal;
    sol.x.assign(static_cast<std::size_t>(lp_.num_vars), 0.0);
    for (int v = 0; v < lp_.num_vars; ++v) {
      const VarMap& vm = vmap_[static_cast<std::size_t>(v)];
      double y = 0.0;
      if (vm.col_pos >= 0) y += colval[static_cast<std::size_t>(vm.col_pos)];
      if (vm.col_neg >= 0) y -= colval[static_cast<std::size_t>(vm.col_neg)];
      sol.x[static_cast<std::size_t>(v)] = vm.shift + y;
    }
    double obj = 0.0;
    for (int v = 0; v < lp_.num_vars; ++v)
      obj += lp_.objective[static_cast<std::size_t>(v)] * sol.x[static_cast<std::size_t>(v)];
    sol.objective_value = obj;
    sol.iterations = iterations_;
    sol.work = work_;
    return sol;
  }
};

}  // namespace detail

inline LpSolution solve(const LinearProgram& lp, const SimplexConfig& cfg = {}) {
  detail::SimplexSolver solver(lp, cfg);
  return solver.run();
}

}  // namespace rqa
