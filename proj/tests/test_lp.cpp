#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "rqa/lp.hpp"
#include "rqa/rng.hpp"
#include "support/lp_oracle.hpp"

using namespace rqa;
using rqa_test::random_boxed_lp;
using rqa_test::vertex_enumeration_oracle;

TEST_CASE("single bound active", "[lp]") {
  LinearProgram lp(1);
  lp.objective = {1.0};
  lp.lower = {0.0};
  lp.upper = {kLpInf};
  lp.add_constraint({1.0}, Relation::LessEq, 3.0);
  LpSolution s = solve(lp);
  REQUIRE(s.status == LpStatus::Optimal);
  REQUIRE(s.x[0] == Catch::Approx(3.0));
  REQUIRE(s.objective_value == Catch::Approx(3.0));
}

TEST_CASE("two-variable simplex", "[lp]") {
  LinearProgram lp(2);
  lp.objective = {1.0, 1.0};
  lp.lower = {0.0, 0.0};
  lp.upper = {kLpInf, kLpInf};
  lp.add_constraint({1.0, 1.0}, Relation::LessEq, 1.0);
  LpSolution s = solve(lp);
  REQUIRE(s.status == LpStatus::Optimal);
  REQUIRE(s.objective_value == Catch::Approx(1.0));
}

TEST_CASE("infeasible and unbounded detection", "[lp]") {
  LinearProgram inf(1);
  inf.objective = {1.0};
  inf.lower = {0.0};
  inf.upper = {kLpInf};
  inf.add_constraint({1.0}, Relation::LessEq, 1.0);
  inf.add_constraint({1.0}, Relation::GreaterEq, 2.0);
  REQUIRE(solve(inf).status == LpStatus::Infeasible);

  LinearProgram unb(1);
  unb.objective = {1.0};
  REQUIRE(solve(unb).status == LpStatus::Unbounded);

  // Free variable pushed down by the objective, no lower bound.
  LinearProgram unb2(2);
  unb2.objective = {-1.0, 0.0};
  unb2.upper = {5.0, 5.0};
  unb2.lower[1] = 0.0;
  unb2.add_constraint({0.0, 1.0}, Relation::LessEq, 2.0);
  REQUIRE(solve(unb2).status == LpStatus::Unbounded);
}

TEST_CASE("equalities, free variables and fixed variables", "[lp]") {
  // max x + y  s.t.  x + y = 2, x - y = 0, both variables free.
  LinearProgram lp(2);
  lp.objective = {1.0, 1.0};
  lp.add_constraint({1.0, 1.0}, Relation::Equal, 2.0);
  lp.add_constraint({1.0, -1.0}, Relation::Equal, 0.0);
  LpSolution s = solve(lp);
  REQUIRE(s.status == LpStatus::Optimal);
  REQUIRE(s.x[0] == Catch::Approx(1.0));
  REQUIRE(s.x[1] == Catch::Approx(1.0));

  LinearProgram fixed(2);
  fixed.objective = {1.0, 3.0};
  fixed.lower = {0.0, 0.75};
  fixed.upper = {kLpInf, 0.75};
  fixed.add_constraint({1.0, 1.0}, Relation::LessEq, 2.0);
  LpSolution f = solve(fixed);
  REQUIRE(f.status == LpStatus::Optimal);
  REQUIRE(f.x[1] == Catch::Approx(0.75));
  REQUIRE(f.x[0] == Catch::Approx(1.25));
}

TEST_CASE("solutions satisfy constraints within tolerance", "[lp]") {
  auto gen = rng::make_engine(rng::derive_seed(11, "lp-feas"));
  for (int it = 0; it < 40; ++it) {
    LinearProgram lp = random_boxed_lp(gen);
    LpSolution s = solve(lp);
    if (s.status != LpStatus::Optimal) continue;
    for (const auto& c : lp.constraints) {
      double lhs = 0.0;
      for (int v = 0; v < lp.num_vars; ++v)
        lhs += c.a[static_cast<std::size_t>(v)] * s.x[static_cast<std::size_t>(v)];
      double tol = 1e-7 * (1.0 + std::fabs(c.b));
      if (c.rel == Relation::LessEq) REQUIRE(lhs <= c.b + tol);
      if (c.rel == Relation::GreaterEq) REQUIRE(lhs >= c.b - tol);
      if (c.rel == Relation::Equal) REQUIRE(std::fabs(lhs - c.b) <= tol);
    }
    for (int v = 0; v < lp.num_vars; ++v) {
      REQUIRE(s.x[static_cast<std::size_t>(v)] >= lp.lower[static_cast<std::size_t>(v)] - 1e-9);
      REQUIRE(s.x[static_cast<std::size_t>(v)] <= lp.upper[static_cast<std::size_t>(v)] + 1e-9);
    }
  }
}

TEST_CASE("simplex matches the vertex-enumeration oracle", "[lp]") {
  auto gen = rng::make_engine(rng::derive_seed(11, "lp-oracle"));
  int optimal = 0;
  for (int it = 0; it < 50; ++it) {
    LinearProgram lp = random_boxed_lp(gen);
    LpSolution s = solve(lp);
    rqa_test::OracleResult o = vertex_enumeration_oracle(lp);
    if (o.feasible) {
      REQUIRE(s.status == LpStatus::Optimal);
      REQUIRE_THAT(s.objective_value,
                   Catch::Matchers::WithinAbs(o.objective, 1e-6 * (1.0 + std::fabs(o.objective))));
      ++optimal;
    } else {
      REQUIRE(s.status == LpStatus::Infeasible);
    }
  }
  REQUIRE(optimal >= 20);  // the generator must exercise the optimal path
}

TEST_CASE("equality-constrained LPs match the oracle", "[lp]") {
  auto gen = rng::make_engine(rng::derive_seed(11, "lp-equalities"));
  int optimal = 0;
  for (int it = 0; it < 30; ++it) {
    LinearProgram lp = random_boxed_lp(gen);
    // Anchor one or two equalities at an interior point so the program
    // stays feasible often enough to matter.
    std::vector<double> x0(static_cast<std::size_t>(lp.num_vars));
    for (int v = 0; v < lp.num_vars; ++v)
      x0[static_cast<std::size_t>(v)] =
          0.5 * (lp.lower[static_cast<std::size_t>(v)] + lp.upper[static_cast<std::size_t>(v)]);
    int eqs = static_cast<int>(rng::uniform_int(gen, 1, 2));
    for (int e = 0; e < eqs; ++e) {
      std::vector<double> row(static_cast<std::size_t>(lp.num_vars));
      double b = 0.0;
      for (int v = 0; v < lp.num_vars; ++v) {
        row[static_cast<std::size_t>(v)] = rng::uniform_real(gen, -1.0, 1.0);
        b += row[static_cast<std::size_t>(v)] * x0[static_cast<std::size_t>(v)];
      }
      lp.add_constraint(std::move(row), Relation::Equal, b);
    }
    LpSolution s = solve(lp);
    rqa_test::OracleResult o = vertex_enumeration_oracle(lp);
    if (o.feasible) {
      REQUIRE(s.status == LpStatus::Optimal);
      REQUIRE_THAT(s.objective_value,
                   Catch::Matchers::WithinAbs(o.objective, 1e-6 * (1.0 + std::fabs(o.objective))));
      ++optimal;
    } else if (s.status == LpStatus::Optimal) {
      // The oracle can miss degenerate vertices; accept a verified optimum.
      for (const auto& c : lp.constraints) {
        double lhs = 0.0;
        for (int v = 0; v < lp.num_vars; ++v)
          lhs += c.a[static_cast<std::size_t>(v)] * s.x[static_cast<std::size_t>(v)];
        double tol = 1e-6 * (1.0 + std::fabs(c.b));
        if (c.rel == Relation::Equal) REQUIRE(std::fabs(lhs - c.b) <= tol);
      }
    }
  }
  REQUIRE(optimal >= 10);
}

TEST_CASE("identical input yields identical solutions", "[lp]") {
  auto gen = rng::make_engine(rng::derive_seed(11, "lp-determinism"));
  LinearProgram lp = random_boxed_lp(gen);
  LpSolution a = solve(lp);
  LpSolution b = solve(lp);
  REQUIRE(a.status == b.status);
  REQUIRE(a.iterations == b.iterations);
  REQUIRE(a.x == b.x);
}

TEST_CASE("lp_to_text lists one constraint per line", "[lp]") {
  LinearProgram lp(2);
  lp.objective = {1.0, 0.0};
  lp.lower = {0.0, 0.0};
  lp.upper = {1.0, 2.0};
  lp.add_constraint({1.0, 1.0}, Relation::LessEq, 1.5);
  std::string text = lp_to_text(lp);
  REQUIRE(text.find("max 1*x1") != std::string::npos);
  REQUIRE(text.find("<= 1.5") != std::string::npos);
}
