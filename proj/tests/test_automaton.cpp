#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "rqa/automaton.hpp"
#include "rqa/rng.hpp"

using namespace rqa;

namespace {

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

AutomatonState random_state(std::mt19937_64& gen, int r, double theta1, double theta2,
                            double max_p = 1.0) {
  AutomatonState s = AutomatonState::uniform(r, theta1, theta2);
  for (double& v : s.p) v = rng::uniform_real(gen, 0.01, 1.0);
  double total = sum(s.p);
  for (double& v : s.p) v = std::min(max_p, v / total);
  total = sum(s.p);
  for (double& v : s.p) v /= total;
  return s;
}

}  // namespace

TEST_CASE("single-action reward step", "[automaton]") {
  AutomatonState s = AutomatonState::uniform(2, 0.1, 0.0);
  AutomatonState next = update_single(s, 0, 1.0);
  REQUIRE(next.p[0] == Catch::Approx(0.55));
  REQUIRE(next.p[1] == Catch::Approx(0.45));
}

TEST_CASE("single-action no-op conditions", "[automaton]") {
  AutomatonState s = AutomatonState::uniform(3, 0.1, 0.0);
  s.p = {0.5, 0.3, 0.2};
  // beta = 0 with theta2 = 0: both correction terms vanish.
  REQUIRE(update_single(s, 1, 0.0).p == s.p);
  // theta1 = theta2 = 0: identity for any beta.
  s.theta1 = 0.0;
  REQUIRE(update_single(s, 1, 0.77).p == s.p);

  CHECK_THROWS_AS(update_single(s, 0, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(update_single(s, 5, 0.5), std::invalid_argument);
}

TEST_CASE("multi-action update with a single taken action", "[automaton]") {
  // r = 3, uniform p, taken = {0}, beta = 1, theta1 = 0.1, theta2 = 0:
  // p0 <- 1/3 + 0.1 * 2/3, others <- 1/3 - (0.1/2) * (1 - 1/3).
  AutomatonState s = AutomatonState::uniform(3, 0.1, 0.0);
  std::vector<double> raw = update_multi_raw(s, Feedback{{0}, 1.0});
  REQUIRE(raw[0] == Catch::Approx(1.0 / 3 + 0.1 * (2.0 / 3)));
  REQUIRE(raw[1] == Catch::Approx(1.0 / 3 - 0.05 * (2.0 / 3)));
  REQUIRE(raw[2] == Catch::Approx(raw[1]));
  REQUIRE(sum(raw) == Catch::Approx(1.0));

  AutomatonState next = update_multi(s, Feedback{{0}, 1.0});
  REQUIRE(sum(next.p) == Catch::Approx(1.0));
}

TEST_CASE("multi-action no-op conditions", "[automaton]") {
  AutomatonState s = AutomatonState::uniform(4, 0.3, 0.0);
  s.p = {0.4, 0.3, 0.2, 0.1};
  REQUIRE(update_multi(s, Feedback{{0, 2}, 0.0}).p == s.p);  // beta = 0, theta2 = 0

  // Degenerate taken sets bypass the update.
  REQUIRE(update_multi(s, Feedback{{}, 0.9}).p == s.p);
  REQUIRE(update_multi(s, Feedback{{0, 1, 2, 3}, 0.9}).p == s.p);

  CHECK_THROWS_AS(update_multi(s, Feedback{{0}, -0.1}), std::invalid_argument);
  CHECK_THROWS_AS(update_multi(s, Feedback{{9}, 0.5}), std::invalid_argument);
}

TEST_CASE("random update sequences stay on the simplex", "[automaton]") {
  auto gen = rng::make_engine(rng::derive_seed(5, "automaton-simplex"));
  for (int seq = 0; seq < 200; ++seq) {
    int r = static_cast<int>(rng::uniform_int(gen, 2, 12));
    AutomatonState s = AutomatonState::uniform(r, rng::uniform01(gen), rng::uniform01(gen));
    for (int step = 0; step < 25; ++step) {
      double beta = rng::uniform01(gen);
      if (rng::uniform01(gen) < 0.5) {
        s = update_single(s, static_cast<int>(rng::uniform_int(gen, 0, r - 1)), beta);
      } else {
        Feedback fb;
        fb.beta = beta;
        for (int i = 0; i < r; ++i)
          if (rng::uniform01(gen) < 0.4) fb.taken.push_back(i);
        s = update_multi(s, fb);
      }
      REQUIRE(std::fabs(sum(s.p) - 1.0) <= 1e-9);
      for (double v : s.p) {
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
      }
    }
  }
}

TEST_CASE("reward direction before normalization", "[automaton]") {
  auto gen = rng::make_engine(rng::derive_seed(5, "automaton-direction"));
  for (int it = 0; it < 300; ++it) {
    int r = static_cast<int>(rng::uniform_int(gen, 2, 10));
    // theta2 = 0, beta > 0, p bounded away from 1.
    AutomatonState s = random_state(gen, r, rng::uniform_real(gen, 0.01, 1.0), 0.0, 0.9);
    double beta = rng::uniform_real(gen, 0.05, 1.0);
    Feedback fb;
    fb.beta = beta;
    int r_hat = static_cast<int>(rng::uniform_int(gen, 1, r - 1));
    for (int i = 0; i < r_hat; ++i) fb.taken.push_back(i);
    std::vector<double> raw = update_multi_raw(s, fb);
    for (int j = 0; j < r; ++j) {
      if (j < r_hat) {
        REQUIRE(raw[static_cast<std::size_t>(j)] > s.p[static_cast<std::size_t>(j)]);
      } else {
        REQUIRE(raw[static_cast<std::size_t>(j)] <= s.p[static_cast<std::size_t>(j)] + 1e-15);
      }
    }
  }
}

TEST_CASE("influence factors", "[automaton]") {
  AutomatonState uniform = AutomatonState::uniform(7);
  std::vector<double> rho = influence_factors(uniform, 7);
  for (double v : rho) REQUIRE(v == 0.0);  // exact: 1/M - 1/M

  AutomatonState s = AutomatonState::uniform(2);
  s.p = {0.7, 0.3};
  rho = influence_factors(s, 2);
  REQUIRE(rho[0] == Catch::Approx(-0.2));
  REQUIRE(rho[1] == Catch::Approx(0.2));

  auto gen = rng::make_engine(rng::derive_seed(5, "automaton-rho"));
  for (int it = 0; it < 100; ++it) {
    int r = static_cast<int>(rng::uniform_int(gen, 2, 20));
    AutomatonState t = random_state(gen, r, 0.1, 0.0);
    REQUIRE(std::fabs(sum(influence_factors(t, r))) <= 1e-9);
  }

  CHECK_THROWS_AS(influence_factors(s, 5), std::invalid_argument);
}

TEST_CASE("automaton json round trip", "[automaton]") {
  AutomatonState s = AutomatonState::uniform(4, 0.1, 0.0);
  s.p = {0.4, 0.3, 0.2, 0.1};
  AutomatonState back = automaton_from_json(automaton_to_json(s));
  REQUIRE(back.p == s.p);
  REQUIRE(back.theta1 == s.theta1);
  REQUIRE(back.theta2 == s.theta2);
}
