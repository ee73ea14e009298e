#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "rqa/postprocess.hpp"
#include "rqa/rng.hpp"

using namespace rqa;

namespace {

IsingModel random_model(std::mt19937_64& gen, int n, double density = 0.5) {
  IsingModel m(n);
  for (auto& v : m.h) v = rng::uniform_real(gen, -2.0, 2.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng::uniform01(gen) < density) m.set_j(i, j, rng::uniform_real(gen, -1.0, 1.0));
  return m;
}

SpinVector random_spins(std::mt19937_64& gen, int n) {
  SpinVector z(static_cast<std::size_t>(n));
  for (auto& v : z) v = rng::uniform01(gen) < 0.5 ? -1 : 1;
  return z;
}

}  // namespace

TEST_CASE("mqc on equal inputs returns the input", "[postprocess]") {
  auto gen = rng::make_engine(rng::derive_seed(13, "mqc-equal"));
  IsingModel m = random_model(gen, 6);
  SpinVector a = random_spins(gen, 6);
  REQUIRE(mqc_combine(m, a, a) == a);
  CHECK_THROWS_AS(mqc_combine(m, a, SpinVector{1}), std::invalid_argument);
}

TEST_CASE("mqc resolves independent single-spin components", "[postprocess]") {
  IsingModel m(2);
  m.h = {-1.0, -1.0};
  SpinVector a{1, -1};
  SpinVector b{-1, 1};
  SpinVector out = mqc_combine(m, a, b);
  REQUIRE(out == SpinVector{1, 1});
  REQUIRE(energy(m, out) == Catch::Approx(-2.0));
  REQUIRE(energy(m, out) <= std::min(energy(m, a), energy(m, b)));
}

TEST_CASE("disagreement components partition the differing spins", "[postprocess]") {
  auto gen = rng::make_engine(rng::derive_seed(13, "mqc-components"));
  for (int it = 0; it < 50; ++it) {
    int n = static_cast<int>(rng::uniform_int(gen, 2, 10));
    IsingModel m = random_model(gen, n, 0.3);
    SpinVector a = random_spins(gen, n);
    SpinVector b = random_spins(gen, n);
    auto comps = disagreement_components(m, a, b);
    std::set<int> seen;
    for (const auto& c : comps)
      for (int i : c.spins) {
        REQUIRE(seen.insert(i).second);  // disjoint
        REQUIRE(a[static_cast<std::size_t>(i)] != b[static_cast<std::size_t>(i)]);
      }
    std::set<int> expect;
    for (int i = 0; i < n; ++i)
      if (a[static_cast<std::size_t>(i)] != b[static_cast<std::size_t>(i)]) expect.insert(i);
    REQUIRE(seen == expect);
  }
}

TEST_CASE("mqc dominance over both parents", "[postprocess]") {
  auto gen = rng::make_engine(rng::derive_seed(13, "mqc-dominance"));
  for (int it = 0; it < 200; ++it) {
    int n = static_cast<int>(rng::uniform_int(gen, 2, 10));
    IsingModel m = random_model(gen, n);
    SpinVector a = random_spins(gen, n);
    SpinVector b = random_spins(gen, n);
    SpinVector out = mqc_combine(m, a, b);
    REQUIRE(energy(m, out) <= std::min(energy(m, a), energy(m, b)) + 1e-12);
  }
}

TEST_CASE("mqc tournament", "[postprocess]") {
  auto gen = rng::make_engine(rng::derive_seed(13, "mqc-tournament"));
  IsingModel m = random_model(gen, 10);

  SECTION("single-element batch") {
    SpinVector a = random_spins(gen, 10);
    REQUIRE(mqc_tournament(m, {a}) == a);
  }
  SECTION("empty batch rejected") {
    CHECK_THROWS_AS(mqc_tournament(m, {}), std::invalid_argument);
  }
  SECTION("batch containing a ground state keeps its energy") {
    GroundState g = brute_force_ground(m);
    std::vector<SpinVector> batch{random_spins(gen, 10), g.states.front(), random_spins(gen, 10)};
    SpinVector out = mqc_tournament(m, batch);
    REQUIRE(energy(m, out) == Catch::Approx(g.energy));
  }
  SECTION("output never exceeds the batch minimum") {
    for (int it = 0; it < 30; ++it) {
      std::vector<SpinVector> batch;
      for (int k = 0; k < 8; ++k) batch.push_back(random_spins(gen, 10));
      double best = 1e300;
      for (const auto& z : batch) best = std::min(best, energy(m, z));
      REQUIRE(energy(m, mqc_tournament(m, batch)) <= best + 1e-12);
    }
  }
}

TEST_CASE("sqc reaches a one-flip local minimum", "[postprocess]") {
  IsingModel single(1);
  single.h = {-1.0};
  REQUIRE(sqc(single, SpinVector{-1}) == SpinVector{1});
  REQUIRE(sqc(single, SpinVector{1}) == SpinVector{1});  // fixpoint

  auto gen = rng::make_engine(rng::derive_seed(13, "sqc"));
  for (int it = 0; it < 60; ++it) {
    IsingModel m = random_model(gen, 12);
    SpinVector z = random_spins(gen, 12);
    SpinVector out = sqc(m, z);
    REQUIRE(energy(m, out) <= energy(m, z) + 1e-12);
    // Verify minimality by enumerating all single flips.
    for (int i = 0; i < 12; ++i) {
      SpinVector flip = out;
      flip[static_cast<std::size_t>(i)] = static_cast<std::int8_t>(-flip[static_cast<std::size_t>(i)]);
      REQUIRE(energy(m, flip) >= energy(m, out) - 1e-12);
    }
    // Idempotence: already a local minimum.
    REQUIRE(sqc(m, out) == out);
  }
}

TEST_CASE("sqc never flips on exact ties", "[postprocess]") {
  IsingModel m(2);  // all-zero model: every flip has delta = 0
  SpinVector z{1, -1};
  REQUIRE(sqc(m, z) == z);
}
