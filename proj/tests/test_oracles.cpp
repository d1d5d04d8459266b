#include <doctest.h>

#include <cmath>
#include <random>

#include "ncsos/hierarchy.hpp"
#include "ncsos/oracles.hpp"

using namespace ncsos;

TEST_CASE("classical values") {
  CHECK(classical_value(builtin("chsh-game")) == 0.75);
  CHECK(classical_value(builtin("chsh-correlator")) == doctest::Approx(2.0));
  CHECK(classical_value(builtin("i3322")) == doctest::Approx(0.0));
  CHECK(classical_value(builtin("yao")) == doctest::Approx(4.0));
}

TEST_CASE("classical value is the best deterministic strategy") {
  const Game g = random_probability_game({2, 2}, 2, 4);
  double best = -1;
  for (int code = 0; code < 16; ++code) {
    const DeterministicStrategy s = {{code & 1, (code >> 1) & 1}, {(code >> 2) & 1, (code >> 3) & 1}};
    best = std::max(best, strategy_value(g, s));
  }
  CHECK(classical_value(g) == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("see-saw reaches the known qubit optima") {
  CHECK(seesaw_lower_bound(builtin("chsh-correlator"), 2, 5, 1) >= 2 * std::sqrt(2.0) - 1e-6);
  CHECK(seesaw_lower_bound(builtin("chsh-game"), 2, 5, 1) >= 0.5 + std::sqrt(2.0) / 4 - 1e-6);
  CHECK(seesaw_lower_bound(builtin("i3322"), 2, 20, 7) >= 0.25 - 1e-6);
}

TEST_CASE("see-saw is monotone and its value is certified") {
  for (const char* name : {"i3322", "chsh-game", "yao"}) {
    const Game g = builtin(name);
    const auto r = seesaw(g, 2, 4, 3);
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] >= r.trace[i - 1] - 1e-12);
    CHECK(evaluate(g, r.best) == doctest::Approx(r.value).epsilon(1e-12));
    CHECK(embed(g, r.best).constraint_violation() < 1e-9);
    CHECK(r.best.state.norm() == doctest::Approx(1.0));
  }
}

TEST_CASE("see-saw in dimension one is the classical value") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Game g = random_probability_game({2 + static_cast<int>(seed % 2), 2}, 2, seed);
    CHECK(seesaw_lower_bound(g, 1, 30, seed) == doctest::Approx(classical_value(g)).epsilon(1e-9));
  }
}

TEST_CASE("see-saw is reproducible") {
  const Game g = builtin("i3322");
  CHECK(seesaw(g, 2, 3, 42).value == seesaw(g, 2, 3, 42).value);
}

TEST_CASE("oracle argument checks") {
  CHECK_THROWS_AS(seesaw(builtin("chsh-game"), 0, 1, 0), Error);
  CHECK_THROWS_AS(seesaw(builtin("chsh-game"), 2, 0, 0), Error);
  CHECK_THROWS_AS(random_valid_assignment(builtin("chsh-game"), 0, 0), Error);
}

TEST_CASE("Haar unitaries are unitary") {
  std::mt19937_64 rng(5);
  for (int d = 1; d <= 4; ++d) {
    const ComplexMatrix u = haar_unitary(d, rng);
    CHECK((u.adjoint() * u - ComplexMatrix::Identity(d, d)).norm() < 1e-12);
  }
}
