#include <doctest.h>

#include <cmath>

#include "ncsos/games.hpp"

using namespace ncsos;

TEST_CASE("builtins round-trip through text") {
  for (const auto& name : builtin_names()) {
    const Game g = builtin(name);
    CHECK_NOTHROW(g.validate());
    const ParsedGame back = parse_game(serialize(g));
    CHECK(back.game == g);
    CHECK(back.notes.empty());
  }
  CHECK_THROWS_AS(builtin("nope"), Error);
}

TEST_CASE("CHSH game operator") {
  const BellOperator b = bell_operator(builtin("chsh-game"));
  CHECK(b.mode == OperatorKind::projector);
  CHECK(is_hermitian(b.polynomial));
  // Each of the four question pairs wins on two of four answer pairs.
  double total = b.offset;
  for (const auto& [m, c] : b.polynomial.terms()) total += c;
  CHECK(total == doctest::Approx(2.0));
}

TEST_CASE("correlator form maps to observables or outcome-0 projectors") {
  const BellOperator chsh = bell_operator(builtin("chsh-correlator"));
  CHECK(chsh.mode == OperatorKind::observable);
  CHECK(chsh.polynomial.size() == 4);
  const BellOperator i3322 = bell_operator(builtin("i3322"));
  CHECK(i3322.mode == OperatorKind::projector);
  for (const auto& [m, c] : i3322.polynomial.terms())
    for (const auto& g : m.word()) CHECK(g.outcome == 0);
  CHECK(i3322.polynomial.size() == 11);
}

TEST_CASE("missing pi defaults to uniform and says so") {
  const char* text =
      "game g\nform probability\nparties 2\nsettings 1 2\noutcomes 2\n"
      "v 0 0 0 0 1\nv 0 1 1 1 1\n";
  const ParsedGame p = parse_game(text);
  CHECK(p.notes.size() == 1);
  CHECK(p.game.pi.size() == 2);
  CHECK(p.game.pi.at({0, 1}) == doctest::Approx(0.5));
  CHECK(parse_game(serialize(p.game)).game == p.game);
}

TEST_CASE("parse errors carry the line number") {
  auto line_of = [](const std::string& text) {
    try {
      parse_game(text);
    } catch (const ParseError& e) {
      return static_cast<int>(e.line());
    }
    return -1;
  };
  const std::string head = "game g\nform probability\nparties 2\nsettings 2 2\noutcomes 2\n";
  CHECK(line_of(head + "v 0 0 0 0 2\n") >= 0);
  CHECK(line_of(head + "v 0 0 0 x 1\n") == 6);
  CHECK(line_of(head + "bogus 1\n") == 6);
  CHECK(line_of(head + "pi 0 0 0.5\npi 0 1 0.2\n") >= 0);
  CHECK(line_of("game g\nparties 0\n") == 2);
}

TEST_CASE("random games are reproducible") {
  const Game a = random_probability_game({2, 3}, 2, 17);
  const Game b = random_probability_game({2, 3}, 2, 17);
  const Game c = random_probability_game({2, 3}, 2, 18);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK_NOTHROW(a.validate());
}
