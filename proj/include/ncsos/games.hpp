#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ncsos/nc_algebra.hpp"

namespace ncsos {

enum class GameForm { probability, correlator };

std::string_view to_string(GameForm form);

/// A one-round N-party nonlocal game or Bell functional.
///
/// Probability form: questions drawn from `pi` over setting tuples, payoff
/// V(a|s) in [0, 1] stored under the key (s_1..s_N, a_1..a_N). The game is
/// played with projective measurements.
///
/// Correlator form: binary-outcome functional with full-correlator
/// coefficients keyed by setting tuples, single-party marginals, and a
/// constant. With observable operators each letter is a +-1 observable; with
/// projector operators each letter is the outcome-0 projector (the
/// Collins-Gisin style used by I3322).
struct Game {
  std::string name;
  GameForm form = GameForm::probability;
  OperatorKind operators = OperatorKind::projector;
  std::vector<int> settings;               // per party
  std::vector<std::vector<int>> outcomes;  // [party][setting]

  std::map<std::vector<int>, double> pi;
  std::map<std::vector<int>, double> payoff;

  std::map<std::vector<int>, double> correlators;
  std::map<std::pair<int, int>, double> marginals;  // (party, setting)
  double constant = 0.0;

  int num_parties() const noexcept { return static_cast<int>(settings.size()); }
  std::shared_ptr<const Schema> schema() const;
  /// Throws Error describing the first violated invariant.
  void validate() const;

  friend bool operator==(const Game&, const Game&) = default;
};

/// The game polynomial. `offset` carries the functional's constant term so
/// that the value of a strategy is <B> + offset.
struct BellOperator {
  NCPolynomial polynomial;
  double offset = 0.0;
  OperatorKind mode = OperatorKind::projector;
};

BellOperator bell_operator(const Game& g);

/// Names accepted by builtin().
std::vector<std::string> builtin_names();
/// chsh-game, chsh-correlator, i3322, yao.
Game builtin(std::string_view name);

struct ParsedGame {
  Game game;
  /// Defaults the parser applied, e.g. a uniform question distribution.
  std::vector<std::string> notes;
};

/// Line-oriented game file; see README for the grammar. Errors are ParseError
/// with the offending line number.
ParsedGame parse_game(std::string_view text);
std::string serialize(const Game& g);

/// Uniformly random probability-form game (fixed seed -> fixed game). Used by
/// tests and the acceptance suite.
Game random_probability_game(std::vector<int> settings, int outcomes, unsigned long long seed);

}  // namespace ncsos
