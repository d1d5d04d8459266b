#include "ncsos/games.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

namespace ncsos {

std::string_view to_string(GameForm form) {
  return form == GameForm::probability ? "probability" : "correlator";
}

std::shared_ptr<const Schema> Game::schema() const {
  return std::make_shared<const Schema>(operators, outcomes);
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<int>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(xs[i]);
  }
  return out;
}

void check_settings_tuple(const Game& g, const std::vector<int>& s, std::string_view what) {
  if (static_cast<int>(s.size()) != g.num_parties())
    throw Error(std::string(what) + ": expected " + std::to_string(g.num_parties()) + " settings");
  for (int p = 0; p < g.num_parties(); ++p)
    if (s[p] < 0 || s[p] >= g.settings[p])
      throw Error(std::string(what) + ": setting " + std::to_string(s[p]) + " out of range for party " +
                  std::to_string(p));
}

}  // namespace

void Game::validate() const {
  const int n = num_parties();
  if (n < 1) throw Error("game needs at least one party");
  if (static_cast<int>(outcomes.size()) != n) throw Error("outcome table does not match party count");
  for (int p = 0; p < n; ++p) {
    if (settings[p] < 1) throw Error("every party needs at least one setting");
    if (static_cast<int>(outcomes[p].size()) != settings[p])
      throw Error("outcome table does not match settings of party " + std::to_string(p));
    for (int m : outcomes[p])
      if (m < 1) throw Error("outcome counts must be positive");
  }

  if (form == GameForm::probability) {
    if (operators != OperatorKind::projector)
      throw Error("probability-form games use projector operators");
    if (!correlators.empty() || !marginals.empty() || constant != 0.0)
      throw Error("probability-form games take no correlator coefficients");
    double total = 0.0;
    for (const auto& [s, w] : pi) {
      check_settings_tuple(*this, s, "pi");
      if (!(w >= 0.0)) throw Error("pi: probabilities must be nonnegative");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw Error("pi: probabilities sum to " + format_double(total) + ", expected 1");
    for (const auto& [key, v] : payoff) {
      if (static_cast<int>(key.size()) != 2 * n) throw Error("v: wrong number of indices");
      check_settings_tuple(*this, std::vector<int>(key.begin(), key.begin() + n), "v");
      for (int p = 0; p < n; ++p)
        if (key[n + p] < 0 || key[n + p] >= outcomes[p][key[p]])
          throw Error("v: outcome " + std::to_string(key[n + p]) + " out of range for party " +
                      std::to_string(p));
      if (!(v >= 0.0 && v <= 1.0)) throw Error("v: payoffs must lie in [0, 1]");
    }
    return;
  }

  for (int p = 0; p < n; ++p)
    for (int m : outcomes[p])
      if (m != 2) throw Error("correlator-form games need two outcomes per setting");
  if (!pi.empty() || !payoff.empty()) throw Error("correlator-form games take no pi or v entries");
  for (const auto& [s, c] : correlators) {
    check_settings_tuple(*this, s, "c");
    if (!std::isfinite(c)) throw Error("c: coefficients must be finite");
  }
  for (const auto& [ps, c] : marginals) {
    const auto [p, s] = ps;
    if (p < 0 || p >= n || s < 0 || s >= settings[p]) throw Error("m: index out of range");
    if (!std::isfinite(c)) throw Error("m: coefficients must be finite");
  }
}

BellOperator bell_operator(const Game& g) {
  g.validate();
  auto schema = g.schema();
  const int n = g.num_parties();
  BellOperator out{NCPolynomial(schema), 0.0, g.operators};
  std::vector<Generator> word(n);

  if (g.form == GameForm::probability) {
    for (const auto& [key, v] : g.payoff) {
      const auto it = g.pi.find(std::vector<int>(key.begin(), key.begin() + n));
      if (it == g.pi.end() || it->second == 0.0 || v == 0.0) continue;
      for (int p = 0; p < n; ++p)
        word[p] = {static_cast<std::uint16_t>(p), static_cast<std::uint16_t>(key[p]),
                   static_cast<std::uint16_t>(key[n + p])};
      out.polynomial.add_term(reduce(word, *schema), it->second * v);
    }
    return out;
  }

  for (const auto& [s, c] : g.correlators) {
    for (int p = 0; p < n; ++p)
      word[p] = {static_cast<std::uint16_t>(p), static_cast<std::uint16_t>(s[p]), 0};
    out.polynomial.add_term(reduce(word, *schema), c);
  }
  for (const auto& [ps, c] : g.marginals) {
    const Generator letter{static_cast<std::uint16_t>(ps.first), static_cast<std::uint16_t>(ps.second), 0};
    out.polynomial.add_term(reduce(std::span(&letter, 1), *schema), c);
  }
  out.offset = g.constant;
  return out;
}

// ---------------------------------------------------------------------------
// Built-in games

std::vector<std::string> builtin_names() { return {"chsh-game", "chsh-correlator", "i3322", "yao"}; }

Game builtin(std::string_view name) {
  Game g;
  g.name = std::string(name);
  if (name == "chsh-game") {
    g.form = GameForm::probability;
    g.operators = OperatorKind::projector;
    g.settings = {2, 2};
    g.outcomes = {{2, 2}, {2, 2}};
    for (int s = 0; s < 2; ++s)
      for (int t = 0; t < 2; ++t) {
        g.pi[{s, t}] = 0.25;
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            if ((a ^ b) == (s & t)) g.payoff[{s, t, a, b}] = 1.0;
      }
  } else if (name == "chsh-correlator") {
    g.form = GameForm::correlator;
    g.operators = OperatorKind::observable;
    g.settings = {2, 2};
    g.outcomes = {{2, 2}, {2, 2}};
    g.correlators = {{{0, 0}, 1.0}, {{0, 1}, 1.0}, {{1, 0}, 1.0}, {{1, 1}, -1.0}};
  } else if (name == "i3322") {
    g.form = GameForm::correlator;
    g.operators = OperatorKind::projector;
    g.settings = {3, 3};
    g.outcomes = {{2, 2, 2}, {2, 2, 2}};
    g.correlators = {{{0, 0}, 1.0}, {{0, 1}, 1.0},  {{0, 2}, 1.0}, {{1, 0}, 1.0},
                     {{1, 1}, 1.0}, {{1, 2}, -1.0}, {{2, 0}, 1.0}, {{2, 1}, -1.0}};
    g.marginals = {{{0, 0}, -1.0}, {{1, 0}, -2.0}, {{1, 1}, -1.0}};
  } else if (name == "yao") {
    g.form = GameForm::correlator;
    g.operators = OperatorKind::observable;
    g.settings = {3, 3, 3};
    g.outcomes = {{2, 2, 2}, {2, 2, 2}, {2, 2, 2}};
    g.correlators = {{{0, 1, 2}, 1.0},  {{1, 2, 0}, 1.0},  {{2, 0, 1}, 1.0},
                     {{0, 2, 1}, -1.0}, {{1, 0, 2}, -1.0}, {{2, 1, 0}, -1.0}};
  } else {
    throw Error("unknown builtin game '" + std::string(name) + "'");
  }
  g.validate();
  return g;
}

// ---------------------------------------------------------------------------
// Game files

namespace {

struct LineReader {
  std::size_t line = 0;

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(line, what); }

  int to_int(const std::string& token) const {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(token, &used);
    } catch (const std::exception&) {
      fail("expected an integer, got '" + token + "'");
    }
    if (used != token.size()) fail("expected an integer, got '" + token + "'");
    return v;
  }

  double to_double(const std::string& token) const {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      fail("expected a number, got '" + token + "'");
    }
    if (used != token.size()) fail("expected a number, got '" + token + "'");
    return v;
  }
};

}  // namespace

ParsedGame parse_game(std::string_view text) {
  ParsedGame out;
  Game& g = out.game;
  LineReader r;
  int parties = -1;
  bool have_form = false, have_operators = false, have_settings = false;
  int uniform_outcomes = -1;
  std::map<std::pair<int, int>, int> outcome_lines;
  std::size_t first_pi_line = 0;

  auto require_header = [&](const char* what) {
    if (parties < 0 || !have_settings)
      r.fail(std::string(what) + " line before 'parties' and 'settings'");
  };

  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++r.line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream fields(raw);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    const std::string& key = tok[0];
    const std::size_t nargs = tok.size() - 1;

    if (key == "game") {
      if (nargs != 1) r.fail("'game' takes one name");
      g.name = tok[1];
    } else if (key == "form") {
      if (nargs != 1 || (tok[1] != "probability" && tok[1] != "correlator"))
        r.fail("'form' must be probability or correlator");
      g.form = tok[1] == "probability" ? GameForm::probability : GameForm::correlator;
      have_form = true;
    } else if (key == "operators") {
      if (nargs != 1 || (tok[1] != "projector" && tok[1] != "observable"))
        r.fail("'operators' must be projector or observable");
      g.operators = operator_kind_from_string(tok[1]);
      have_operators = true;
    } else if (key == "parties") {
      if (nargs != 1) r.fail("'parties' takes one count");
      parties = r.to_int(tok[1]);
      if (parties < 1 || parties > 26) r.fail("party count must be in 1..26");
    } else if (key == "settings") {
      if (parties < 0) r.fail("'settings' before 'parties'");
      if (static_cast<int>(nargs) != parties) r.fail("'settings' needs one count per party");
      g.settings.clear();
      for (std::size_t i = 1; i < tok.size(); ++i) {
        const int k = r.to_int(tok[i]);
        if (k < 1) r.fail("setting counts must be positive");
        g.settings.push_back(k);
      }
      have_settings = true;
    } else if (key == "outcomes") {
      if (nargs == 1) {
        uniform_outcomes = r.to_int(tok[1]);
        if (uniform_outcomes < 1) r.fail("outcome counts must be positive");
      } else if (nargs == 3) {
        require_header("outcomes");
        const int p = r.to_int(tok[1]), s = r.to_int(tok[2]), m = r.to_int(tok[3]);
        if (p < 0 || p >= parties || s < 0 || s >= g.settings[p]) r.fail("outcomes: index out of range");
        if (m < 1) r.fail("outcome counts must be positive");
        if (!outcome_lines.emplace(std::pair{p, s}, m).second) r.fail("duplicate outcomes line");
      } else {
        r.fail("'outcomes' takes <m> or <party> <setting> <m>");
      }
    } else if (key == "pi") {
      require_header("pi");
      if (static_cast<int>(nargs) != parties + 1) r.fail("'pi' needs one setting per party and a value");
      std::vector<int> s;
      for (int p = 0; p < parties; ++p) s.push_back(r.to_int(tok[1 + p]));
      for (int p = 0; p < parties; ++p)
        if (s[p] < 0 || s[p] >= g.settings[p]) r.fail("pi: setting index out of range");
      const double w = r.to_double(tok.back());
      if (w < 0) r.fail("pi: probabilities must be nonnegative");
      if (!g.pi.emplace(s, w).second) r.fail("duplicate pi line");
      if (first_pi_line == 0) first_pi_line = r.line;
    } else if (key == "v") {
      require_header("v");
      if (static_cast<int>(nargs) != 2 * parties + 1)
        r.fail("'v' needs settings, outcomes and a value");
      std::vector<int> k;
      for (int i = 0; i < 2 * parties; ++i) k.push_back(r.to_int(tok[1 + i]));
      for (int p = 0; p < parties; ++p)
        if (k[p] < 0 || k[p] >= g.settings[p]) r.fail("v: setting index out of range");
      const double v = r.to_double(tok.back());
      if (v < 0 || v > 1) r.fail("v: payoffs must lie in [0, 1]");
      if (!g.payoff.emplace(k, v).second) r.fail("duplicate v line");
    } else if (key == "c") {
      require_header("c");
      if (static_cast<int>(nargs) != parties + 1) r.fail("'c' needs one setting per party and a value");
      std::vector<int> s;
      for (int p = 0; p < parties; ++p) s.push_back(r.to_int(tok[1 + p]));
      for (int p = 0; p < parties; ++p)
        if (s[p] < 0 || s[p] >= g.settings[p]) r.fail("c: setting index out of range");
      if (!g.correlators.emplace(s, r.to_double(tok.back())).second) r.fail("duplicate c line");
    } else if (key == "m") {
      require_header("m");
      if (nargs != 3) r.fail("'m' takes <party> <setting> <value>");
      const int p = r.to_int(tok[1]), s = r.to_int(tok[2]);
      if (p < 0 || p >= parties || s < 0 || s >= g.settings[p]) r.fail("m: index out of range");
      if (!g.marginals.emplace(std::pair{p, s}, r.to_double(tok[3])).second) r.fail("duplicate m line");
    } else if (key == "const") {
      if (nargs != 1) r.fail("'const' takes one value");
      g.constant = r.to_double(tok[1]);
    } else {
      r.fail("unknown keyword '" + key + "'");
    }
  }

  r.line = 0;
  if (!have_form) r.fail("missing 'form' line");
  if (parties < 0) r.fail("missing 'parties' line");
  if (!have_settings) r.fail("missing 'settings' line");
  if (g.name.empty()) g.name = "unnamed";

  if (g.form == GameForm::probability) {
    if (have_operators && g.operators != OperatorKind::projector)
      r.fail("probability-form games use projector operators");
    g.operators = OperatorKind::projector;
  } else if (!have_operators) {
    g.operators = OperatorKind::observable;
  }

  g.outcomes.assign(parties, {});
  for (int p = 0; p < parties; ++p) {
    for (int s = 0; s < g.settings[p]; ++s) {
      int m = uniform_outcomes;
      if (const auto it = outcome_lines.find({p, s}); it != outcome_lines.end()) m = it->second;
      if (m < 0) {
        if (g.form == GameForm::correlator) {
          m = 2;
        } else {
          r.fail("missing outcome count for party " + std::to_string(p) + " setting " + std::to_string(s));
        }
      }
      g.outcomes[p].push_back(m);
    }
  }

  if (g.form == GameForm::probability) {
    for (const auto& [k, v] : g.payoff)
      for (int p = 0; p < parties; ++p)
        if (k[parties + p] < 0 || k[parties + p] >= g.outcomes[p][k[p]])
          r.fail("v: outcome index out of range");
    if (g.pi.empty()) {
      std::size_t total = 1;
      for (int k : g.settings) total *= static_cast<std::size_t>(k);
      std::vector<int> s(parties, 0);
      for (std::size_t i = 0; i < total; ++i) {
        g.pi[s] = 1.0 / static_cast<double>(total);
        for (int p = parties - 1; p >= 0; --p) {
          if (++s[p] < g.settings[p]) break;
          s[p] = 0;
        }
      }
      out.notes.push_back("pi: no lines given, using the uniform distribution");
    } else {
      double total = 0;
      for (const auto& [s, w] : g.pi) total += w;
      if (std::abs(total - 1.0) > 1e-12) {
        r.line = first_pi_line;
        r.fail("pi: probabilities sum to " + format_double(total) + ", expected 1");
      }
    }
  }

  try {
    g.validate();
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(0, e.what());
  }
  return out;
}

std::string serialize(const Game& g) {
  g.validate();
  std::ostringstream out;
  out << "game " << g.name << "\n";
  out << "form " << to_string(g.form) << "\n";
  if (g.form == GameForm::correlator) out << "operators " << to_string(g.operators) << "\n";
  out << "parties " << g.num_parties() << "\n";
  out << "settings " << join(g.settings) << "\n";

  bool uniform = true;
  const int m0 = g.outcomes[0][0];
  for (const auto& row : g.outcomes)
    for (int m : row) uniform = uniform && m == m0;
  if (uniform) {
    out << "outcomes " << m0 << "\n";
  } else {
    for (int p = 0; p < g.num_parties(); ++p)
      for (int s = 0; s < g.settings[p]; ++s) out << "outcomes " << p << " " << s << " " << g.outcomes[p][s] << "\n";
  }

  for (const auto& [s, w] : g.pi) out << "pi " << join(s) << " " << format_double(w) << "\n";
  for (const auto& [k, v] : g.payoff) out << "v " << join(k) << " " << format_double(v) << "\n";
  for (const auto& [s, c] : g.correlators) out << "c " << join(s) << " " << format_double(c) << "\n";
  for (const auto& [ps, c] : g.marginals)
    out << "m " << ps.first << " " << ps.second << " " << format_double(c) << "\n";
  if (g.constant != 0.0) out << "const " << format_double(g.constant) << "\n";
  return out.str();
}

Game random_probability_game(std::vector<int> settings, int outcomes, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Game g;
  g.name = "random-" + std::to_string(seed);
  g.form = GameForm::probability;
  g.operators = OperatorKind::projector;
  g.settings = std::move(settings);
  const int n = g.num_parties();
  for (int p = 0; p < n; ++p) g.outcomes.emplace_back(g.settings[p], outcomes);

  std::vector<std::vector<int>> tuples{{}};
  for (int p = 0; p < n; ++p) {
    std::vector<std::vector<int>> next;
    for (const auto& t : tuples)
      for (int s = 0; s < g.settings[p]; ++s) {
        auto u = t;
        u.push_back(s);
        next.push_back(std::move(u));
      }
    tuples = std::move(next);
  }
  double total = 0;
  for (const auto& s : tuples) total += (g.pi[s] = 0.05 + unit(rng));
  for (auto& [s, w] : g.pi) w /= total;
  // Renormalising can leave a rounding error of a few ulps; push it onto one entry.
  double sum = 0;
  for (const auto& [s, w] : g.pi) sum += w;
  g.pi.begin()->second += 1.0 - sum;

  for (const auto& s : tuples) {
    std::vector<int> a(n, 0);
    while (true) {
      auto key = s;
      key.insert(key.end(), a.begin(), a.end());
      g.payoff[key] = unit(rng);
      int p = n - 1;
      for (; p >= 0; --p) {
        if (++a[p] < outcomes) break;
        a[p] = 0;
      }
      if (p < 0) break;
    }
  }
  g.validate();
  return g;
}

}  // namespace ncsos
