#include "ncsos/hierarchy.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <tuple>

namespace ncsos {

// ---------------------------------------------------------------------------
// LevelSpec

LevelSpec LevelSpec::full(int n) {
  if (n < 1) throw Error("level must be at least 1");
  LevelSpec s;
  s.kind = Kind::full;
  s.level = n;
  return s;
}

LevelSpec LevelSpec::custom(std::vector<std::string> monomials, std::string source) {
  LevelSpec s;
  s.kind = Kind::custom;
  s.monomials = std::move(monomials);
  s.source = std::move(source);
  return s;
}

namespace {

int parse_positive(std::string_view digits, std::string_view context) {
  if (digits.empty() || digits.size() > 3 ||
      !std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    throw Error("bad level '" + std::string(context) + "'");
  const int n = std::stoi(std::string(digits));
  if (n < 1) throw Error("level must be at least 1");
  return n;
}

}  // namespace

LevelSpec LevelSpec::parse(std::string_view text) {
  if (text.starts_with("full:")) return full(parse_positive(text.substr(5), text));
  if (text.starts_with("custom:")) {
    const std::string path(text.substr(7));
    std::ifstream f(path);
    if (!f) throw Error("cannot read basis file " + path);
    std::vector<std::string> monomials;
    std::string line;
    while (std::getline(f, line)) {
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      const auto last = line.find_last_not_of(" \t\r");
      monomials.push_back(line.substr(first, last - first + 1));
    }
    return custom(std::move(monomials), path);
  }

  LevelSpec s;
  s.kind = Kind::shaped;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto plus = std::min(text.find('+', pos), text.size());
    const std::string_view tok = text.substr(pos, plus - pos);
    if (tok.empty()) throw Error("bad level '" + std::string(text) + "'");
    if (std::isdigit(static_cast<unsigned char>(tok[0]))) {
      s.degree_bounds.push_back(parse_positive(tok, text));
    } else {
      std::vector<int> shape;
      for (char c : tok) {
        if (c < 'A' || c > 'Z') throw Error("bad level '" + std::string(text) + "'");
        const int p = c - 'A';
        if (static_cast<int>(shape.size()) <= p) shape.resize(p + 1, 0);
        ++shape[p];
      }
      // Letters are one degree unit each; "BA" and "AB" are the same shape.
      s.shapes.push_back(std::move(shape));
    }
    s.tokens.emplace_back(tok);
    pos = plus + 1;
  }
  return s;
}

std::string LevelSpec::to_string() const {
  switch (kind) {
    case Kind::full:
      return "full:" + std::to_string(level);
    case Kind::custom:
      return "custom:" + source;
    case Kind::shaped: {
      std::string out;
      for (const auto& t : tokens) out += (out.empty() ? "" : "+") + t;
      return out;
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// MonomialBasis

MonomialBasis::MonomialBasis(std::shared_ptr<const Schema> schema, std::vector<Monomial> entries)
    : schema_(std::move(schema)), entries_(std::move(entries)) {
  if (entries_.empty()) throw Error("empty basis");
  if (!entries_.front().is_identity()) throw Error("basis must start with the identity");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].is_zero()) throw Error("basis contains the zero monomial");
    if (!index_.emplace(entries_[i], i).second)
      throw Error("duplicate basis monomial " + ncsos::to_string(entries_[i], schema_->kind()));
  }
}

std::optional<std::size_t> MonomialBasis::find(const Monomial& m) const {
  const auto it = index_.find(m);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

namespace {

std::vector<int> shape_of(const Monomial& m, int parties) {
  std::vector<int> shape(parties, 0);
  for (const auto& g : m.word()) ++shape[g.party];
  return shape;
}

/// Every shape (per-party degree vector) with total degree <= n.
void shapes_up_to(int parties, int n, std::set<std::vector<int>>& out) {
  std::vector<int> cur(parties, 0);
  std::function<void(int, int)> rec = [&](int p, int left) {
    if (p == parties) {
      out.insert(cur);
      return;
    }
    for (int d = 0; d <= left; ++d) {
      cur[p] = d;
      rec(p + 1, left - d);
    }
    cur[p] = 0;
  };
  rec(0, n);
}

/// Canonical single-party words of exact length d over `letters`.
std::vector<std::vector<Generator>> party_words(const std::vector<Generator>& letters, int d, const Schema& schema) {
  std::vector<std::vector<Generator>> out{{}};
  for (int step = 0; step < d; ++step) {
    std::vector<std::vector<Generator>> next;
    for (const auto& w : out) {
      for (const auto& g : letters) {
        auto ext = w;
        ext.push_back(g);
        const Monomial r = reduce(ext, schema);
        if (!r.is_zero() && r.degree() == ext.size()) next.push_back(std::move(ext));
      }
    }
    out = std::move(next);
  }
  return out;
}

MonomialBasis custom_basis(const std::shared_ptr<const Schema>& schema, const LevelSpec& spec) {
  std::vector<Monomial> entries;
  bool have_identity = false;
  for (const auto& text : spec.monomials) {
    const Monomial m = parse_monomial(text, *schema);
    if (m.is_zero()) throw Error("custom basis contains the zero monomial");
    std::string norm;
    {
      std::istringstream in(text);
      std::string tok;
      while (in >> tok) norm += (norm.empty() ? "" : " ") + (tok == "1" ? std::string("I") : tok);
    }
    if (norm != to_string(m, schema->kind()))
      throw Error("custom basis monomial '" + text + "' is not canonical (expected '" +
                  to_string(m, schema->kind()) + "')");
    if (m.is_identity()) {
      if (have_identity) throw Error("duplicate basis monomial I");
      have_identity = true;
      entries.insert(entries.begin(), m);
    } else {
      entries.push_back(m);
    }
  }
  if (!have_identity) throw Error("custom basis must include the identity");
  return MonomialBasis(schema, std::move(entries));
}

}  // namespace

MonomialBasis generate_basis(const Game& g, const LevelSpec& spec) {
  g.validate();
  auto schema = g.schema();
  if (spec.kind == LevelSpec::Kind::custom) return custom_basis(schema, spec);

  const int parties = g.num_parties();
  std::set<std::vector<int>> shapes;
  if (spec.kind == LevelSpec::Kind::full) {
    shapes_up_to(parties, spec.level, shapes);
  } else {
    for (int d : spec.degree_bounds) shapes_up_to(parties, d, shapes);
    for (std::vector<int> shape : spec.shapes) {
      if (static_cast<int>(shape.size()) > parties)
        throw Error("level shape names party " + std::string(1, static_cast<char>('A' + shape.size() - 1)) +
                    " but the game has " + std::to_string(parties) + " parties");
      shape.resize(parties, 0);
      int total = 0;
      for (int d : shape) total += d;
      shapes.insert(shape);
      shapes_up_to(parties, total - 1, shapes);
    }
  }

  const auto letters_all = schema->generators(schema->kind() == OperatorKind::projector);
  std::vector<std::vector<Generator>> letters(parties);
  for (const auto& l : letters_all) letters[l.party].push_back(l);

  std::set<Monomial> found;
  for (const auto& shape : shapes) {
    std::vector<std::vector<Generator>> words{{}};
    for (int p = 0; p < parties; ++p) {
      if (shape[p] == 0) continue;
      const auto pw = party_words(letters[p], shape[p], *schema);
      std::vector<std::vector<Generator>> next;
      for (const auto& w : words)
        for (const auto& x : pw) {
          auto cat = w;
          cat.insert(cat.end(), x.begin(), x.end());
          next.push_back(std::move(cat));
        }
      words = std::move(next);
    }
    for (const auto& w : words) found.insert(reduce(w, *schema));
  }

  std::vector<Monomial> entries(found.begin(), found.end());
  auto key = [parties](const Monomial& m) {
    const auto shape = shape_of(m, parties);
    const int involved = static_cast<int>(std::count_if(shape.begin(), shape.end(), [](int d) { return d > 0; }));
    return std::tuple(m.degree(), involved, shape);
  };
  std::stable_sort(entries.begin(), entries.end(), [&](const Monomial& a, const Monomial& b) {
    const auto [da, ia, sa] = key(a);
    const auto [db, ib, sb] = key(b);
    if (da != db) return da < db;
    if (ia != ib) return ia < ib;
    if (sa != sb) return sa > sb;
    return a < b;
  });
  return MonomialBasis(schema, std::move(entries));
}

// ---------------------------------------------------------------------------
// Relaxations

std::string_view to_string(Formulation f) { return f == Formulation::moment ? "moment" : "sos"; }

Monomial moment_class(const Monomial& m, const Schema& schema) {
  const Monomial a = adjoint(m, schema);
  return std::min(m, a);
}

namespace {

using Pair = std::pair<int, int>;

void add_esym(SparseSymMatrix<double>& f, Pair p, double scale) {
  if (p.first == p.second)
    f.add(0, p.first, p.first, scale);
  else
    f.add(0, p.first, p.second, 0.5 * scale);
}

Monomial word_product(const Schema& schema, std::initializer_list<const std::vector<Generator>*> parts) {
  std::vector<Generator> w;
  for (const auto* part : parts) w.insert(w.end(), part->begin(), part->end());
  return reduce(w, schema);
}

RelaxationProblem build(const Game& g, const MonomialBasis& basis, Formulation formulation) {
  const Schema& schema = basis.schema();
  if (!(schema == *g.schema())) throw SchemaError("basis was built for a different operator schema");

  RelaxationProblem out{formulation, basis, {}, {}, {}, {}, bell_operator(g), NCPolynomial(basis.schema_ptr()), {}, 0};
  const int n = static_cast<int>(basis.size());

  // Moment index, classes (m ~ m^dag), and the representative entry of each class.
  std::map<Monomial, std::vector<Pair>> classes;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Monomial w = inner(basis[i], basis[j], schema);
      if (w.is_zero()) {
        out.annihilated.emplace_back(i, j);
        continue;
      }
      out.moment_index[w].emplace_back(i, j);
      if (i <= j) classes[moment_class(w, schema)].emplace_back(i, j);
    }
  }
  auto rep = [&](const Monomial& m) -> std::optional<Pair> {
    const auto it = classes.find(moment_class(m, schema));
    if (it == classes.end()) return std::nullopt;
    return it->second.front();
  };

  // Bell operator restricted to the moment domain. Terms outside it have
  // their last-outcome projectors traded for I - sum of the other outcomes.
  std::function<void(const Monomial&, double)> place = [&](const Monomial& m, double c) {
    if (m.is_zero() || c == 0.0) return;
    if (rep(m)) {
      out.objective.add_term(m, c);
      return;
    }
    const auto& w = m.word();
    std::size_t at = w.size();
    if (schema.kind() == OperatorKind::projector)
      for (std::size_t k = 0; k < w.size(); ++k)
        if (schema.num_outcomes(w[k].party, w[k].setting) > 1 &&
            w[k].outcome == schema.num_outcomes(w[k].party, w[k].setting) - 1) {
          at = k;
          break;
        }
    if (at == w.size())
      throw BasisTooSmall("basis too small: Bell term " + to_string(m, schema.kind()) +
                          " is not a product of two basis monomials");
    const std::vector<Generator> left(w.begin(), w.begin() + at), right(w.begin() + at + 1, w.end());
    const Generator x = w[at];
    out.substitutions.push_back({reduce(left, schema), reduce(right, schema), x.party, x.setting, c});
    place(word_product(schema, {&left, &right}), c);
    for (int a = 0; a + 1 < schema.num_outcomes(x.party, x.setting); ++a) {
      const std::vector<Generator> mid{{x.party, x.setting, static_cast<std::uint16_t>(a)}};
      place(word_product(schema, {&left, &mid, &right}), -c);
    }
  };
  for (const auto& [m, c] : out.bell.polynomial.terms()) place(m, c);

  SDPProblem<double>& sdp = out.sdp;
  sdp.form = formulation == Formulation::moment ? SdpForm::standard : SdpForm::inequality;
  sdp.block_sizes = {n};
  for (const auto& [m, c] : out.objective.terms()) add_esym(sdp.c, *rep(m), -c);
  sdp.c.compress();

  std::vector<double> b;
  auto push = [&](SparseSymMatrix<double> f, double rhs, ConstraintInfo info) {
    f.compress();
    if (f.empty()) return;
    sdp.a.push_back(std::move(f));
    b.push_back(rhs);
    out.constraints.push_back(info);
  };

  {
    SparseSymMatrix<double> f;
    f.add(0, 0, 0, 1.0);
    push(std::move(f), 1.0, {ConstraintInfo::Kind::normalization, {0, 0}, {0, 0}, 0, 0});
  }
  for (const auto& [key, pairs] : classes) {
    (void)key;
    for (std::size_t k = 1; k < pairs.size(); ++k) {
      SparseSymMatrix<double> f;
      add_esym(f, pairs.front(), 1.0);
      add_esym(f, pairs[k], -1.0);
      push(std::move(f), 0.0, {ConstraintInfo::Kind::equal_moment, pairs.front(), pairs[k], 0, 0});
    }
  }
  for (const auto& [i, j] : out.annihilated) {
    if (i > j) continue;
    SparseSymMatrix<double> f;
    add_esym(f, {i, j}, 1.0);
    push(std::move(f), 0.0, {ConstraintInfo::Kind::annihilated, {i, j}, {i, j}, 0, 0});
  }

  bool any_completeness = false;
  if (schema.kind() == OperatorKind::projector) {
    std::set<std::vector<SymEntry<double>>> seen;
    for (int i = 0; i < n; ++i) {
      const Monomial u_dag = adjoint(basis[i], schema);
      for (int j = i; j < n; ++j) {
        const auto& v = basis[j].word();
        for (int p = 0; p < schema.num_parties(); ++p) {
          for (int s = 0; s < schema.num_settings(p); ++s) {
            SparseSymMatrix<double> f;
            bool inside = true;
            for (int a = 0; a < schema.num_outcomes(p, s) && inside; ++a) {
              const std::vector<Generator> mid{{static_cast<std::uint16_t>(p), static_cast<std::uint16_t>(s),
                                                static_cast<std::uint16_t>(a)}};
              const Monomial w = word_product(schema, {&u_dag.word(), &mid, &v});
              if (w.is_zero()) continue;
              const auto r = rep(w);
              if (!r) inside = false;
              else add_esym(f, *r, 1.0);
            }
            if (!inside) continue;
            const Monomial uv = inner(basis[i], basis[j], schema);
            if (!uv.is_zero()) add_esym(f, *rep(uv), -1.0);
            f.compress();
            if (f.empty() || !seen.insert(f.entries()).second) continue;
            any_completeness = true;
            push(std::move(f), 0.0, {ConstraintInfo::Kind::completeness, {i, j}, {i, j}, p, s});
          }
        }
      }
    }
  }
  sdp.b = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));

  if (any_completeness) {
    std::vector<int> kept;
    out.dropped_constraints = drop_dependent_constraints(sdp, 1e-10, &kept);
    std::vector<ConstraintInfo> info;
    for (int k : kept) info.push_back(out.constraints[k]);
    out.constraints = std::move(info);
  }
  return out;
}

}  // namespace

RelaxationProblem build_moment_sdp(const Game& g, const MonomialBasis& basis) {
  return build(g, basis, Formulation::moment);
}

RelaxationProblem build_sos_sdp(const Game& g, const MonomialBasis& basis) {
  return build(g, basis, Formulation::sos);
}

std::vector<LevelResult> level_sequence(const Game& g, int max_level, const SolverOptions& opts) {
  if (max_level < 1) throw Error("max level must be at least 1");
  std::vector<LevelResult> out;
  for (int n = 1; n <= max_level; ++n) {
    const auto start = std::chrono::steady_clock::now();
    const auto prob = build_moment_sdp(g, generate_basis(g, LevelSpec::full(n)));
    const auto sol = solve(prob.sdp, opts);
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    out.push_back({n, prob.bound(sol.primal_value), sol.status, sol.iterations, dt.count()});
  }
  return out;
}

}  // namespace ncsos
