#include "ncsos/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace ncsos {

namespace {

struct Term {
  double coef;
  std::vector<Generator> letters;
};

std::vector<Term> terms_of(const BellOperator& b) {
  std::vector<Term> out;
  for (const auto& [m, c] : b.polynomial.terms()) out.push_back({c, m.word()});
  return out;
}

/// Scalar value of one letter under a deterministic strategy.
double letter_value(const Generator& x, const DeterministicStrategy& s, OperatorKind kind) {
  const int choice = s[x.party][x.setting];
  if (kind == OperatorKind::observable) return choice == 0 ? 1.0 : -1.0;
  return choice == x.outcome ? 1.0 : 0.0;
}

int choices(const Schema& schema, int party, int setting) {
  return schema.kind() == OperatorKind::observable ? 2 : schema.num_outcomes(party, setting);
}

}  // namespace

double strategy_value(const Game& g, const DeterministicStrategy& s) {
  const BellOperator b = bell_operator(g);
  double v = b.offset;
  for (const auto& t : terms_of(b)) {
    double prod = t.coef;
    for (const auto& x : t.letters) prod *= letter_value(x, s, b.mode);
    v += prod;
  }
  return v;
}

double classical_value(const Game& g) {
  const BellOperator b = bell_operator(g);
  const auto schema = g.schema();
  const int n = g.num_parties();

  double total = 1.0;
  for (int p = 0; p < n; ++p)
    for (int s = 0; s < schema->num_settings(p); ++s) total *= choices(*schema, p, s);
  if (total > 1e7) throw Error("classical strategy space has more than 1e7 elements");

  // Every term has at most one letter of the last party, so that party's best
  // response decouples setting by setting.
  const int last = n - 1;
  const auto terms = terms_of(b);
  for (const auto& t : terms)
    if (std::count_if(t.letters.begin(), t.letters.end(), [&](const Generator& x) { return x.party == last; }) > 1)
      throw Error("classical value needs at most one letter per party in every term");

  // Mixed-radix counter over the settings of parties 0..n-2.
  std::vector<std::pair<int, int>> slots;
  for (int p = 0; p < last; ++p)
    for (int s = 0; s < schema->num_settings(p); ++s) slots.emplace_back(p, s);
  DeterministicStrategy strat(n);
  for (int p = 0; p < n; ++p) strat[p].assign(schema->num_settings(p), 0);

  const int last_settings = schema->num_settings(last);
  std::vector<std::vector<double>> table(last_settings);
  double best = -std::numeric_limits<double>::infinity();
  while (true) {
    double base = b.offset;
    for (int s = 0; s < last_settings; ++s) table[s].assign(choices(*schema, last, s), 0.0);
    for (const auto& t : terms) {
      double prod = t.coef;
      const Generator* mine = nullptr;
      for (const auto& x : t.letters) {
        if (x.party == last)
          mine = &x;
        else
          prod *= letter_value(x, strat, b.mode);
      }
      if (prod == 0.0) continue;
      if (!mine) {
        base += prod;
        continue;
      }
      auto& row = table[mine->setting];
      for (int c = 0; c < static_cast<int>(row.size()); ++c) {
        strat[last][mine->setting] = c;
        row[c] += prod * letter_value(*mine, strat, b.mode);
      }
    }
    for (const auto& row : table) base += *std::max_element(row.begin(), row.end());
    best = std::max(best, base);

    std::size_t k = 0;
    for (; k < slots.size(); ++k) {
      auto& c = strat[slots[k].first][slots[k].second];
      if (++c < choices(*schema, slots[k].first, slots[k].second)) break;
      c = 0;
    }
    if (k == slots.size()) break;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Random measurements

template <typename Rng>
ComplexMatrix haar_unitary(int d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix z(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) z(i, j) = Complex(normal(rng), normal(rng));
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR();
  for (int j = 0; j < d; ++j) {
    const double mag = std::abs(r(j, j));
    if (mag > 0) q.col(j) *= r(j, j) / mag;
  }
  return q;
}

template ComplexMatrix haar_unitary(int, std::mt19937_64&);

namespace {

SeeSawState random_local(const Game& g, int dim, std::mt19937_64& rng) {
  const auto schema = g.schema();
  SeeSawState st;
  st.dim = dim;
  for (int p = 0; p < schema->num_parties(); ++p) {
    for (int s = 0; s < schema->num_settings(p); ++s) {
      const ComplexMatrix u = haar_unitary(dim, rng);
      const int m = schema->num_outcomes(p, s);
      const int offset = std::uniform_int_distribution<int>(0, m - 1)(rng);
      const auto gp = static_cast<std::uint16_t>(p), gs = static_cast<std::uint16_t>(s);
      if (schema->kind() == OperatorKind::observable) {
        Eigen::VectorXcd diag(dim);
        for (int i = 0; i < dim; ++i) diag[i] = ((i + offset) % 2 == 0) ? 1.0 : -1.0;
        st.local[{gp, gs, 0}] = u * diag.asDiagonal() * u.adjoint();
      } else {
        for (int a = 0; a < m; ++a) {
          Eigen::VectorXcd diag = Eigen::VectorXcd::Zero(dim);
          for (int i = 0; i < dim; ++i)
            if ((i + offset) % m == a) diag[i] = 1.0;
          st.local[{gp, gs, static_cast<std::uint16_t>(a)}] = u * diag.asDiagonal() * u.adjoint();
        }
      }
    }
  }
  return st;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

ComplexMatrix embed_one(const ComplexMatrix& local, int party, int parties, int dim) {
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (int p = 0; p < parties; ++p) out = kron(out, p == party ? local : ComplexMatrix::Identity(dim, dim));
  return out;
}

ComplexMatrix bell_matrix(const std::vector<Term>& terms, const Assignment<Complex>& a) {
  const Eigen::Index d = a.dimension();
  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  for (const auto& t : terms) out += t.coef * instantiate<Complex>(t.letters, a);
  return (out + out.adjoint()) / 2.0;
}

ComplexMatrix hermitian_part(const ComplexMatrix& m) { return (m + m.adjoint()) / 2.0; }

/// Projector onto the span of eigenvectors of h with eigenvalue > 0,
/// restricted to the range of `within`.
ComplexMatrix positive_part_projector(const ComplexMatrix& h, const ComplexMatrix& within) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(hermitian_part(within * h * within));
  const Eigen::Index d = h.rows();
  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  for (Eigen::Index k = 0; k < d; ++k)
    if (eig.eigenvalues()[k] > 1e-14) out += eig.eigenvectors().col(k) * eig.eigenvectors().col(k).adjoint();
  return out;
}

/// K(s, a) such that <psi|B|psi> = sum Tr(X_s^a K(s, a)) + const over the
/// free party's operators.
std::map<Generator, ComplexMatrix> conditional_operators(const std::vector<Term>& terms, const Game& g,
                                                         const SeeSawState& st, int party) {
  const int n = g.num_parties();
  const int d = st.dim;
  const Eigen::Index rest = static_cast<Eigen::Index>(std::pow(d, n)) / d;
  std::map<Generator, ComplexMatrix> k;
  for (const auto& t : terms) {
    const Generator* mine = nullptr;
    for (const auto& x : t.letters) {
      if (x.party != party) continue;
      if (mine) throw Error("see-saw needs at most one letter per party in every term");
      mine = &x;
    }
    if (!mine) continue;
    Eigen::VectorXcd phi = st.state;
    for (auto x = t.letters.rbegin(); x != t.letters.rend(); ++x)
      if (x->party != party) phi = embed_one(st.local.at(*x), x->party, n, d) * phi;
    // Tr over the other parties of |phi><psi|.
    ComplexMatrix partial = ComplexMatrix::Zero(d, d);
    const Eigen::Index inner_dim = static_cast<Eigen::Index>(std::pow(d, n - 1 - party));
    for (Eigen::Index idx = 0; idx < rest * d; ++idx) {
      const Eigen::Index a = (idx / inner_dim) % d;
      const Eigen::Index outer = idx / (inner_dim * d);
      const Eigen::Index inner = idx % inner_dim;
      for (Eigen::Index b = 0; b < d; ++b) {
        const Eigen::Index jdx = (outer * d + b) * inner_dim + inner;
        partial(a, b) += phi[idx] * std::conj(st.state[jdx]);
      }
    }
    auto [it, fresh] = k.try_emplace(*mine, ComplexMatrix::Zero(d, d));
    it->second += t.coef * partial;
  }
  for (auto& [gen, m] : k) m = hermitian_part(m);
  return k;
}

void best_response(const std::vector<Term>& terms, const Game& g, SeeSawState& st, int party) {
  const auto schema = g.schema();
  const int d = st.dim;
  const auto k = conditional_operators(terms, g, st, party);
  const ComplexMatrix zero = ComplexMatrix::Zero(d, d);
  auto cond = [&](int s, int a) -> const ComplexMatrix& {
    const auto it = k.find({static_cast<std::uint16_t>(party), static_cast<std::uint16_t>(s), static_cast<std::uint16_t>(a)});
    return it == k.end() ? zero : it->second;
  };
  const ComplexMatrix eye = ComplexMatrix::Identity(d, d);
  for (int s = 0; s < schema->num_settings(party); ++s) {
    const auto gp = static_cast<std::uint16_t>(party), gs = static_cast<std::uint16_t>(s);
    if (schema->kind() == OperatorKind::observable) {
      const ComplexMatrix pos = positive_part_projector(cond(s, 0), eye);
      st.local[{gp, gs, 0}] = 2.0 * pos - eye;
      continue;
    }
    const int m = schema->num_outcomes(party, s);
    // Pairwise refinement: within the joint range of outcomes a and b the best
    // split is the positive part of K_a - K_b. Each swap cannot lower the value.
    for (int pass = 0; pass < (m > 2 ? 4 : 1); ++pass) {
      for (int a = 0; a < m; ++a) {
        for (int b = a + 1; b < m; ++b) {
          const Generator ga{gp, gs, static_cast<std::uint16_t>(a)}, gb{gp, gs, static_cast<std::uint16_t>(b)};
          const ComplexMatrix within = st.local[ga] + st.local[gb];
          const ComplexMatrix pa = positive_part_projector(cond(s, a) - cond(s, b), within);
          st.local[ga] = pa;
          st.local[gb] = within - pa;
        }
      }
    }
  }
}

double top_eigen(const ComplexMatrix& b, Eigen::VectorXcd* vec) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(b);
  const Eigen::Index top = b.rows() - 1;
  if (vec) *vec = eig.eigenvectors().col(top);
  return eig.eigenvalues()[top];
}

}  // namespace

Assignment<Complex> embed(const Game& g, const SeeSawState& s) {
  std::map<Generator, ComplexMatrix> out;
  for (const auto& [gen, m] : s.local) out[gen] = embed_one(m, gen.party, g.num_parties(), s.dim);
  return Assignment<Complex>(g.schema(), std::move(out));
}

Assignment<Complex> random_valid_assignment(const Game& g, int dim, std::uint64_t seed) {
  if (dim < 1) throw Error("dimension must be at least 1");
  std::mt19937_64 rng(seed);
  return embed(g, random_local(g, dim, rng));
}

double evaluate(const Game& g, const SeeSawState& s) {
  const BellOperator b = bell_operator(g);
  const ComplexMatrix m = bell_matrix(terms_of(b), embed(g, s));
  return (s.state.adjoint() * m * s.state)(0, 0).real() + b.offset;
}

SeeSawResult seesaw(const Game& g, int dim, int restarts, std::uint64_t seed) {
  if (dim < 1) throw Error("see-saw dimension must be at least 1");
  if (restarts < 1) throw Error("see-saw needs at least one restart");
  const double states = std::pow(static_cast<double>(dim), g.num_parties());
  if (states > 4096) throw Error("see-saw product space is too large");

  const BellOperator b = bell_operator(g);
  const auto terms = terms_of(b);
  std::mt19937_64 rng(seed);
  SeeSawResult out;
  out.value = -std::numeric_limits<double>::infinity();
  out.restarts = restarts;

  for (int r = 0; r < restarts; ++r) {
    SeeSawState st = random_local(g, dim, rng);
    std::vector<double> trace;
    double prev = -std::numeric_limits<double>::infinity();
    for (int sweep = 0; sweep < 500; ++sweep) {
      top_eigen(bell_matrix(terms, embed(g, st)), &st.state);
      for (int p = 0; p < g.num_parties(); ++p) best_response(terms, g, st, p);
      const double v = top_eigen(bell_matrix(terms, embed(g, st)), &st.state) + b.offset;
      trace.push_back(v);
      if (v - prev <= 1e-10) break;
      prev = v;
    }
    const double certified = evaluate(g, st);
    if (certified > out.value) {
      out.value = certified;
      out.best = std::move(st);
      out.trace = std::move(trace);
    }
  }
  return out;
}

double seesaw_lower_bound(const Game& g, int dim, int restarts, std::uint64_t seed) {
  return seesaw(g, dim, restarts, seed).value;
}

}  // namespace ncsos
