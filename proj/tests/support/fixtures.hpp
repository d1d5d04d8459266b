#pragma once

// Hand-written certificates and Gram matrices, shared by the unit tests and
// the acceptance suite.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ncsos/certificates.hpp"
#include "ncsos/games.hpp"
#include "ncsos/hierarchy.hpp"

#ifndef NCSOS_TEST_DATA
#define NCSOS_TEST_DATA "data"
#endif

namespace fixtures {

using namespace ncsos;

inline std::string data_path(const std::string& name) { return std::string(NCSOS_TEST_DATA) + "/" + name; }

inline MonomialBasis basis_of(const Game& g, const std::vector<std::string>& words) {
  return generate_basis(g, LevelSpec::custom(words));
}

/// 2 sqrt2 I - B_CHSH = (h1^2 + h2^2) / (2 sqrt2) with h1 = A1 + A2 - sqrt2 B1,
/// h2 = A1 - A2 - sqrt2 B2, over z = (I, A1, A2, B1, B2).
inline Certificate chsh_certificate() {
  const Game g = builtin("chsh-correlator");
  const double r2 = std::sqrt(2.0);
  Certificate c;
  c.bound = 2 * r2;
  c.basis = basis_of(g, {"I", "A1", "A2", "B1", "B2"});
  c.squares = {{1 / (2 * r2), {0, 1, 1, -r2, 0}}, {1 / (2 * r2), {0, 1, -1, 0, -r2}}};
  c.gram = Matrix<double>::Zero(5, 5);
  for (const auto& sq : c.squares) {
    const Eigen::Map<const Eigen::VectorXd> v(sq.coefficients.data(), 5);
    c.gram += sq.weight * v * v.transpose();
  }
  return c;
}

/// Gram matrix for 3/8 I - B_3322 over z = (I, A1, A2, A3, B1, B2, B3),
/// outcome-0 projectors.
inline Matrix<double> i3322_gamma() {
  Matrix<double> g(7, 7);
  g << 0.75, 0, -1, -0.5, 1, 0, -0.5,
       0, 2, 0, 0, -1, -1, -1,
       -1, 0, 2, 0, -1, -1, 1,
       -0.5, 0, 0, 1, -1, 1, 0,
       1, -1, -1, -1, 2, 0, 0,
       0, -1, -1, 1, 0, 2, 0,
       -0.5, -1, 1, 0, 0, 0, 1;
  return g / 2;
}

inline std::vector<std::string> i3322_level1_words() { return {"I", "A1:0", "A2:0", "A3:0", "B1:0", "B2:0", "B3:0"}; }

/// The 25 Yao monomials in file order: I, the six t_ijk with i, j, k
/// distinct, then six groups of three.
inline LevelSpec yao_spec() { return LevelSpec::parse("custom:" + data_path("yao25.basis")); }

/// Gamma_7x7 (+) six copies of Gamma_3x3 in the order of yao_spec().
inline Matrix<double> yao_gamma() {
  const double r3 = std::sqrt(3.0);
  const double a = 1 / r3, b = -1 / (3 * r3);
  Matrix<double> g = Matrix<double>::Zero(25, 25);
  Matrix<double> top(7, 7);
  top << 3 * r3, -1, -1, -1, 1, 1, 1,
         -1, a, 0, 0, b, b, b,
         -1, 0, a, 0, b, b, b,
         -1, 0, 0, a, b, b, b,
         1, b, b, b, a, 0, 0,
         1, b, b, b, 0, a, 0,
         1, b, b, b, 0, 0, a;
  g.topLeftCorner(7, 7) = top / 2;
  for (int blk = 0; blk < 6; ++blk) g.block(7 + 3 * blk, 7 + 3 * blk, 3, 3).setConstant(1 / (12 * r3));
  return g;
}

/// z^dag Gamma z + sum alpha (I - t^dag t) + sum' (f + f^dag) / (24 sqrt3) - (3 sqrt3 I - B)
/// computed with cross-party commutation only, so A_i^2 is not reduced.
/// With the weight 1/(12 sqrt3) on f + f^dag the cross terms come out twice:
/// sum' f over all orderings is already Hermitian.
inline NCPolynomial yao_commutation_identity_residual(double f_weight = 1 / (24 * std::sqrt(3.0))) {
  const Game g = builtin("yao");
  const auto schema = g.schema();
  const RewriteRules rules = RewriteRules::commutation_only();
  const double r3 = std::sqrt(3.0);

  auto letter = [](int party, int setting) {
    return Generator{static_cast<std::uint16_t>(party), static_cast<std::uint16_t>(setting - 1), 0};
  };
  auto t = [&](int i, int j, int k) { return std::vector<Generator>{letter(0, i), letter(1, j), letter(2, k)}; };
  auto adj = [](std::vector<Generator> w) {
    std::reverse(w.begin(), w.end());
    return w;
  };
  auto word = [&](const std::vector<Generator>& l, const std::vector<Generator>& r) {
    std::vector<Generator> w = adj(l);
    w.insert(w.end(), r.begin(), r.end());
    return reduce(w, *schema, rules);
  };

  NCPolynomial p(schema);
  const MonomialBasis basis = generate_basis(g, yao_spec());
  const Matrix<double> gamma = yao_gamma();
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = 0; j < basis.size(); ++j)
      if (gamma(i, j) != 0) p.add_term(word(basis[i].word(), basis[j].word()), gamma(i, j));

  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j)
      for (int k = 1; k <= 3; ++k) {
        const bool distinct = i != j && j != k && i != k;
        const double alpha = distinct ? 1 / (2 * r3) : (i == j && j == k ? 0.0 : 1 / (12 * r3));
        if (alpha != 0) {
          p.add_term(Monomial(), alpha);
          p.add_term(word(t(i, j, k), t(i, j, k)), -alpha);
        }
        if (!distinct) continue;
        const double w = f_weight;
        // f and f^dag together: each product enters with its adjoint.
        auto sym = [&](const std::vector<Generator>& l, const std::vector<Generator>& r, double c) {
          p.add_term(word(l, r), w * c);
          p.add_term(word(r, l), w * c);
        };
        sym(t(i, j, k), t(i, k, j), 2);
        sym(t(j, j, k), t(j, k, j), -1);
        sym(t(k, j, k), t(k, k, j), -1);
        sym(t(i, j, k), t(k, j, i), 2);
        sym(t(i, i, k), t(k, i, i), -1);
        sym(t(i, k, k), t(k, k, i), -1);
        sym(t(i, j, k), t(j, i, k), 2);
        sym(t(i, j, j), t(j, i, j), -1);
        sym(t(i, j, i), t(j, i, i), -1);
      }

  // Subtract 3 sqrt3 I - B.
  p.add_term(Monomial(), -3 * r3);
  const BellOperator b = bell_operator(g);
  for (const auto& [m, c] : b.polynomial.terms()) p.add_term(reduce(m.word(), *schema, rules), c);
  p.add_term(Monomial(), b.offset);
  return p;
}

}  // namespace fixtures
