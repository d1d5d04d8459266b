#pragma once

// Weighted sum-of-squares certificates
//
//   bound I - B = sum_i d_i r_i^dag r_i + sum_k w_k P_k      (quotient algebra)
//
// where r_i = sum_j c_ij z_j over a monomial basis z and each P_k is a
// constraint polynomial. Ring multipliers stand for polynomials that already
// reduce to zero (equal moments, annihilated products) and are kept for the
// record only. Completeness multipliers stand for
// sym(L (sum_a X_s^a - I) R) and are expanded by the verifier.

#include <string>
#include <string_view>
#include <vector>

#include "ncsos/games.hpp"
#include "ncsos/hierarchy.hpp"
#include "ncsos/nc_algebra.hpp"
#include "ncsos/sdp.hpp"

namespace ncsos {

struct Square {
  double weight = 0.0;
  std::vector<double> coefficients;  // over the basis

  friend bool operator==(const Square&, const Square&) = default;
};

struct Multiplier {
  enum class Kind { ring, completeness };
  Kind kind = Kind::ring;
  double weight = 0.0;
  std::string label;  // ring: which identity the row encoded
  Monomial left;
  Monomial right;
  int party = 0;
  int setting = 0;

  friend bool operator==(const Multiplier&, const Multiplier&) = default;
};

struct Certificate {
  double bound = 0.0;
  MonomialBasis basis;
  Matrix<double> gram;
  std::vector<Square> squares;
  std::vector<Multiplier> multipliers;
  double residual = 0.0;  // as measured when the certificate was made

  /// sum_i d_i r_i^dag r_i, reduced.
  NCPolynomial sum_of_squares() const;
};

/// Clipping threshold for negative Gram eigenvalues.
inline constexpr double kClipTolerance = 1e-8;

/// Certificate from a solved relaxation of either formulation; the Gram
/// matrix is C + sum_k x_k A_k evaluated at the solution's x.
Certificate extract(const SDPSolution<double>& sol, const RelaxationProblem& prob);

/// Certificate from an explicit Gram matrix with no multipliers.
Certificate from_gram(double bound, MonomialBasis basis, const Matrix<double>& gram);

/// bound I - (B + offset) - squares - multipliers, reduced.
NCPolynomial residual_polynomial(const Certificate& c, const Game& g);
/// Max |coefficient| of residual_polynomial.
double verify(const Certificate& c, const Game& g);

std::string serialize(const Certificate& c);
/// Errors are ParseError with a line number.
Certificate parse_certificate(std::string_view text);

}  // namespace ncsos
