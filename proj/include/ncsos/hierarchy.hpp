#pragma once

// Relaxation hierarchy: monomial bases and the moment / sum-of-squares SDPs.
//
// Both formulations share one set of SDP data. With z the basis and
// Esym(i, j) the symmetric unit matrix picking out entry (i, j):
//
//   C          = -sum over Bell terms c_m Esym(rep(m))
//   A_0        = E_00, b_0 = 1                      (normalisation / nu)
//   A_k        = Esym(rep(m)) - Esym(p), b_k = 0     (equal moments)
//              = Esym(p),                b_k = 0     (annihilated products)
//              = completeness relations, b_k = 0
//
// The moment problem is the standard form over M = Z; the SOS problem is the
// inequality form, Gamma = C + nu E_00 + sum_k x_k A_k >= 0, minimising nu.

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ncsos/games.hpp"
#include "ncsos/nc_algebra.hpp"
#include "ncsos/sdp.hpp"

namespace ncsos {

struct LevelSpec {
  enum class Kind { full, shaped, custom };

  Kind kind = Kind::full;
  int level = 1;
  /// Shaped: per-party degree vectors from letter tokens ("AB" -> {1, 1}),
  /// plus bare numbers n meaning every shape of total degree <= n.
  std::vector<std::vector<int>> shapes;
  std::vector<int> degree_bounds;
  std::vector<std::string> tokens;
  /// Custom: monomials in text form and where they came from.
  std::vector<std::string> monomials;
  std::string source;

  static LevelSpec full(int n);
  /// Parses `full:<n>`, a shape list such as `1+AB`, or `custom:<path>`
  /// (the file is read here; `#` starts a comment).
  static LevelSpec parse(std::string_view text);
  static LevelSpec custom(std::vector<std::string> monomials, std::string source = "inline");

  std::string to_string() const;
};

class MonomialBasis {
 public:
  MonomialBasis() = default;
  /// Identity must be first; duplicates are rejected.
  MonomialBasis(std::shared_ptr<const Schema> schema, std::vector<Monomial> entries);

  const Schema& schema() const noexcept { return *schema_; }
  const std::shared_ptr<const Schema>& schema_ptr() const noexcept { return schema_; }
  const std::vector<Monomial>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const Monomial& operator[](std::size_t i) const { return entries_.at(i); }
  std::optional<std::size_t> find(const Monomial& m) const;

  friend bool operator==(const MonomialBasis& a, const MonomialBasis& b) { return a.entries_ == b.entries_; }

 private:
  std::shared_ptr<const Schema> schema_;
  std::vector<Monomial> entries_;
  std::map<Monomial, std::size_t> index_;
};

/// Default bases in projector mode leave out the last outcome of every
/// setting; it is affinely determined by the others through completeness.
MonomialBasis generate_basis(const Game& g, const LevelSpec& spec);

enum class Formulation { moment, sos };
std::string_view to_string(Formulation f);

/// What an SDP constraint row encodes, and hence what polynomial its
/// multiplier stands for in a certificate.
struct ConstraintInfo {
  enum class Kind { normalization, equal_moment, annihilated, completeness };
  Kind kind = Kind::equal_moment;
  std::pair<int, int> first{0, 0};   // equal_moment: representative entry
  std::pair<int, int> second{0, 0};  // equal_moment / annihilated: the entry
  // completeness: sym(u^dag (sum_a X_{party,setting}^a - I) v), u = z_row, v = z_col
  int party = 0;
  int setting = 0;
};

/// B = B' + sum weight * sym(left (sum_a X^a - I) right), produced when a Bell
/// term's last-outcome projector is rewritten as I - sum of the others.
struct CompletenessTerm {
  Monomial left;
  Monomial right;
  int party = 0;
  int setting = 0;
  double weight = 0.0;
};

struct RelaxationProblem {
  Formulation formulation = Formulation::moment;
  MonomialBasis basis;
  SDPProblem<double> sdp;
  std::map<Monomial, std::vector<std::pair<int, int>>> moment_index;
  std::vector<std::pair<int, int>> annihilated;
  std::vector<ConstraintInfo> constraints;  // parallel to sdp.a
  BellOperator bell;                        // as given by the game
  NCPolynomial objective;                   // B' (every term inside the moment domain)
  std::vector<CompletenessTerm> substitutions;
  int dropped_constraints = 0;

  /// Game value bound from an SDP optimum.
  double bound(double sdp_value) const { return sdp_value + bell.offset; }
};

/// Canonical class key shared by m and its adjoint.
Monomial moment_class(const Monomial& m, const Schema& schema);

RelaxationProblem build_moment_sdp(const Game& g, const MonomialBasis& basis);
RelaxationProblem build_sos_sdp(const Game& g, const MonomialBasis& basis);

struct LevelResult {
  int level = 0;
  double bound = 0.0;
  SolveStatus status = SolveStatus::numerical_failure;
  int iterations = 0;
  double seconds = 0.0;
};

/// Solves full:1 .. full:max_level with the moment formulation.
std::vector<LevelResult> level_sequence(const Game& g, int max_level, const SolverOptions& opts = {});

}  // namespace ncsos
