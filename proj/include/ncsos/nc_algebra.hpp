#pragma once

// Noncommutative monomials and polynomials over party-partitioned measurement
// operators. Words are kept in a canonical form modulo the quantum-measurement
// rewrite rules: letters of different parties commute, projectors are
// idempotent, projectors of one setting are mutually orthogonal, and
// observables square to the identity. Completeness (outcomes summing to the
// identity) is not a rewrite rule; it is handled as a linear relation
// wherever it is needed.

#include <compare>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ncsos/errors.hpp"

namespace ncsos {

enum class OperatorKind { projector, observable };

std::string_view to_string(OperatorKind kind);
OperatorKind operator_kind_from_string(std::string_view text);

/// One measurement operator: party, setting, and (projector mode) outcome.
/// In observable mode `outcome` is always 0.
struct Generator {
  std::uint16_t party = 0;
  std::uint16_t setting = 0;
  std::uint16_t outcome = 0;

  friend auto operator<=>(const Generator&, const Generator&) = default;
};

/// Hard cap on word length, before and after reduction.
inline constexpr std::size_t kMaxWordLength = 24;

/// Operator kind plus outcome counts, indexed [party][setting].
class Schema {
 public:
  Schema(OperatorKind kind, std::vector<std::vector<int>> outcomes);

  OperatorKind kind() const noexcept { return kind_; }
  int num_parties() const noexcept { return static_cast<int>(outcomes_.size()); }
  int num_settings(int party) const { return static_cast<int>(outcomes_.at(party).size()); }
  int num_outcomes(int party, int setting) const { return outcomes_.at(party).at(setting); }
  const std::vector<std::vector<int>>& outcomes() const noexcept { return outcomes_; }

  bool contains(const Generator& g) const noexcept;
  /// Throws SchemaError naming the offending index.
  void check(const Generator& g) const;

  /// All generators in (party, setting, outcome) order. With
  /// `drop_last_outcome` the last outcome of every projector setting is
  /// omitted; it is affinely determined by the others through completeness.
  std::vector<Generator> generators(bool drop_last_outcome = false) const;

  friend bool operator==(const Schema&, const Schema&) = default;

 private:
  OperatorKind kind_;
  std::vector<std::vector<int>> outcomes_;
};

/// Which rewrite rules reduce() applies. Turning rules off is used for
/// checking identities that hold without the measurement constraints.
struct RewriteRules {
  bool commute = true;     // cross-party letters are sorted by party
  bool idempotent = true;  // XX -> X (projector) or XX -> I (observable)
  bool orthogonal = true;  // X^a X^b -> 0 for a != b in one setting

  static constexpr RewriteRules all() { return {}; }
  static constexpr RewriteRules commutation_only() { return {true, false, false}; }
};

/// A reduced word, or the annihilated word (scalar 0). The empty live word is
/// the identity. Instances are produced by reduce(), so every Monomial seen
/// through the public interface is canonical for the rules it was reduced with.
class Monomial {
 public:
  /// The identity.
  Monomial() = default;
  static Monomial zero();

  const std::vector<Generator>& word() const noexcept { return word_; }
  bool is_zero() const noexcept { return zero_; }
  bool is_identity() const noexcept { return !zero_ && word_.empty(); }
  std::size_t degree() const noexcept { return word_.size(); }

  /// Graded lexicographic order; the zero word sorts first.
  friend std::strong_ordering operator<=>(const Monomial& a, const Monomial& b);
  friend bool operator==(const Monomial&, const Monomial&) = default;

 private:
  friend Monomial reduce(std::span<const Generator>, const Schema&, RewriteRules);
  explicit Monomial(std::vector<Generator> word) : word_(std::move(word)) {}

  std::vector<Generator> word_;
  bool zero_ = false;
};

Monomial reduce(std::span<const Generator> word, const Schema& schema,
                RewriteRules rules = RewriteRules::all());
Monomial adjoint(const Monomial& m, const Schema& schema, RewriteRules rules = RewriteRules::all());
/// reduce(a.word ++ b.word); zero if either factor is zero.
Monomial multiply(const Monomial& a, const Monomial& b, const Schema& schema,
                  RewriteRules rules = RewriteRules::all());
/// reduce(adjoint(a).word ++ b.word), the (a, b) entry of a moment matrix.
Monomial inner(const Monomial& a, const Monomial& b, const Schema& schema,
               RewriteRules rules = RewriteRules::all());

/// Text form: "I" for the identity, "0" for the zero word, otherwise letters
/// such as "A1 B2 C3" (observable) or "A1:0 B2:1" (projector). Party letters
/// start at A; settings are 1-based, outcomes 0-based.
std::string to_string(const Monomial& m, OperatorKind kind);
Monomial parse_monomial(std::string_view text, const Schema& schema);

/// Sparse real polynomial keyed by canonical monomials. Carries the schema it
/// was built over; arithmetic between polynomials of different schemas throws.
class NCPolynomial {
 public:
  using Terms = std::map<Monomial, double>;

  explicit NCPolynomial(std::shared_ptr<const Schema> schema);
  NCPolynomial(std::shared_ptr<const Schema> schema, const Monomial& m, double coefficient = 1.0);

  static NCPolynomial identity(std::shared_ptr<const Schema> schema, double coefficient = 1.0);
  /// reduce(word) with coefficient 1 (empty polynomial if annihilated).
  static NCPolynomial from_word(std::shared_ptr<const Schema> schema,
                                std::span<const Generator> word,
                                RewriteRules rules = RewriteRules::all());

  const Schema& schema() const noexcept { return *schema_; }
  const std::shared_ptr<const Schema>& schema_ptr() const noexcept { return schema_; }
  const Terms& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }
  std::size_t size() const noexcept { return terms_.size(); }
  double coefficient(const Monomial& m) const;
  std::size_t degree() const;
  double max_abs_coefficient() const;

  /// Adds c·m. Zero monomials and coefficients that cancel exactly are dropped.
  void add_term(const Monomial& m, double c);
  /// Drops terms with |coefficient| <= tol.
  void prune(double tol);

  NCPolynomial& operator+=(const NCPolynomial& other);
  NCPolynomial& operator-=(const NCPolynomial& other);
  NCPolynomial& operator*=(double s);

  friend bool operator==(const NCPolynomial& a, const NCPolynomial& b) {
    return *a.schema_ == *b.schema_ && a.terms_ == b.terms_;
  }

 private:
  void require_same_schema(const NCPolynomial& other) const;

  std::shared_ptr<const Schema> schema_;
  Terms terms_;
};

NCPolynomial operator+(NCPolynomial a, const NCPolynomial& b);
NCPolynomial operator-(NCPolynomial a, const NCPolynomial& b);
NCPolynomial operator*(NCPolynomial p, double s);
NCPolynomial operator*(double s, NCPolynomial p);
/// Product in the quotient algebra (or the algebra given by `rules`).
NCPolynomial multiply(const NCPolynomial& p, const NCPolynomial& q,
                      RewriteRules rules = RewriteRules::all());
NCPolynomial operator*(const NCPolynomial& p, const NCPolynomial& q);
NCPolynomial adjoint(const NCPolynomial& p);
/// coefficient(m) == coefficient(adjoint(m)) for every m, within tol.
bool is_hermitian(const NCPolynomial& p, double tol = 0.0);

std::string to_string(const NCPolynomial& p);

// ---------------------------------------------------------------------------
// Matrix instantiation. A literal evaluation with no rewriting, used as ground
// truth for the rewrite rules.

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// A matrix for every generator of a schema, all of one dimension.
template <typename Scalar>
class Assignment {
 public:
  Assignment(std::shared_ptr<const Schema> schema, std::map<Generator, DenseMatrix<Scalar>> matrices);

  const Schema& schema() const noexcept { return *schema_; }
  Eigen::Index dimension() const noexcept { return dimension_; }
  const DenseMatrix<Scalar>& operator[](const Generator& g) const;

  /// Max violation of the mode constraints: Hermiticity, plus idempotence,
  /// orthogonality and completeness (projector) or squaring to the identity
  /// (observable).
  double constraint_violation() const;
  /// Throws SchemaError when constraint_violation() > tol.
  void validate(double tol = 1e-10) const;

 private:
  std::shared_ptr<const Schema> schema_;
  std::map<Generator, DenseMatrix<Scalar>> matrices_;
  Eigen::Index dimension_ = 0;
};

template <typename Scalar>
DenseMatrix<Scalar> instantiate(std::span<const Generator> word, const Assignment<Scalar>& a);
template <typename Scalar>
DenseMatrix<Scalar> instantiate(const NCPolynomial& p, const Assignment<Scalar>& a);

extern template class Assignment<double>;
extern template class Assignment<std::complex<double>>;

}  // namespace ncsos
