#pragma once

// Semidefinite programs over a direct sum of real symmetric blocks.
//
// Both forms share one set of data (C, A_1..A_m, b):
//
//   standard    maximize  -<C, Z>   s.t.  <A_k, Z> = b_k,  Z >= 0
//   inequality  minimize  b^T x     s.t.  C + sum_k x_k A_k >= 0
//
// Each is the Lagrangian dual of the other, so translate() only flips the
// form tag. For any feasible pair, b^T x - (-<C, Z>) = <C + A*(x), Z> >= 0.

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ncsos/errors.hpp"

namespace ncsos {

enum class SdpForm { standard, inequality };
std::string_view to_string(SdpForm form);

/// One upper-triangle entry (row <= col) of a block-diagonal symmetric matrix.
template <typename Scalar>
struct SymEntry {
  int block = 0;
  int row = 0;
  int col = 0;
  Scalar value = 0;

  friend auto operator<=>(const SymEntry&, const SymEntry&) = default;
};

/// Sparse block-diagonal symmetric matrix stored as its upper triangle.
template <typename Scalar>
class SparseSymMatrix {
 public:
  /// Adds `value` at (row, col) and, implicitly, at (col, row).
  void add(int block, int row, int col, Scalar value);
  /// Sorts, merges duplicates, and drops exact zeros.
  void compress();

  const std::vector<SymEntry<Scalar>>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }
  Scalar frobenius_norm() const;
  Scalar max_abs() const;

  friend bool operator==(const SparseSymMatrix&, const SparseSymMatrix&) = default;

 private:
  std::vector<SymEntry<Scalar>> entries_;
};

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using BlockMatrix = std::vector<Matrix<Scalar>>;

template <typename Scalar>
struct SDPProblem {
  SdpForm form = SdpForm::standard;
  /// Block sizes; a negative size marks a diagonal (LP) block, as in SDPA.
  std::vector<int> block_sizes;
  SparseSymMatrix<Scalar> c;
  std::vector<SparseSymMatrix<Scalar>> a;
  Vector<Scalar> b;

  int num_constraints() const noexcept { return static_cast<int>(a.size()); }
  int block_dim(std::size_t blk) const { return std::abs(block_sizes.at(blk)); }
  /// Throws Error if an entry falls outside its block or sizes disagree.
  void validate() const;

  friend bool operator==(const SDPProblem& p, const SDPProblem& q) {
    return p.form == q.form && p.block_sizes == q.block_sizes && p.c == q.c && p.a == q.a &&
           p.b.size() == q.b.size() && p.b == q.b;
  }
};

/// Same data, other form.
template <typename Scalar>
SDPProblem<Scalar> translate(const SDPProblem<Scalar>& p);

/// Removes constraints whose (A_k, b_k) is a linear combination of earlier
/// ones within `tol` (relative). Returns how many were dropped; `kept`, when
/// given, receives the original indices of the surviving constraints.
template <typename Scalar>
int drop_dependent_constraints(SDPProblem<Scalar>& p, Scalar tol = Scalar(1e-10), std::vector<int>* kept = nullptr);

/// sum_k x_k A_k (+ C when `with_c`) as dense blocks.
template <typename Scalar>
BlockMatrix<Scalar> affine_combination(const SDPProblem<Scalar>& p, const Vector<Scalar>& x, bool with_c);

// ---------------------------------------------------------------------------

enum class SolveStatus { optimal, max_iterations, numerical_failure };
std::string_view to_string(SolveStatus status);

struct SolverOptions {
  double tol = 1e-8;
  int max_iter = 200;
  double step_frac = 0.98;
  bool verbose = false;
  std::ostream* log = nullptr;  // defaults to std::cerr when verbose

  /// Applies one `key=value` pair (tol, max_iter, step_frac, verbose).
  void set(std::string_view key_value);
};

template <typename Scalar>
struct IterationRecord {
  int iteration = 0;
  Scalar mu = 0;
  Scalar primal_objective = 0;  // -<C, Z>
  Scalar dual_objective = 0;    // b^T x
  Scalar primal_infeasibility = 0;
  Scalar dual_infeasibility = 0;
  Scalar primal_step = 0;
  Scalar dual_step = 0;
};

template <typename Scalar>
struct SDPSolution {
  SolveStatus status = SolveStatus::numerical_failure;
  int iterations = 0;
  /// Objective of the problem as posed (its own form) and of its translate.
  Scalar primal_value = 0;
  Scalar dual_value = 0;
  /// Z of the standard form, and S = C + sum x_k A_k of the inequality form.
  BlockMatrix<Scalar> z;
  BlockMatrix<Scalar> s;
  Vector<Scalar> x;
  Scalar primal_residual = 0;  // max |<A_k, Z> - b_k| / (1 + max |b|)
  Scalar dual_residual = 0;    // max |C + A*(x) - S| / (1 + max |C|)
  Scalar gap = 0;              // |b^T x + <C, Z>| / (1 + |b^T x| + |<C, Z>|)
  std::vector<IterationRecord<Scalar>> history;

  /// The PSD matrix variable of a problem of the given form.
  const BlockMatrix<Scalar>& primal_matrix(SdpForm form) const { return form == SdpForm::standard ? z : s; }
};

/// Primal-dual path following: HKM direction, Mehrotra predictor-corrector,
/// dense Cholesky of the Schur complement. Deterministic. A non-optimal status
/// comes with the iterate that had the smallest max(residuals, gap).
template <typename Scalar>
SDPSolution<Scalar> solve(const SDPProblem<Scalar>& p, const SolverOptions& opts = {});

// ---------------------------------------------------------------------------
// SDPA sparse format (.dat-s). The file holds SDPA's primal
//   minimize c^T x  s.t.  sum_i F_i x_i - F_0 >= 0
// which is the inequality form with F_0 = -C, F_k = A_k, c = b.

std::string write_sdpa(const SDPProblem<double>& p);
void export_sdpa(const SDPProblem<double>& p, const std::string& path);
/// Reads SDPA sparse text; the result is in inequality form.
SDPProblem<double> read_sdpa(std::string_view text);
SDPProblem<double> import_sdpa(const std::string& path);

extern template class SparseSymMatrix<double>;
extern template struct SDPProblem<double>;
extern template SDPProblem<double> translate(const SDPProblem<double>&);
extern template int drop_dependent_constraints(SDPProblem<double>&, double, std::vector<int>*);
extern template BlockMatrix<double> affine_combination(const SDPProblem<double>&, const Vector<double>&, bool);
extern template SDPSolution<double> solve(const SDPProblem<double>&, const SolverOptions&);

}  // namespace ncsos
