#pragma once

// Template definitions for sdp.hpp. Included by src/sdp.cpp for the double
// instantiation; include it directly to solve in another scalar type.

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <tuple>

#include "ncsos/sdp.hpp"

namespace ncsos {

template <typename Scalar>
void SparseSymMatrix<Scalar>::add(int block, int row, int col, Scalar value) {
  if (row > col) std::swap(row, col);
  entries_.push_back({block, row, col, value});
}

template <typename Scalar>
void SparseSymMatrix<Scalar>::compress() {
  std::sort(entries_.begin(), entries_.end(), [](const auto& x, const auto& y) {
    return std::tie(x.block, x.row, x.col) < std::tie(y.block, y.row, y.col);
  });
  std::vector<SymEntry<Scalar>> merged;
  merged.reserve(entries_.size());
  for (const auto& e : entries_) {
    if (!merged.empty() && merged.back().block == e.block && merged.back().row == e.row &&
        merged.back().col == e.col)
      merged.back().value += e.value;
    else
      merged.push_back(e);
  }
  std::erase_if(merged, [](const auto& e) { return e.value == Scalar(0); });
  entries_ = std::move(merged);
}

template <typename Scalar>
Scalar SparseSymMatrix<Scalar>::frobenius_norm() const {
  Scalar sum = 0;
  for (const auto& e : entries_) sum += (e.row == e.col ? 1 : 2) * e.value * e.value;
  return std::sqrt(sum);
}

template <typename Scalar>
Scalar SparseSymMatrix<Scalar>::max_abs() const {
  Scalar out = 0;
  for (const auto& e : entries_) out = std::max<Scalar>(out, std::abs(e.value));
  return out;
}

template <typename Scalar>
void SDPProblem<Scalar>::validate() const {
  if (block_sizes.empty()) throw Error("SDP needs at least one block");
  for (int s : block_sizes)
    if (s == 0) throw Error("SDP block sizes must be nonzero");
  if (b.size() != num_constraints()) throw Error("SDP: cost vector length differs from constraint count");
  auto check = [this](const SparseSymMatrix<Scalar>& m) {
    for (const auto& e : m.entries()) {
      if (e.block < 0 || e.block >= static_cast<int>(block_sizes.size()))
        throw Error("SDP entry references a missing block");
      const int n = block_dim(e.block);
      if (e.row < 0 || e.col >= n || e.row > e.col) throw Error("SDP entry outside its block");
      if (block_sizes[e.block] < 0 && e.row != e.col) throw Error("off-diagonal entry in a diagonal block");
    }
  };
  check(c);
  for (const auto& ak : a) check(ak);
}

template <typename Scalar>
SDPProblem<Scalar> translate(const SDPProblem<Scalar>& p) {
  SDPProblem<Scalar> out = p;
  out.form = p.form == SdpForm::standard ? SdpForm::inequality : SdpForm::standard;
  return out;
}

template <typename Scalar>
int drop_dependent_constraints(SDPProblem<Scalar>& p, Scalar tol, std::vector<int>* kept) {
  // Rows are (A_k, b_k) over a global entry index. Sparse Gaussian elimination
  // in echelon form: each kept row is stored with its leftmost significant
  // entry as pivot, so reducing a new row only ever moves entries rightwards.
  std::map<std::tuple<int, int, int>, int> entry_id;
  for (const auto& ak : p.a)
    for (const auto& e : ak.entries()) entry_id.emplace(std::tuple{e.block, e.row, e.col}, 0);
  int next = 0;
  for (auto& [key, id] : entry_id) id = next++;
  const int b_col = next;

  std::map<int, std::map<int, Scalar>> pivots;  // pivot column -> normalised row
  std::vector<SparseSymMatrix<Scalar>> kept_a;
  std::vector<Scalar> kept_b;
  int dropped = 0;
  if (kept) kept->clear();
  for (int k = 0; k < p.num_constraints(); ++k) {
    std::map<int, Scalar> row;
    Scalar scale = 0;
    for (const auto& e : p.a[k].entries()) {
      row[entry_id.at({e.block, e.row, e.col})] += e.value;
      scale = std::max<Scalar>(scale, std::abs(e.value));
    }
    if (p.b[k] != Scalar(0)) row[b_col] = p.b[k];
    const Scalar cutoff = tol * std::max<Scalar>(scale, Scalar(1));

    for (auto it = row.begin(); it != row.end();) {
      if (std::abs(it->second) <= cutoff) {
        it = row.erase(it);
        continue;
      }
      const auto piv = pivots.find(it->first);
      if (piv == pivots.end()) {
        ++it;
        continue;
      }
      const int col = it->first;
      const Scalar factor = it->second;
      for (const auto& [c, v] : piv->second) row[c] -= factor * v;
      row.erase(col);
      it = row.upper_bound(col);
      // Entries left of `it` are non-pivot columns already visited; none can
      // have been created, since pivot rows only extend to the right.
    }
    std::erase_if(row, [cutoff](const auto& kv) { return std::abs(kv.second) <= cutoff; });

    const bool a_part_empty = row.empty() || (row.size() == 1 && row.begin()->first == b_col);
    if (a_part_empty && row.empty()) {
      ++dropped;
      continue;
    }
    if (!a_part_empty) {
      const int pivot_col = row.begin()->first;
      const Scalar pv = row.begin()->second;
      for (auto& [c, v] : row) v /= pv;
      pivots.emplace(pivot_col, std::move(row));
    }
    // A zero row with nonzero b is an inconsistent equation; it is kept so the
    // solver reports the infeasibility instead of silently ignoring it.
    kept_a.push_back(p.a[k]);
    kept_b.push_back(p.b[k]);
    if (kept) kept->push_back(k);
  }
  p.a = std::move(kept_a);
  p.b = Eigen::Map<const Vector<Scalar>>(kept_b.data(), static_cast<Eigen::Index>(kept_b.size()));
  return dropped;
}

namespace detail {

template <typename Scalar>
BlockMatrix<Scalar> zero_blocks(const SDPProblem<Scalar>& p) {
  BlockMatrix<Scalar> out;
  for (std::size_t k = 0; k < p.block_sizes.size(); ++k) {
    const int n = p.block_dim(k);
    out.push_back(Matrix<Scalar>::Zero(n, n));
  }
  return out;
}

template <typename Scalar>
void accumulate(BlockMatrix<Scalar>& out, const SparseSymMatrix<Scalar>& m, Scalar scale) {
  for (const auto& e : m.entries()) {
    out[e.block](e.row, e.col) += scale * e.value;
    if (e.row != e.col) out[e.block](e.col, e.row) += scale * e.value;
  }
}

/// <M, Y> for sparse symmetric M and dense (not necessarily symmetric) Y.
template <typename Scalar>
Scalar inner(const SparseSymMatrix<Scalar>& m, const BlockMatrix<Scalar>& y) {
  Scalar sum = 0;
  for (const auto& e : m.entries()) {
    const auto& blk = y[e.block];
    sum += e.row == e.col ? e.value * blk(e.row, e.row) : e.value * (blk(e.row, e.col) + blk(e.col, e.row));
  }
  return sum;
}

template <typename Scalar>
Scalar inner(const BlockMatrix<Scalar>& x, const BlockMatrix<Scalar>& y) {
  Scalar sum = 0;
  for (std::size_t k = 0; k < x.size(); ++k) sum += x[k].cwiseProduct(y[k]).sum();
  return sum;
}

template <typename Scalar>
Scalar max_abs(const BlockMatrix<Scalar>& x) {
  Scalar out = 0;
  for (const auto& blk : x)
    if (blk.size() > 0) out = std::max<Scalar>(out, blk.cwiseAbs().maxCoeff());
  return out;
}

template <typename Scalar>
Vector<Scalar> apply_constraints(const SDPProblem<Scalar>& p, const BlockMatrix<Scalar>& y) {
  Vector<Scalar> out(p.num_constraints());
  for (int k = 0; k < p.num_constraints(); ++k) out[k] = inner(p.a[k], y);
  return out;
}

/// Largest alpha in (0, inf] with x + alpha dx PSD, given PD x.
template <typename Scalar>
Scalar max_step(const BlockMatrix<Scalar>& x, const BlockMatrix<Scalar>& dx, bool& ok) {
  Scalar alpha = std::numeric_limits<Scalar>::infinity();
  for (std::size_t k = 0; k < x.size(); ++k) {
    Eigen::LLT<Matrix<Scalar>> llt(x[k]);
    if (llt.info() != Eigen::Success) {
      ok = false;
      return 0;
    }
    Matrix<Scalar> t = llt.matrixL().solve(dx[k]);
    t = llt.matrixL().solve(t.transpose()).eval();
    t = (t + t.transpose()).eval() / Scalar(2);
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(t, Eigen::EigenvaluesOnly);
    const Scalar lmin = eig.eigenvalues().minCoeff();
    if (lmin < 0) alpha = std::min<Scalar>(alpha, Scalar(-1) / lmin);
  }
  return alpha;
}

template <typename Scalar>
Scalar initial_scale(const SDPProblem<Scalar>& p) {
  Scalar eta = std::max<Scalar>(p.c.frobenius_norm(), p.b.size() ? p.b.cwiseAbs().maxCoeff() : Scalar(0));
  for (const auto& ak : p.a) eta = std::max<Scalar>(eta, ak.frobenius_norm());
  return Scalar(1) + eta;
}

}  // namespace detail

template <typename Scalar>
BlockMatrix<Scalar> affine_combination(const SDPProblem<Scalar>& p, const Vector<Scalar>& x, bool with_c) {
  BlockMatrix<Scalar> out = detail::zero_blocks(p);
  if (with_c) detail::accumulate(out, p.c, Scalar(1));
  for (int k = 0; k < p.num_constraints(); ++k)
    if (x[k] != Scalar(0)) detail::accumulate(out, p.a[k], x[k]);
  return out;
}

template <typename Scalar>
SDPSolution<Scalar> solve(const SDPProblem<Scalar>& p, const SolverOptions& opts) {
  using detail::inner;
  p.validate();
  const int m = p.num_constraints();
  const std::size_t nb = p.block_sizes.size();
  const Scalar tol = static_cast<Scalar>(opts.tol);
  const Scalar frac = static_cast<Scalar>(opts.step_frac);
  std::ostream& log = opts.log ? *opts.log : std::cerr;

  BlockMatrix<Scalar> c = detail::zero_blocks(p);
  detail::accumulate(c, p.c, Scalar(1));
  const Scalar b_scale = Scalar(1) + (m ? p.b.cwiseAbs().maxCoeff() : Scalar(0));
  const Scalar c_scale = Scalar(1) + detail::max_abs(c);

  Eigen::Index n_total = 0;
  for (std::size_t k = 0; k < nb; ++k) n_total += p.block_dim(k);

  const Scalar eta = detail::initial_scale(p);
  BlockMatrix<Scalar> x_mat = detail::zero_blocks(p);
  BlockMatrix<Scalar> s_mat = detail::zero_blocks(p);
  for (std::size_t k = 0; k < nb; ++k) {
    x_mat[k].diagonal().setConstant(eta);
    s_mat[k].diagonal().setConstant(eta);
  }
  Vector<Scalar> y = Vector<Scalar>::Zero(m);

  // Constraint entries grouped by block, for the Schur complement.
  struct Entry {
    int row, col;
    Scalar value;
  };
  std::vector<std::vector<std::vector<Entry>>> by_block(m, std::vector<std::vector<Entry>>(nb));
  for (int k = 0; k < m; ++k)
    for (const auto& e : p.a[k].entries()) by_block[k][e.block].push_back({e.row, e.col, e.value});

  SDPSolution<Scalar> sol;
  struct Best {
    Scalar merit = std::numeric_limits<Scalar>::infinity();
    BlockMatrix<Scalar> x, s;
    Vector<Scalar> y;
    Scalar pinf = 0, dinf = 0, gap = 0;
  } best;
  auto finish = [&](SolveStatus status, int iterations) {
    if (status != SolveStatus::optimal && std::isfinite(best.merit)) {
      x_mat = best.x;
      s_mat = best.s;
      y = best.y;
      sol.primal_residual = best.pinf;
      sol.dual_residual = best.dinf;
      sol.gap = best.gap;
    }
    sol.status = status;
    sol.iterations = iterations;
    const Scalar pobj = -inner(c, x_mat);
    const Scalar dobj = m ? p.b.dot(y) : Scalar(0);
    sol.primal_value = p.form == SdpForm::standard ? pobj : dobj;
    sol.dual_value = p.form == SdpForm::standard ? dobj : pobj;
    sol.z = x_mat;
    sol.s = s_mat;
    sol.x = y;
    return sol;
  };

  BlockMatrix<Scalar> s_inv(nb), rd(nb), xrds(nb);
  Matrix<Scalar> schur(m, m);
  Eigen::LLT<Matrix<Scalar>> schur_llt;

  for (int iter = 0;; ++iter) {
    const Vector<Scalar> ax = detail::apply_constraints(p, x_mat);
    const Vector<Scalar> rp = m ? Vector<Scalar>(p.b - ax) : Vector<Scalar>();
    BlockMatrix<Scalar> aty = affine_combination(p, y, true);
    for (std::size_t k = 0; k < nb; ++k) rd[k] = aty[k] - s_mat[k];

    const Scalar pobj = -inner(c, x_mat);
    const Scalar dobj = m ? p.b.dot(y) : Scalar(0);
    const Scalar mu = inner(x_mat, s_mat) / static_cast<Scalar>(n_total);
    sol.primal_residual = (m ? rp.cwiseAbs().maxCoeff() : Scalar(0)) / b_scale;
    sol.dual_residual = detail::max_abs(rd) / c_scale;
    sol.gap = std::abs(dobj - pobj) / (Scalar(1) + std::abs(pobj) + std::abs(dobj));
    if (const Scalar merit = std::max({sol.primal_residual, sol.dual_residual, sol.gap}); merit < best.merit)
      best = {merit, x_mat, s_mat, y, sol.primal_residual, sol.dual_residual, sol.gap};

    IterationRecord<Scalar> rec{iter, mu, pobj, dobj, sol.primal_residual, sol.dual_residual, 0, 0};
    if (opts.verbose)
      log << std::setw(4) << iter << std::scientific << std::setprecision(3) << "  mu " << mu << "  pobj "
          << std::setprecision(10) << pobj << "  dobj " << dobj << std::setprecision(2) << "  pinf "
          << sol.primal_residual << "  dinf " << sol.dual_residual << "  gap " << sol.gap << std::defaultfloat
          << "\n";

    if (sol.primal_residual <= tol && sol.dual_residual <= tol && sol.gap <= tol) {
      sol.history.push_back(rec);
      return finish(SolveStatus::optimal, iter);
    }
    if (iter >= opts.max_iter) {
      sol.history.push_back(rec);
      return finish(SolveStatus::max_iterations, iter);
    }

    for (std::size_t k = 0; k < nb; ++k) {
      Eigen::LLT<Matrix<Scalar>> llt(s_mat[k]);
      if (llt.info() != Eigen::Success) {
        sol.history.push_back(rec);
        if (opts.verbose) log << "numerical failure: slack matrix lost definiteness\n";
        return finish(SolveStatus::numerical_failure, iter);
      }
      s_inv[k] = llt.solve(Matrix<Scalar>::Identity(s_mat[k].rows(), s_mat[k].cols()));
      s_inv[k] = (s_inv[k] + s_inv[k].transpose()).eval() / Scalar(2);
      xrds[k] = x_mat[k] * rd[k] * s_inv[k];
    }

    // Schur complement H_kl = <A_k, X A_l S^-1>.
    {
      BlockMatrix<Scalar> w = detail::zero_blocks(p);
      for (int l = 0; l < m; ++l) {
        for (std::size_t k = 0; k < nb; ++k) {
          if (by_block[l][k].empty()) continue;
          w[k].setZero();
          for (const auto& e : by_block[l][k]) {
            w[k].noalias() += e.value * x_mat[k].col(e.row) * s_inv[k].row(e.col);
            if (e.row != e.col) w[k].noalias() += e.value * x_mat[k].col(e.col) * s_inv[k].row(e.row);
          }
        }
        for (int kk = 0; kk < m; ++kk) {
          Scalar sum = 0;
          for (std::size_t k = 0; k < nb; ++k) {
            if (by_block[l][k].empty()) continue;
            for (const auto& e : by_block[kk][k])
              sum += e.row == e.col ? e.value * w[k](e.row, e.row)
                                    : e.value * (w[k](e.row, e.col) + w[k](e.col, e.row));
          }
          schur(kk, l) = sum;
        }
      }
      schur = ((schur + schur.transpose()) / Scalar(2)).eval();
    }
    if (m > 0) {
      // 1e-12 .. 1e-8, measured against the Schur diagonal once that grows
      // past 1e4 so the shift stays above rounding as mu -> 0.
      const Scalar unit = std::max<Scalar>(Scalar(1), Scalar(1e-4) * schur.diagonal().cwiseAbs().maxCoeff());
      bool factored = false;
      for (Scalar reg = Scalar(1e-12); reg <= Scalar(1.0001e-8); reg *= 10) {
        Matrix<Scalar> h = schur;
        h.diagonal().array() += reg * unit;
        schur_llt.compute(h);
        if (schur_llt.info() == Eigen::Success) {
          factored = true;
          break;
        }
      }
      if (!factored) {
        sol.history.push_back(rec);
        if (opts.verbose) log << "numerical failure: Schur complement not positive definite\n";
        return finish(SolveStatus::numerical_failure, iter);
      }
    }

    // One Newton solve: target sigma*mu, second-order term `corr` (may be empty).
    auto direction = [&](Scalar target, const BlockMatrix<Scalar>* corr, Vector<Scalar>& dy, BlockMatrix<Scalar>& dx,
                         BlockMatrix<Scalar>& ds) {
      BlockMatrix<Scalar> r(nb);
      for (std::size_t k = 0; k < nb; ++k) {
        r[k] = target * s_inv[k] - xrds[k];
        if (corr) r[k] -= (*corr)[k] * s_inv[k];
      }
      if (m > 0) {
        const Vector<Scalar> rhs = detail::apply_constraints(p, r) - p.b;
        dy = schur_llt.solve(rhs);
        // The factor may carry regularisation; refine against H itself.
        for (int pass = 0; pass < 3; ++pass) dy += schur_llt.solve(rhs - schur * dy);
      } else {
        dy.resize(0);
      }
      ds = affine_combination(p, dy, false);
      dx.resize(nb);
      for (std::size_t k = 0; k < nb; ++k) {
        ds[k] += rd[k];
        Matrix<Scalar> t = target * s_inv[k] - x_mat[k] * ds[k] * s_inv[k];
        if (corr) t -= (*corr)[k] * s_inv[k];
        dx[k] = (t + t.transpose()) / Scalar(2) - x_mat[k];
      }
    };

    bool ok = true;
    Vector<Scalar> dy_a;
    BlockMatrix<Scalar> dx_a, ds_a;
    direction(Scalar(0), nullptr, dy_a, dx_a, ds_a);
    const Scalar ap_a = std::min<Scalar>(Scalar(1), detail::max_step(x_mat, dx_a, ok));
    const Scalar ad_a = std::min<Scalar>(Scalar(1), detail::max_step(s_mat, ds_a, ok));
    if (!ok) {
      sol.history.push_back(rec);
      if (opts.verbose) log << "numerical failure: predictor step failed\n";
      return finish(SolveStatus::numerical_failure, iter);
    }
    Scalar mu_aff = 0;
    for (std::size_t k = 0; k < nb; ++k)
      mu_aff += (x_mat[k] + ap_a * dx_a[k]).cwiseProduct(s_mat[k] + ad_a * ds_a[k]).sum();
    mu_aff /= static_cast<Scalar>(n_total);
    Scalar sigma = mu > 0 ? std::pow(std::max<Scalar>(mu_aff, Scalar(0)) / mu, Scalar(3)) : Scalar(0);
    sigma = std::clamp<Scalar>(sigma, Scalar(0), Scalar(1));

    BlockMatrix<Scalar> corr(nb);
    for (std::size_t k = 0; k < nb; ++k) corr[k] = dx_a[k] * ds_a[k];
    Vector<Scalar> dy;
    BlockMatrix<Scalar> dx, ds;
    direction(sigma * mu, &corr, dy, dx, ds);
    Scalar ap = std::min<Scalar>(Scalar(1), frac * detail::max_step(x_mat, dx, ok));
    Scalar ad = std::min<Scalar>(Scalar(1), frac * detail::max_step(s_mat, ds, ok));
    if (ok && std::min(ap, ad) < Scalar(0.1)) {
      // Blocked near the boundary: fall back to a well-centred step.
      direction(std::max<Scalar>(sigma, Scalar(0.5)) * mu, nullptr, dy, dx, ds);
      ap = std::min<Scalar>(Scalar(1), frac * detail::max_step(x_mat, dx, ok));
      ad = std::min<Scalar>(Scalar(1), frac * detail::max_step(s_mat, ds, ok));
    }
    if (!ok) {
      sol.history.push_back(rec);
      if (opts.verbose) log << "numerical failure: corrector step failed\n";
      return finish(SolveStatus::numerical_failure, iter);
    }
    rec.primal_step = ap;
    rec.dual_step = ad;
    if (opts.verbose) log << "      steps " << ap << " " << ad << " sigma " << sigma << "\n";
    sol.history.push_back(rec);

    for (std::size_t k = 0; k < nb; ++k) {
      x_mat[k] += ap * dx[k];
      s_mat[k] += ad * ds[k];
      x_mat[k] = ((x_mat[k] + x_mat[k].transpose()) / Scalar(2)).eval();
      s_mat[k] = ((s_mat[k] + s_mat[k].transpose()) / Scalar(2)).eval();
    }
    if (m > 0) y += ad * dy;
  }
}

}  // namespace ncsos
