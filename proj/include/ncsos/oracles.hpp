#pragma once

// Independent references for the relaxation: exact classical values by
// enumeration, quantum lower bounds by see-saw at fixed local dimension, and
// random valid operator assignments for checking the rewrite rules.

#include <complex>
#include <cstdint>
#include <map>
#include <vector>

#include "ncsos/games.hpp"
#include "ncsos/nc_algebra.hpp"

namespace ncsos {

using Complex = std::complex<double>;
using ComplexMatrix = DenseMatrix<Complex>;

/// Deterministic strategy: choice[party][setting] is an outcome index
/// (observable mode: 0 for +1, 1 for -1).
using DeterministicStrategy = std::vector<std::vector<int>>;

/// Value of a deterministic strategy, offset included.
double strategy_value(const Game& g, const DeterministicStrategy& s);

/// Exact classical maximum. Throws Error when the strategy space exceeds 1e7.
double classical_value(const Game& g);

/// Local operators of every party, each d x d, plus a state on (C^d)^N.
struct SeeSawState {
  int dim = 0;
  std::map<Generator, ComplexMatrix> local;
  Eigen::VectorXcd state;
};

struct SeeSawResult {
  double value = 0.0;          // certified by direct evaluation
  SeeSawState best;
  std::vector<double> trace;   // objective after each sweep of the best restart
  int restarts = 0;
};

/// Alternating best responses (state, then each party in turn) from `restarts`
/// random starting points. Stops a run when a sweep gains <= 1e-10 or after
/// 500 sweeps.
SeeSawResult seesaw(const Game& g, int dim, int restarts, std::uint64_t seed);
double seesaw_lower_bound(const Game& g, int dim, int restarts, std::uint64_t seed);

/// <psi| B |psi> + offset for the strategy.
double evaluate(const Game& g, const SeeSawState& s);

/// Embeds local operators into the product space (C^d)^N, party 0 leftmost.
Assignment<Complex> embed(const Game& g, const SeeSawState& s);

/// Haar-random local measurements of dimension d, embedded into (C^d)^N:
/// projectors U P_a U^dag over a rotated rank pattern, or observables
/// U diag(+-1) U^dag. Same seed, same matrices.
Assignment<Complex> random_valid_assignment(const Game& g, int dim, std::uint64_t seed);

/// Haar-distributed d x d unitary.
template <typename Rng>
ComplexMatrix haar_unitary(int d, Rng& rng);

}  // namespace ncsos
