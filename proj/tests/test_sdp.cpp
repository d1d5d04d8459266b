#include <doctest.h>

#include <algorithm>
#include <random>

#include "ncsos/hierarchy.hpp"
#include "ncsos/sdp.hpp"
#include "support/admm.hpp"

using namespace ncsos;

namespace {

Eigen::MatrixXd random_symmetric(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = normal(rng);
  return (m + m.transpose()) / 2;
}

Eigen::MatrixXd random_pd(int n, std::mt19937_64& rng) {
  const Eigen::MatrixXd g = random_symmetric(n, rng);
  return g * g.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
}

SparseSymMatrix<double> sparse(const Eigen::MatrixXd& m) {
  SparseSymMatrix<double> out;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = i; j < m.cols(); ++j)
      if (m(i, j) != 0) out.add(0, i, j, m(i, j));
  out.compress();
  return out;
}

struct Instance {
  SDPProblem<double> problem;
  Eigen::MatrixXd c;
  std::vector<Eigen::MatrixXd> a;
  Eigen::VectorXd b;
};

/// Strictly feasible on both sides by construction, so the optimum is attained.
Instance random_instance(int n, int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Instance in;
  in.a.resize(m);
  for (auto& ak : in.a) ak = random_symmetric(n, rng);
  const Eigen::MatrixXd z0 = random_pd(n, rng), s0 = random_pd(n, rng);
  Eigen::VectorXd x0(m);
  std::normal_distribution<double> normal;
  for (int k = 0; k < m; ++k) x0[k] = normal(rng);
  in.b.resize(m);
  for (int k = 0; k < m; ++k) in.b[k] = (in.a[k].array() * z0.array()).sum();
  in.c = s0;
  for (int k = 0; k < m; ++k) in.c -= x0[k] * in.a[k];

  in.problem.block_sizes = {n};
  in.problem.c = sparse(in.c);
  for (const auto& ak : in.a) in.problem.a.push_back(sparse(ak));
  in.problem.b = in.b;
  return in;
}

}  // namespace

TEST_CASE("interior point agrees with an ADMM reference on random 6x6 problems") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Instance in = random_instance(6, 3 + static_cast<int>(seed % 5), seed);
    const auto sol = solve(in.problem);
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(sol.primal_value == doctest::Approx(sol.dual_value).epsilon(1e-7));
    const auto ref = oracle::admm(in.c, in.a, in.b);
    CHECK(ref.primal_residual < 1e-6);
    CHECK(sol.primal_value == doctest::Approx(ref.objective).epsilon(1e-5));
  }
}

TEST_CASE("weak duality on the returned pair") {
  const Instance in = random_instance(6, 4, 99);
  const auto sol = solve(in.problem);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.dual_value >= sol.primal_value - 1e-7);
  CHECK(sol.primal_residual < 1e-7);
  CHECK(sol.dual_residual < 1e-7);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ez(sol.z[0]), es(sol.s[0]);
  CHECK(ez.eigenvalues().minCoeff() > -1e-9);
  CHECK(es.eigenvalues().minCoeff() > -1e-9);
}

TEST_CASE("translate flips the form and keeps the optimum") {
  const Instance in = random_instance(5, 3, 7);
  const auto flipped = translate(in.problem);
  CHECK(flipped.form == SdpForm::inequality);
  CHECK(translate(flipped) == in.problem);
  const auto a = solve(in.problem), b = solve(flipped);
  CHECK(a.primal_value == doctest::Approx(b.dual_value).epsilon(1e-7));
  CHECK(a.dual_value == doctest::Approx(b.primal_value).epsilon(1e-7));
}

TEST_CASE("dependent constraints are dropped") {
  Instance in = random_instance(4, 3, 3);
  SparseSymMatrix<double> twice;
  for (const auto& e : in.problem.a[0].entries()) twice.add(e.block, e.row, e.col, 2 * e.value);
  twice.compress();
  in.problem.a.push_back(twice);
  in.problem.b.conservativeResize(4);
  in.problem.b[3] = 2 * in.problem.b[0];
  std::vector<int> kept;
  CHECK(drop_dependent_constraints(in.problem, 1e-10, &kept) == 1);
  CHECK(kept == std::vector<int>{0, 1, 2});
}

TEST_CASE("SDPA text round-trips exactly") {
  const Game g = builtin("i3322");
  const auto p = build_sos_sdp(g, generate_basis(g, LevelSpec::parse("1+AB")));
  const auto back = read_sdpa(write_sdpa(p.sdp));
  CHECK(back == p.sdp);
  const auto moment = build_moment_sdp(g, generate_basis(g, LevelSpec::full(1)));
  CHECK(read_sdpa(write_sdpa(moment.sdp)) == translate(moment.sdp));
}

TEST_CASE("SDPA reader accepts comments and punctuation") {
  const char* text =
      "\" a comment\n* another\n2 =mdim\n1 =nblocks\n{2}\n(1.0, 1.0)\n"
      "0 1 1 1 1\n0 1 2 2 1\n1 1 1 1 1\n2 1 2 2 1\n";
  const auto p = read_sdpa(text);
  CHECK(p.num_constraints() == 2);
  CHECK(p.block_sizes == std::vector<int>{2});
  // minimise x1 + x2 s.t. diag(x1 - 1, x2 - 1) >= 0.
  const auto sol = solve(p);
  CHECK(sol.primal_value == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("SDPA reader reports the failing line") {
  auto line_of = [](const std::string& text) {
    try {
      read_sdpa(text);
    } catch (const ParseError& e) {
      return static_cast<int>(e.line());
    }
    return -1;
  };
  CHECK(line_of("2\n1\n2\n1 1\n0 1 1 1 x\n") == 5);
  CHECK(line_of("2\n1\n2\n1 1\n0 2 1 1 1\n") == 5);
  CHECK(line_of("2\n1\n2\n1 1\n0 1 3 1 1\n") == 5);
  CHECK(line_of("2\n") > 0);
}

TEST_CASE("solver options parse key=value pairs") {
  SolverOptions o;
  o.set("tol=1e-6");
  o.set("max_iter=50");
  CHECK(o.tol == 1e-6);
  CHECK(o.max_iter == 50);
  CHECK_THROWS_AS(o.set("bogus=1"), Error);
  CHECK_THROWS_AS(o.set("tol"), Error);
}

TEST_CASE("scalar problem and its dual") {
  // minimise x s.t. x - 2.5 >= 0
  SDPProblem<double> p;
  p.form = SdpForm::inequality;
  p.block_sizes = {1};
  p.c.add(0, 0, 0, -2.5);
  p.c.compress();
  SparseSymMatrix<double> a;
  a.add(0, 0, 0, 1.0);
  a.compress();
  p.a.push_back(a);
  p.b = Eigen::VectorXd::Constant(1, 1.0);
  const auto sol = solve(p);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.primal_value == doctest::Approx(2.5).epsilon(1e-8));
  CHECK(sol.x[0] == doctest::Approx(2.5).epsilon(1e-8));
  const auto dual = solve(translate(p));
  REQUIRE(dual.status == SolveStatus::optimal);
  CHECK(dual.primal_value == doctest::Approx(2.5).epsilon(1e-8));

  const std::string text = write_sdpa(p);
  // counts, block sizes, cost, then one entry each for F0 and F1
  CHECK(std::count(text.begin(), text.end(), '\n') == 6);
  CHECK(text == write_sdpa(read_sdpa(text)));
  CHECK(read_sdpa(text) == p);
}

TEST_CASE("identical inputs give identical iterates") {
  const Instance in = random_instance(6, 5, 11);
  const auto a = solve(in.problem), b = solve(in.problem);
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].mu == b.history[i].mu);
    CHECK(a.history[i].primal_objective == b.history[i].primal_objective);
    CHECK(a.history[i].dual_objective == b.history[i].dual_objective);
  }
  CHECK(a.x == b.x);
}

TEST_CASE("double translate of CHSH keeps the optimum") {
  const Game g = builtin("chsh-correlator");
  const auto p = build_moment_sdp(g, generate_basis(g, LevelSpec::full(1)));
  const auto once = solve(p.sdp), twice = solve(translate(translate(p.sdp)));
  REQUIRE(once.status == SolveStatus::optimal);
  REQUIRE(twice.status == SolveStatus::optimal);
  CHECK(std::abs(once.primal_value - twice.primal_value) <= 1e-8);
}

TEST_CASE("duality gap shrinks along the path") {
  const Instance in = random_instance(6, 4, 21);
  const auto sol = solve(in.problem);
  REQUIRE(sol.status == SolveStatus::optimal);
  REQUIRE(sol.history.size() > 2);
  CHECK(sol.history.back().mu < sol.history.front().mu * 1e-6);
}
