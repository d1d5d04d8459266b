#pragma once

// Dual ADMM for small standard-form SDPs (Wen, Goldfarb, Yin). Slow but
// simple, and shares no code with the interior point solver, so the two can
// referee each other.

#include <Eigen/Dense>
#include <vector>

namespace oracle {

struct AdmmResult {
  double objective = 0.0;  // max -<C, X>
  Eigen::MatrixXd x;
  double primal_residual = 0.0;
  int iterations = 0;
};

inline Eigen::MatrixXd psd_part(const Eigen::MatrixXd& v) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(v);
  const Eigen::VectorXd d = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * d.asDiagonal() * eig.eigenvectors().transpose();
}

/// max -<C, X>  s.t.  <A_k, X> = b_k, X >= 0, with one dense block.
inline AdmmResult admm(const Eigen::MatrixXd& c, const std::vector<Eigen::MatrixXd>& a, const Eigen::VectorXd& b,
                       int max_iter = 100000, double tol = 1e-9) {
  const int m = static_cast<int>(a.size());
  const Eigen::Index n = c.rows();
  Eigen::MatrixXd gram(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) gram(i, j) = (a[i].array() * a[j].array()).sum();
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);

  auto op = [&](const Eigen::MatrixXd& x) {
    Eigen::VectorXd v(m);
    for (int k = 0; k < m; ++k) v[k] = (a[k].array() * x.array()).sum();
    return v;
  };
  auto adj = [&](const Eigen::VectorXd& y) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < m; ++k) out += y[k] * a[k];
    return out;
  };

  // Minimise <C, X>; its dual is max b^T y s.t. C - A*(y) = S >= 0.
  Eigen::MatrixXd x = Eigen::MatrixXd::Identity(n, n), s = Eigen::MatrixXd::Identity(n, n);
  double mu = 1.0;
  AdmmResult r;
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd y = -ldlt.solve(mu * (op(x) - b) + op(s - c));
    const Eigen::MatrixXd v = c - adj(y) - mu * x;
    s = psd_part(v);
    x = (s - v) / mu;
    r.iterations = it + 1;
    const double pinf = (op(x) - b).norm() / (1 + b.norm());
    const double dinf = (c - adj(y) - s).norm() / (1 + c.norm());
    const double gap = std::abs((c.array() * x.array()).sum() - b.dot(y)) / (1 + std::abs(b.dot(y)));
    if (pinf < tol && dinf < tol && gap < tol) break;
  }
  r.x = x;
  r.objective = -(c.array() * x.array()).sum();
  r.primal_residual = (op(x) - b).norm();
  return r;
}

}  // namespace oracle
