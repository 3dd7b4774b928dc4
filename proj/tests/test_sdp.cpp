#include <random>

#include <gtest/gtest.h>

#include "clfsyn/lp.hpp"
#include "clfsyn/sdp.hpp"

using namespace clfsyn;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// max t s.t. M - t I PSD; optimum is the smallest eigenvalue of M.
SdpProblem min_eig_problem(const MatrixXd& M) {
  SdpProblem p;
  p.num_vars = 1;
  const int n = static_cast<int>(M.rows());
  const int k = p.add_block(n);
  p.blocks[k].constant = M;
  for (int i = 0; i < n; ++i) p.add_coefficient(k, 0, i, i, 1.0);
  p.objective = VectorXd::Ones(1);
  return p;
}

}  // namespace

TEST(Sdp, SmallestEigenvalue) {
  std::mt19937 rng(7);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 10; ++trial) {
    MatrixXd A(5, 5);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) A(i, j) = nd(rng);
    MatrixXd M = A + A.transpose();
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(M);
    const double lam = es.eigenvalues()[0];
    auto p = min_eig_problem(M);
    VectorXd y0 = VectorXd::Constant(1, lam - 1.0);
    auto res = solve_sdp(p, y0);
    ASSERT_EQ(res.status, SdpStatus::kOptimal);
    EXPECT_NEAR(res.y[0], lam, 1e-7);
    EXPECT_NEAR(res.primal_objective, lam, 1e-7);
  }
}

TEST(Sdp, OffDiagonalBound) {
  // max y s.t. [[1, y], [y, 1]] PSD  ->  y = 1.
  SdpProblem p;
  p.num_vars = 1;
  const int k = p.add_block(2);
  p.blocks[k].constant = MatrixXd::Identity(2, 2);
  p.add_coefficient(k, 0, 0, 1, -1.0);
  p.objective = VectorXd::Ones(1);
  auto res = solve_sdp(p, VectorXd::Zero(1));
  ASSERT_EQ(res.status, SdpStatus::kOptimal);
  EXPECT_NEAR(res.y[0], 1.0, 1e-7);
}

TEST(Sdp, DiagonalBlockMatchesSimplex) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int nv = 3;
    const int rows = 12;
    MatrixXd G(rows + 2 * nv, nv);
    VectorXd h(rows + 2 * nv);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < nv; ++j) G(i, j) = ud(rng);
      h[i] = 1.0 + ud(rng) * 0.5;
    }
    G.bottomRows(2 * nv) << MatrixXd::Identity(nv, nv), -MatrixXd::Identity(nv, nv);
    h.tail(2 * nv).setConstant(2.0);
    VectorXd c(nv);
    for (int j = 0; j < nv; ++j) c[j] = ud(rng);

    SdpProblem p;
    p.num_vars = nv;
    const int k = p.add_block(static_cast<int>(G.rows()), true);
    p.blocks[k].constant = h;
    for (int i = 0; i < G.rows(); ++i)
      for (int j = 0; j < nv; ++j) p.add_coefficient(k, j, i, i, G(i, j));
    p.objective = c;
    auto res = solve_sdp(p, VectorXd::Zero(nv));
    ASSERT_EQ(res.status, SdpStatus::kOptimal);
    auto lp = solve_inequality_lp(G, h, c);
    ASSERT_EQ(lp.status, LpStatus::kOptimal);
    EXPECT_NEAR(c.dot(res.y), lp.value, 1e-6);
  }
}

TEST(Sdp, DualIteratesStayFeasible) {
  MatrixXd M(3, 3);
  M << 2, 1, 0, 1, 2, 1, 0, 1, 2;
  auto p = min_eig_problem(M);
  SdpOptions opt;
  opt.stop = [&](const SdpIterate& it) {
    EXPECT_GT(p.min_slack_eigenvalue(*it.y), 0.0);
    return false;
  };
  solve_sdp(p, VectorXd::Constant(1, -5.0), opt);
}

TEST(Sdp, InfeasibleStartThrows) {
  auto p = min_eig_problem(MatrixXd::Identity(2, 2));
  EXPECT_THROW(solve_sdp(p, VectorXd::Constant(1, 2.0)), std::exception);
}
