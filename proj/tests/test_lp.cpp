#include <random>

#include <gtest/gtest.h>

#include "clfsyn/lp.hpp"

using namespace clfsyn;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Brute-force optimum of max c^T x over a bounded 2-D polygon G x <= h by
// enumerating pairwise row intersections.
double brute_force_max(const MatrixXd& G, const VectorXd& h, const VectorXd& c, bool& feasible) {
  double best = -1e300;
  feasible = false;
  for (Eigen::Index i = 0; i < G.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < G.rows(); ++j) {
      Eigen::Matrix2d M;
      M << G.row(i), G.row(j);
      if (std::abs(M.determinant()) < 1e-12) continue;
      const Eigen::Vector2d x = M.partialPivLu().solve(Eigen::Vector2d(h[i], h[j]));
      if (((G * x - h).array() <= 1e-9).all()) {
        feasible = true;
        best = std::max(best, c.dot(x));
      }
    }
  }
  return best;
}

}  // namespace

TEST(Lp, InequalityFormMatchesVertexEnumeration) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> d(-1, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const int extra = 3;
    MatrixXd G(4 + extra, 2);
    VectorXd h(4 + extra);
    G.topRows(4) << 1, 0, -1, 0, 0, 1, 0, -1;
    h.head(4).setConstant(2.0);
    for (int k = 0; k < extra; ++k) {
      G(4 + k, 0) = d(rng);
      G(4 + k, 1) = d(rng);
      h[4 + k] = d(rng);
    }
    VectorXd c(2);
    c << d(rng), d(rng);
    bool feasible = false;
    const double want = brute_force_max(G, h, c, feasible);
    const LpResult r = solve_inequality_lp(G, h, c);
    if (!feasible) {
      EXPECT_EQ(r.status, LpStatus::kInfeasible);
      continue;
    }
    ASSERT_EQ(r.status, LpStatus::kOptimal);
    EXPECT_NEAR(r.value, want, 1e-8);
    EXPECT_TRUE(((G * r.x - h).array() <= 1e-8).all());
  }
}

TEST(Lp, DetectsUnbounded) {
  MatrixXd G(1, 2);
  G << -1, 0;
  const LpResult r = solve_inequality_lp(G, VectorXd::Zero(1), VectorXd::Ones(2));
  EXPECT_EQ(r.status, LpStatus::kUnbounded);
}

TEST(Lp, StandardFormSmallExample) {
  // min -x1 - 2 x2 s.t. x1 + x2 + s1 = 4, x2 + s2 = 3.
  MatrixXd A(2, 4);
  A << 1, 1, 1, 0, 0, 1, 0, 1;
  VectorXd b(2), c(4);
  b << 4, 3;
  c << -1, -2, 0, 0;
  const LpResult r = solve_standard_lp(A, b, c);
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_NEAR(r.value, -7.0, 1e-10);
  EXPECT_NEAR(r.x[0], 1.0, 1e-10);
  EXPECT_NEAR(r.x[1], 3.0, 1e-10);
}

TEST(Lp, PolytopeVerticesOfSquare) {
  MatrixXd A(4, 2);
  A << 1, 0, -1, 0, 0, 1, 0, -1;
  const auto v = polytope_vertices(A, VectorXd::Constant(4, -1.0));
  ASSERT_EQ(v.size(), 4u);
  for (const auto& p : v) EXPECT_DOUBLE_EQ(p.cwiseAbs().sum(), 2.0);
}

TEST(Qp, ExactProjectionAgreesWithDykstra) {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> d(-1, 1);
  for (int trial = 0; trial < 50; ++trial) {
    MatrixXd A(5, 2);
    VectorXd b(5);
    A.topRows(4) << 1, 0, -1, 0, 0, 1, 0, -1;
    b.head(4).setConstant(-1.0);
    A(4, 0) = d(rng);
    A(4, 1) = d(rng);
    b[4] = -0.2;  // keeps the origin feasible
    VectorXd t(2);
    t << 3 * d(rng), 3 * d(rng);
    const QpResult exact = project_onto_polyhedron_exact(t, -A, -b);
    ASSERT_TRUE(exact.feasible);
    const VectorXd dy = dykstra_projection(t, A, b);
    EXPECT_NEAR((exact.x - dy).norm(), 0.0, 1e-6);
  }
}

TEST(Qp, InfeasibleReported) {
  MatrixXd G(2, 1);
  G << 1, -1;
  VectorXd h(2);
  h << -1, -1;  // u <= -1 and u >= 1
  EXPECT_FALSE(project_onto_polyhedron_exact(VectorXd::Zero(1), G, h).feasible);
}
