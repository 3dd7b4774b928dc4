#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "clfsyn/verifier.hpp"
#include "test_support.hpp"

using namespace clfsyn;
using clfsyn::testing::make_problem;
using clfsyn::testing::poly;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

InputPolytope unit_interval() {
  return interval_input_polytope(VectorXd::Constant(1, -1.0), VectorXd::Constant(1, 1.0));
}

// Rank-one witness y_a = x^a.
MomentWitness point_witness(const VectorXd& x, int order) {
  MomentWitness w;
  w.order = order;
  w.nvars = static_cast<std::size_t>(x.size());
  w.moments = monomial_basis(w.nvars, 2 * order);
  w.y.resize(static_cast<Eigen::Index>(w.moments.size()));
  for (std::size_t i = 0; i < w.moments.size(); ++i) w.y[static_cast<Eigen::Index>(i)] = w.moments[i].eval(x);
  return w;
}

ProblemInstance scalar_input() { return make_problem(1, {"0"}, {{"1"}}, {"x1^2", "x1"}); }

// Witness checks shared by every returned counterexample.
void expect_well_formed(const MomentWitness& w) {
  EXPECT_NEAR(w.y[0], 1.0, 1e-12);
  const MatrixXd Z = w.moment_matrix();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(Z);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8 * std::max(1.0, Z.norm()));
  const auto basis = w.basis();
  for (std::size_t a = 0; a < basis.size(); ++a) {
    for (std::size_t b = 0; b < basis.size(); ++b) {
      for (std::size_t c = 0; c < basis.size(); ++c) {
        for (std::size_t d = 0; d < basis.size(); ++d) {
          if (basis[a] * basis[b] == basis[c] * basis[d]) {
            EXPECT_EQ(Z(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)),
                      Z(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(d)));
          }
        }
      }
    }
  }
}

}  // namespace

TEST(Farkas, HandExamples) {
  const auto U = unit_interval();
  auto r = farkas_feasible(2.0, VectorXd::Constant(1, 1.0), U);
  EXPECT_TRUE(r.feasible);
  ASSERT_EQ(r.lambda.size(), 2);
  EXPECT_GE(r.lambda.minCoeff(), -1e-12);
  // A^T lambda = a with A = [1; -1].
  EXPECT_NEAR(r.lambda[0] - r.lambda[1], 1.0, 1e-9);
  EXPECT_FALSE(farkas_feasible(0.5, VectorXd::Constant(1, 1.0), U).feasible);
  r = farkas_feasible(0.0, VectorXd::Zero(1), U);
  EXPECT_TRUE(r.feasible);
  EXPECT_LE(r.lambda.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Farkas, AgreesWithVertexEnumeration) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> d(-2, 2);
  std::uniform_int_distribution<int> dim(1, 3);
  for (int trial = 0; trial < 500; ++trial) {
    const int m = dim(rng);
    VectorXd lo(m), hi(m), a(m);
    for (int i = 0; i < m; ++i) {
      const double p = d(rng), q = d(rng);
      lo[i] = std::min(p, q) - 0.05;
      hi[i] = std::max(p, q) + 0.05;
      a[i] = d(rng);
    }
    const auto U = interval_input_polytope(lo, hi);
    double a0 = d(rng);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& v : U.vertices()) best = std::min(best, a0 + a.dot(v));
    // Stay clear of the exact tie, where round-off decides either way.
    if (std::abs(best) < 1e-7) continue;
    EXPECT_EQ(farkas_feasible(a0, a, U).feasible, best >= 0.0) << "trial " << trial;
  }
}

TEST(Verifier, SumOfSquaresIsPositive) {
  const auto p = make_problem(2, {"x2", "0"}, {{"0", "1"}}, {"x1^2", "x1*x2", "x2^2"});
  const auto V = poly(p, "x1^2 + x2^2");
  EXPECT_TRUE(check_positivity(V, p, default_verifier_config(p)).valid);
  for (int i = 0; i <= 100; ++i) {
    for (int j = 0; j <= 100; ++j) {
      VectorXd x(2);
      x << -1.0 + 0.02 * i, -1.0 + 0.02 * j;
      if (x.norm() >= p.exclusion_radius) EXPECT_GT(V.eval(x), 0.0);
    }
  }
}

TEST(Verifier, NegativeSquareHasPositivityCounterexample) {
  const auto p = make_problem(2, {"x2", "0"}, {{"0", "1"}}, {"x1^2", "x1*x2", "x2^2"});
  const auto V = poly(p, "-x1^2");
  const Verdict v = check_positivity(V, p, default_verifier_config(p));
  ASSERT_FALSE(v.valid);
  ASSERT_TRUE(v.witness.has_value());
  EXPECT_EQ(v.witness->kind, WitnessKind::kPositivity);
  expect_well_formed(*v.witness);
  EXPECT_LE(V.eval(project(*v.witness, p.safe_box)), 0.0);
}

TEST(Verifier, IndefiniteQuadraticCounterexampleSign) {
  const auto p = make_problem(2, {"x2", "0"}, {{"0", "1"}}, {"x1^2", "x1*x2", "x2^2"});
  const auto V = poly(p, "x1^2 - 2*x2^2");
  const Verdict v = check_positivity(V, p, default_verifier_config(p));
  ASSERT_FALSE(v.valid);
  expect_well_formed(*v.witness);
  // The relaxation gives L(V) <= 0, i.e. L(x1^2) <= 2 L(x2^2).
  EXPECT_LE(v.witness->riesz(V), 1e-7);
  const VectorXd x = project(*v.witness, p.safe_box);
  if (x.norm() > 1e-6) EXPECT_GT(std::abs(x[1]), std::abs(x[0]) / std::sqrt(2.0) - 1e-6);
}

TEST(Verifier, ZeroCandidateFailsPositivity) {
  const auto p = make_problem(2, {"x2", "0"}, {{"0", "1"}}, {"x1^2", "x1*x2", "x2^2"});
  const Verdict v = verify(Polynomial(2), p, default_verifier_config(p));
  ASSERT_FALSE(v.valid);
  EXPECT_EQ(v.witness->kind, WitnessKind::kPositivity);
}

TEST(Verifier, ScalarIntegratorDecrease) {
  const auto p = scalar_input();
  const auto cfg = default_verifier_config(p);
  // V = x1 decreases under u = -1 everywhere but is not positive.
  EXPECT_TRUE(check_decrease(poly(p, "x1"), p, cfg).valid);
  const Verdict pos = check_positivity(poly(p, "x1"), p, cfg);
  ASSERT_FALSE(pos.valid);
  EXPECT_LT(project(*pos.witness, p.safe_box)[0], 0.0);
}

TEST(Verifier, SymmetricMixtureDefeatsScalarBowl) {
  // For V = x1^2 the input term 2 x1 u has zero mean under the mixture of
  // point masses at +-rho, so the relaxed decrease program stays feasible.
  // The verdict is conservative and its projection sits at the origin.
  const auto p = scalar_input();
  const auto V = poly(p, "x1^2");
  const Verdict v = check_decrease(V, p, default_verifier_config(p));
  ASSERT_FALSE(v.valid);
  expect_well_formed(*v.witness);
  EXPECT_LE(std::abs(v.witness->first_moments()[0]), 1e-6);
  EXPECT_GE(min_lie_over_vertices(V, p, project(*v.witness, p.safe_box)), -1e-6);
  EXPECT_FALSE(grid_falsify(V, p).has_value());
}

TEST(Verifier, UncontrollableUnstableSystem) {
  const auto p = make_problem(1, {"x1"}, {{"0"}}, {"x1^2"});
  const Verdict v = check_decrease(poly(p, "x1^2"), p, default_verifier_config(p));
  ASSERT_FALSE(v.valid);
  EXPECT_EQ(v.witness->kind, WitnessKind::kDecrease);
  expect_well_formed(*v.witness);
  const VectorXd x = project(*v.witness, p.safe_box);
  EXPECT_GE(min_lie_over_vertices(poly(p, "x1^2"), p, x), -1e-6);
}

TEST(Verifier, DoubleIntegratorRoundBowlStallsOnAxis) {
  // At x2 = 0 the derivative 2 x1 x2 + 2 x2 u vanishes for every u, so the
  // round bowl is not a strict CLF; both oracles must agree on that.
  const auto p = load_benchmark(BenchmarkId::kDoubleIntegrator);
  const auto V = poly(p, "x1^2 + x2^2");
  const Verdict v = verify(V, p, default_verifier_config(p));
  ASSERT_FALSE(v.valid);
  EXPECT_EQ(v.witness->kind, WitnessKind::kDecrease);
  expect_well_formed(*v.witness);
  EXPECT_GE(min_lie_over_vertices(V, p, project(*v.witness, p.safe_box)), -1e-6);
  EXPECT_TRUE(grid_falsify(V, p).has_value());
}

TEST(Verifier, ValidVerdictsSurviveGridAndHigherDegree) {
  const auto p = load_benchmark(BenchmarkId::kDoubleIntegrator);
  // A strict CLF for the double integrator on the unit box.
  const auto V = poly(p, "50*x1^2 + 50*x1*x2 + 53.75*x2^2");
  auto cfg = default_verifier_config(p);
  ASSERT_TRUE(verify(V, p, cfg).valid);
  EXPECT_FALSE(grid_falsify(V, p).has_value());
  cfg.relaxation_degree += 1;
  EXPECT_TRUE(verify(V, p, cfg).valid);
}

TEST(Verifier, SoundOnRandomQuadratics) {
  const auto p = load_benchmark(BenchmarkId::kDoubleIntegrator);
  const auto cfg = default_verifier_config(p);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> d(-1, 3);
  int valid = 0;
  for (int trial = 0; trial < 12; ++trial) {
    VectorXd c(3);
    c << std::abs(d(rng)), d(rng), std::abs(d(rng));
    const Polynomial V = p.candidate(c);
    const Verdict v = verify(V, p, cfg);
    if (v.valid) {
      ++valid;
      EXPECT_FALSE(grid_falsify(V, p, {201, 1e-6, -1.0}).has_value()) << c.transpose();
      continue;
    }
    expect_well_formed(*v.witness);
    const VectorXd x = project(*v.witness, p.safe_box);
    const bool pos_fails = V.eval(x) <= 1e-6;
    const bool dec_fails = min_lie_over_vertices(V, p, x) >= -1e-6;
    EXPECT_TRUE(pos_fails || dec_fails) << c.transpose();
  }
  EXPECT_GT(valid, 0);
}

TEST(Project, RecoversPointAndClamps) {
  VectorXd x(2);
  x << 0.3, -0.7;
  const Box box = Box::symmetric(2, 1.0);
  EXPECT_LE((project(point_witness(x, 2), box) - x).norm(), 1e-15);
  x << 1.7, 0.2;
  const VectorXd px = project(point_witness(x, 1), box);
  EXPECT_EQ(px[0], 1.0);
  EXPECT_EQ(px[1], 0.2);
}

TEST(Project, RieszOfPointWitnessIsEvaluation) {
  VectorXd x(2);
  x << 0.4, -0.9;
  const auto w = point_witness(x, 2);
  const auto vars = default_variable_names(2);
  const Polynomial q = parse_poly("x1^3*x2 - 2*x2^2 + 0.5*x1", vars);
  EXPECT_NEAR(w.riesz(q), q.eval(x), 1e-14);
}

TEST(GridFalsify, FindsObviousViolation) {
  const auto p = scalar_input();
  EXPECT_TRUE(grid_falsify(poly(p, "-x1^2"), p).has_value());
  EXPECT_FALSE(grid_falsify(poly(p, "x1^2"), p).has_value());
}
