#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "clfsyn/dynamics.hpp"
#include "clfsyn/errors.hpp"
#include "clfsyn/lie.hpp"

using namespace clfsyn;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd random_in(const Box& b, std::mt19937& rng) {
  std::uniform_real_distribution<double> d(0.0, 1.0);
  VectorXd x(b.lower().size());
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = b.lower()[i] + d(rng) * (b.upper()[i] - b.lower()[i]);
  return x;
}

}  // namespace

TEST(Dynamics, DoubleIntegratorField) {
  const ProblemInstance p = load_benchmark(BenchmarkId::kDoubleIntegrator);
  VectorXd x(2);
  x << 1, 2;
  const VectorXd f = vector_field(p.system, x, VectorXd::Constant(1, 3.0));
  EXPECT_EQ(f[0], 2.0);
  EXPECT_EQ(f[1], 3.0);
  EXPECT_THROW(vector_field(p.system, x, VectorXd::Zero(2)), DimensionError);
}

TEST(Dynamics, ToraMatchesOde) {
  const double eps = 0.1;
  const ProblemInstance p = load_benchmark(BenchmarkId::kTora);
  std::mt19937 rng(1);
  for (int k = 0; k < 100; ++k) {
    const VectorXd x = random_in(p.safe_box, rng);
    const double u = std::uniform_real_distribution<double>(-1.5, 1.5)(rng);
    const double s3 = x[2] - x[2] * x[2] * x[2] / 6.0;
    const Eigen::Vector4d want(x[1], -x[0] + eps * s3, x[3], u);
    EXPECT_LE((vector_field(p.system, x, VectorXd::Constant(1, u)) - want).norm(), 1e-9);
  }
  VectorXd x = VectorXd::Zero(4);
  x[2] = M_PI / 2;
  const double cubic = M_PI / 2 - std::pow(M_PI / 2, 3) / 6.0;
  EXPECT_NEAR(vector_field(p.system, x, VectorXd::Zero(1))[1], eps * cubic, 1e-12);
}

TEST(Dynamics, BicycleMatchesOde) {
  const ProblemInstance p = load_benchmark(BenchmarkId::kBicycle);
  std::mt19937 rng(2);
  for (int k = 0; k < 100; ++k) {
    const VectorXd x = random_in(p.safe_box, rng);
    VectorXd u(2);
    u << std::uniform_real_distribution<double>(-10, 10)(rng), std::uniform_real_distribution<double>(-10, 10)(rng);
    const double v = x[1] + 5.0;  // deviation coordinate
    const Eigen::Vector4d want(v * x[2], u[0], v * x[3], u[1]);
    EXPECT_LE((vector_field(p.system, x, u) - want).norm(), 1e-9);
  }
}

TEST(Dynamics, PendulumFitsAreLeastSquares) {
  constexpr double m = 0.21, M = 0.815, g = 9.8;
  const int N = 2001;
  MatrixXd A(N, 2), C(N, 2);
  VectorXd fa(N), fc(N);
  for (int i = 0; i < N; ++i) {
    const double t = -1.0 + 2.0 * i / (N - 1);
    A(i, 0) = t;
    A(i, 1) = t * t * t;
    C(i, 0) = 1.0;
    C(i, 1) = t * t;
    fa[i] = (4 * (M + m) * g * std::tan(t) - 3 * m * g * std::sin(t) * std::cos(t)) /
            (4 * (M + m) - 3 * m * std::cos(t) * std::cos(t));
    fc[i] = std::cos(t);
  }
  const VectorXd a = A.colPivHouseholderQr().solve(fa);
  const VectorXd c = C.colPivHouseholderQr().solve(fc);
  EXPECT_NEAR(a[0], PendulumFits::kDriftA1, 1e-9);
  EXPECT_NEAR(a[1], PendulumFits::kDriftA3, 1e-9);
  EXPECT_NEAR(c[0], PendulumFits::kCosC0, 1e-12);
  EXPECT_NEAR(c[1], PendulumFits::kCosC2, 1e-12);
  EXPECT_NEAR((A * a - fa).cwiseAbs().maxCoeff(), PendulumFits::kDriftResidual, 1e-9);
  EXPECT_NEAR((C * c - fc).cwiseAbs().maxCoeff(), PendulumFits::kCosResidual, 1e-12);
}

TEST(Dynamics, PendulumMatchesFittedOde) {
  const ProblemInstance p = load_benchmark(BenchmarkId::kInvertedPendulum);
  std::mt19937 rng(3);
  for (int k = 0; k < 100; ++k) {
    const VectorXd x = random_in(p.safe_box, rng);
    const double u = std::uniform_real_distribution<double>(-20, 20)(rng);
    const double t = x[2];
    const double drift = PendulumFits::kDriftA1 * t + PendulumFits::kDriftA3 * t * t * t;
    const double cs = PendulumFits::kCosC0 + PendulumFits::kCosC2 * t * t;
    const Eigen::Vector4d want(x[1], 4 * u + drift, x[3], -3 * u * cs / 0.305);
    EXPECT_LE((vector_field(p.system, x, VectorXd::Constant(1, u)) - want).norm(), 1e-9);
  }
}

TEST(Dynamics, BenchmarkShapes) {
  struct Shape {
    BenchmarkId id;
    std::size_t n, m;
    double umax;
  };
  for (const Shape s : {Shape{BenchmarkId::kDoubleIntegrator, 2, 1, 1.0}, Shape{BenchmarkId::kTora, 4, 1, 1.5},
                        Shape{BenchmarkId::kBicycle, 4, 2, 10.0}, Shape{BenchmarkId::kInvertedPendulum, 4, 1, 20.0}}) {
    const ProblemInstance p = load_benchmark(s.id);
    EXPECT_EQ(p.n(), s.n);
    EXPECT_EQ(p.m(), s.m);
    EXPECT_EQ(p.r(), s.n * (s.n + 1) / 2);
    EXPECT_TRUE(p.inputs.is_interval());
    EXPECT_EQ(p.inputs.interval_upper(), VectorXd::Constant(static_cast<Eigen::Index>(s.m), s.umax));
    EXPECT_TRUE(p.inputs.contains(VectorXd::Constant(static_cast<Eigen::Index>(s.m), s.umax), 0.0));
    EXPECT_EQ(vector_field(p.system, VectorXd::Zero(static_cast<Eigen::Index>(s.n)),
                           VectorXd::Zero(static_cast<Eigen::Index>(s.m))),
              VectorXd::Zero(static_cast<Eigen::Index>(s.n)));
    for (const auto& g : p.basis) EXPECT_EQ(g.eval(VectorXd::Zero(static_cast<Eigen::Index>(s.n))), 0.0);
    EXPECT_EQ(p.coeff_box, Box::symmetric(p.r(), 100.0));
    EXPECT_EQ(parse_benchmark_id(benchmark_name(s.id)), s.id);
  }
  EXPECT_THROW(parse_benchmark_id("ducted_fan"), ProblemError);
}

TEST(Dynamics, ToraTableConfiguration) {
  const ProblemInstance p = load_benchmark(BenchmarkId::kTora);
  EXPECT_EQ(*p.overrides.mpc_tau, 1.0);
  EXPECT_EQ(*p.overrides.mpc_horizon, 30.0);
  EXPECT_EQ(*p.overrides.relaxation_degree, 4);
  Eigen::Vector4d hi(1, 1, 2, 1);
  EXPECT_EQ(p.safe_box.upper(), VectorXd(hi));
}

TEST(Dynamics, ValidateRejectsBadBasis) {
  ProblemInstance p = load_benchmark(BenchmarkId::kDoubleIntegrator);
  p.basis[0] = p.basis[0] + Polynomial::constant(2, 1.0);
  EXPECT_THROW(p.validate(), ProblemError);
  ProblemInstance q = load_benchmark(BenchmarkId::kDoubleIntegrator);
  q.safe_set.constraints.push_back(Polynomial::variable(2, 0) * Polynomial::variable(2, 0));
  EXPECT_THROW(q.validate(), ProblemError);
}

TEST(Dynamics, JacobianMatchesFiniteDifferences) {
  for (BenchmarkId id : all_benchmarks()) {
    const ProblemInstance p = load_benchmark(id);
    std::mt19937 rng(6);
    const VectorXd x = random_in(p.safe_box, rng);
    const VectorXd u = VectorXd::Constant(static_cast<Eigen::Index>(p.m()), 0.7);
    const MatrixXd J = p.system.jacobian_x(x, u);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      VectorXd e = VectorXd::Zero(x.size());
      e[i] = 1e-6;
      const VectorXd fd = (vector_field(p.system, x + e, u) - vector_field(p.system, x - e, u)) / 2e-6;
      EXPECT_LE((J.col(i) - fd).norm(), 1e-5 * (1.0 + fd.norm()));
    }
  }
}

TEST(Lie, DecompositionMatchesGradientDotField) {
  std::mt19937 rng(9);
  for (BenchmarkId id : all_benchmarks()) {
    const ProblemInstance p = load_benchmark(id);
    VectorXd c(static_cast<Eigen::Index>(p.r()));
    for (auto& v : c) v = std::uniform_real_distribution<double>(-5, 5)(rng);
    const Polynomial V = p.candidate(c);
    const LieDecomposition ld = lie_decompose(V, p.system);
    const auto gV = grad(V);
    for (int k = 0; k < 20; ++k) {
      const VectorXd x = random_in(p.safe_box, rng);
      VectorXd u(static_cast<Eigen::Index>(p.m()));
      for (auto& v : u) v = std::uniform_real_distribution<double>(-1, 1)(rng);
      const VectorXd f = vector_field(p.system, x, u);
      double want = 0.0;
      for (std::size_t i = 0; i < p.n(); ++i) want += gV[i].eval(x) * f[static_cast<Eigen::Index>(i)];
      EXPECT_NEAR(ld.eval(x, u), want, 1e-9 * (1.0 + std::abs(want)));
    }
  }
}
