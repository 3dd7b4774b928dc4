#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "clfsyn/errors.hpp"
#include "clfsyn/learner.hpp"
#include "clfsyn/lie.hpp"
#include "test_support.hpp"

using namespace clfsyn;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// Largest s with {d + s L v} inside every face, and the resulting log det.
double inscribed_logdet(const std::vector<Halfspace>& faces, const VectorXd& d, const MatrixXd& L) {
  double s = std::numeric_limits<double>::infinity();
  for (const auto& f : faces) {
    const double room = f.b - f.a.dot(d);
    if (room <= 0.0) return -std::numeric_limits<double>::infinity();
    const double reach = (L.transpose() * f.a).norm();
    if (reach > 0.0) s = std::min(s, room / reach);
  }
  return L.rows() * std::log(s) + std::log(std::abs(L.determinant()));
}

// Random-search estimate of the maximum-volume inscribed ellipsoid center.
VectorXd monte_carlo_mve_center(const std::vector<Halfspace>& faces, const VectorXd& start,
                                unsigned seed) {
  const Eigen::Index r = start.size();
  std::mt19937 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  VectorXd d = start;
  MatrixXd L = MatrixXd::Identity(r, r);
  double best = inscribed_logdet(faces, d, L);
  double step = 0.3;
  for (int it = 0; it < 40000; ++it) {
    VectorXd d2 = d;
    MatrixXd L2 = L;
    for (Eigen::Index i = 0; i < r; ++i) d2[i] += step * g(rng);
    for (Eigen::Index i = 0; i < r; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) L2(i, j) += step * g(rng);
    }
    const double v = inscribed_logdet(faces, d2, L2);
    if (v > best) {
      best = v;
      d = d2;
      L = L2;
    }
    if (it % 5000 == 4999) step *= 0.5;
  }
  return d;
}

std::vector<Halfspace> faces_of(const std::vector<Halfspace>& rows, const Box& box) {
  CandidateRegion region(box);
  for (const auto& h : rows) region.add_row(h);
  return region.all_faces();
}

LearnerConfig default_config() { return LearnerConfig{}; }

}  // namespace

TEST(WitnessRows, DoubleIntegratorHandExpansion) {
  const auto p = load_benchmark(BenchmarkId::kDoubleIntegrator);
  auto pair = witness_rows(p, vec({1, 0}), vec({-1}));
  ASSERT_TRUE(pair.positivity && pair.decrease);
  EXPECT_LE((pair.positivity->a - vec({-1, 0, 0})).norm(), 1e-15);
  EXPECT_EQ(pair.positivity->b, 0.0);
  EXPECT_LE((pair.decrease->a - vec({0, -1, 0})).norm(), 1e-15);
  EXPECT_EQ(pair.decrease->b, 0.0);

  pair = witness_rows(p, vec({0, 1}), vec({0}));
  EXPECT_LE((pair.positivity->a - vec({0, 0, -1})).norm(), 1e-15);
  EXPECT_LE((pair.decrease->a - vec({0, 1, 0})).norm(), 1e-15);
}

TEST(WitnessRows, UnitNormAndOriginRejected) {
  const auto p = load_benchmark(BenchmarkId::kTora);
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> d(-1, 1);
  for (int i = 0; i < 50; ++i) {
    VectorXd x(4);
    x << d(rng), d(rng), d(rng), d(rng);
    for (const auto& h : witness_rows(p, x, vec({d(rng)})).rows()) {
      EXPECT_NEAR(h.a.norm(), 1.0, 1e-12);
    }
  }
  EXPECT_THROW(witness_rows(p, VectorXd::Zero(4), vec({0})), ProblemError);
}

TEST(Mve, SymmetricBox) {
  for (int r = 1; r <= 4; ++r) {
    const auto m = mve({}, Box::symmetric(static_cast<std::size_t>(r), 1.0));
    EXPECT_LE(m.d.norm(), 1e-7);
    EXPECT_LE((m.B - MatrixXd::Identity(r, r)).norm(), 1e-6);
    EXPECT_LE(m.kkt_residual, 1e-7);
  }
}

TEST(Mve, AxisAlignedBox) {
  const auto m = mve({}, Box(vec({0, -3}), vec({2, 3})));
  EXPECT_LE((m.d - vec({1, 0})).norm(), 1e-6);
  MatrixXd expect = MatrixXd::Zero(2, 2);
  expect.diagonal() << 1, 3;
  EXPECT_LE((m.B - expect).norm(), 1e-5);
  EXPECT_NEAR(m.logdet, std::log(3.0), 1e-6);
}

TEST(Mve, RandomPolytopeContainsSampledEllipsoid) {
  std::mt19937 rng(8);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.1, 0.8);
  const Box box = Box::symmetric(2, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Halfspace> rows;
    for (int k = 0; k < 6; ++k) rows.push_back(Halfspace::normalized(vec({g(rng), g(rng)}), u(rng)));
    const auto m = mve(rows, box);
    EXPECT_LE(m.kkt_residual, 1e-7);
    const auto faces = faces_of(rows, box);
    for (int s = 0; s < 10000; ++s) {
      VectorXd v = vec({g(rng), g(rng)});
      v /= v.norm();
      const VectorXd x = m.d + m.B * v;
      for (const auto& f : faces) EXPECT_GE(f.slack(x), -1e-8);
    }
  }
}

TEST(Mve, CenterAgreesWithRandomSearch) {
  const Box box = Box::symmetric(2, 1.0);
  const std::vector<Halfspace> rows = {Halfspace::normalized(vec({-1, 0}), -0.5)};
  const auto m = mve(rows, box);
  const VectorXd oracle = monte_carlo_mve_center(faces_of(rows, box), vec({0.75, 0.1}), 3);
  EXPECT_LE((m.d - oracle).norm(), 0.05);

  // A skewed triangle-like region.
  const std::vector<Halfspace> tri = {Halfspace::normalized(vec({1, 1}), 0.2),
                                      Halfspace::normalized(vec({-2, 1}), 0.5)};
  const auto m2 = mve(tri, box);
  const VectorXd oracle2 = monte_carlo_mve_center(faces_of(tri, box), m2.d + vec({0.1, -0.1}), 4);
  EXPECT_LE((m2.d - oracle2).norm(), 0.05);
}

TEST(FindCandidate, EmptyRowsGiveCenter) {
  CandidateRegion region(Box::symmetric(3, 100.0));
  const auto res = find_candidate(region, default_config());
  ASSERT_EQ(res.kind, CandidateResult::Kind::kCandidate);
  EXPECT_LE(res.c.norm(), 1e-6);
}

TEST(FindCandidate, ContradictoryRowsAreEmpty) {
  CandidateRegion region(Box::symmetric(2, 1.0));
  region.add_row(Halfspace::normalized(vec({1, 0}), -1.0));
  region.add_row(Halfspace::normalized(vec({-1, 0}), -1.0));
  EXPECT_EQ(find_candidate(region, default_config()).kind, CandidateResult::Kind::kEmpty);
  auto cfg = default_config();
  cfg.strategy = LearnerStrategy::kEllipsoid;
  CandidateRegion again(Box::symmetric(2, 1.0));
  again.add_row(Halfspace::normalized(vec({1, 0}), -1.0));
  again.add_row(Halfspace::normalized(vec({-1, 0}), -1.0));
  EXPECT_EQ(find_candidate(again, cfg).kind, CandidateResult::Kind::kEmpty);
}

TEST(FindCandidate, ThinRegionConverges) {
  CandidateRegion region(Box::symmetric(2, 1.0));
  region.add_row(Halfspace::normalized(vec({1, 0}), 1e-4));
  region.add_row(Halfspace::normalized(vec({-1, 0}), 1e-4));
  region.add_row(Halfspace::normalized(vec({0, 1}), 1e-4));
  region.add_row(Halfspace::normalized(vec({0, -1}), 1e-4));
  EXPECT_EQ(find_candidate(region, default_config()).kind, CandidateResult::Kind::kConverged);
}

TEST(FindCandidate, RedundantRowBarelyMovesCenter) {
  CandidateRegion region(Box::symmetric(2, 1.0));
  region.add_row(Halfspace::normalized(vec({1, 1}), 0.3));
  const VectorXd before = find_candidate(region, default_config()).c;
  region.add_row(Halfspace::normalized(vec({1, 0}), 5.0));
  const VectorXd after = find_candidate(region, default_config()).c;
  EXPECT_LE((after - before).norm(), 1e-6);
}

TEST(Region, CutsOnlyShrink) {
  std::mt19937 rng(13);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(-1, 1);
  CandidateRegion region(Box::symmetric(3, 1.0));
  const double eps = 1e-6;
  for (int k = 0; k < 8; ++k) {
    const CandidateRegion before = region;
    region.add_row(Halfspace::normalized(vec({g(rng), g(rng), g(rng)}), 0.3 * u(rng) + 0.3));
    for (int s = 0; s < 2000; ++s) {
      const VectorXd c = vec({u(rng), u(rng), u(rng)});
      if (region.contains(c, eps)) EXPECT_TRUE(before.contains(c, eps));
    }
  }
}

TEST(Region, OwnCounterexampleEliminatesCandidate) {
  const auto p = load_benchmark(BenchmarkId::kDoubleIntegrator);
  // Demonstrator: the U vertex that best decreases a known CLF, so every
  // row stays consistent with that CLF and the region never empties.
  const VectorXd known = vec({50, 50, 53.75});
  const Polynomial Vk = p.candidate(known);
  const auto ld = lie_decompose(Vk, p.system);
  CandidateRegion region(p.coeff_box);
  const auto cfg = default_config();
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 0; k < 8; ++k) {
    const auto res = find_candidate(region, cfg);
    ASSERT_EQ(res.kind, CandidateResult::Kind::kCandidate);
    bool found = false;
    for (int s = 0; s < 100000 && !found; ++s) {
      const VectorXd x = vec({u(rng), u(rng)});
      if (x.norm() < 0.05) continue;
      const VectorXd inp = ld.input_terms[0].eval(x) > 0 ? vec({-1}) : vec({1});
      const auto pair = witness_rows(p, x, inp);
      for (const auto& h : pair.rows()) found = found || h.slack(res.c) < cfg.eps_w;
      if (found) region.add_witness(pair);
    }
    if (!found) break;
    EXPECT_LT(region.min_slack(res.c, cfg.eps_w), 0.0);
    EXPECT_GE(region.min_slack(known, 0.0), 0.0);
  }
}

TEST(Ellipsoid, CentralCutOfUnitBall) {
  for (int r = 2; r <= 6; ++r) {
    Ellipsoid E{VectorXd::Zero(r), MatrixXd::Identity(r, r)};
    VectorXd a = VectorXd::Zero(r);
    a[0] = 1.0;
    const Ellipsoid E2 = ellipsoid_step(E, a);
    const double rr = r;
    EXPECT_NEAR(E2.center[0], -1.0 / (rr + 1.0), 1e-14);
    EXPECT_LE(E2.center.tail(r - 1).norm(), 1e-15);
    // Textbook shape: r^2/(r^2-1) (I - 2/(r+1) e1 e1^T).
    MatrixXd P = MatrixXd::Identity(r, r);
    P(0, 0) -= 2.0 / (rr + 1.0);
    P *= rr * rr / (rr * rr - 1.0);
    EXPECT_LE((E2.P - P).norm(), 1e-12);
  }
}

TEST(Ellipsoid, VolumeLawOnRandomCuts) {
  std::mt19937 rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int r : {2, 5, 10}) {
    Ellipsoid E{VectorXd::Zero(r), 4.0 * MatrixXd::Identity(r, r)};
    double total = 0.0;
    for (int k = 1; k <= 200; ++k) {
      VectorXd a(r);
      for (int i = 0; i < r; ++i) a[i] = g(rng);
      const double before = E.logvol();
      E = ellipsoid_step(E, a);
      ASSERT_LE(E.logvol() - before, -1.0 / (2.0 * r) + 1e-9);
      total += E.logvol() - before;
      ASSERT_LE(total, -k / (2.0 * r) + k * 1e-9);
      // Renormalise so the shape stays well conditioned over many cuts.
      if (E.max_semi_axis() < 1e-3) {
        E.P /= E.P.trace() / r;
        E.center.setZero();
      }
    }
  }
}

TEST(Ellipsoid, ParallelCutStillShrinks) {
  Ellipsoid E{VectorXd::Zero(3), MatrixXd::Identity(3, 3)};
  const VectorXd a = vec({0.3, -1, 0.5});
  const Ellipsoid E1 = ellipsoid_step(E, a);
  const Ellipsoid E2 = ellipsoid_step(E1, a);
  EXPECT_LT(E2.logvol(), E1.logvol());
}

TEST(IterationBound, Formula) {
  EXPECT_EQ(iteration_bound(2, 1.0, std::exp(-1.0)), 3);
  EXPECT_EQ(iteration_bound(3, 100.0, 1e-3), 86);
  EXPECT_EQ(iteration_bound(2, 1.0 + 1e-12, 1.0), 1);
  for (int r : {4, 7, 20}) {
    const double direct = std::ceil(r * (std::log(100.0) - std::log(1e-3)) / -std::log(1.0 - 1.0 / r));
    EXPECT_EQ(iteration_bound(r, 100.0, 1e-3), static_cast<long>(direct));
  }
  EXPECT_THROW(iteration_bound(0, 1.0, 0.1), std::invalid_argument);
  EXPECT_THROW(iteration_bound(2, 0.1, 1.0), std::invalid_argument);
}

TEST(IterationBound, QuadraticGrowth) {
  for (int r : {8, 16, 32}) {
    const double ratio = static_cast<double>(iteration_bound(2 * r, 100.0, 1e-3)) /
                         static_cast<double>(iteration_bound(r, 100.0, 1e-3));
    EXPECT_GE(ratio, 3.5);
    EXPECT_LE(ratio, 4.5);
  }
}
