#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clfsyn/polynomial.hpp"
#include "clfsyn/sets.hpp"

namespace clfsyn {

/// xdot = f0(x) + sum_i f_i(x) u_i with polynomial components.
class ControlAffineSystem {
 public:
  ControlAffineSystem() = default;
  ControlAffineSystem(std::vector<Polynomial> drift,
                      std::vector<std::vector<Polynomial>> channels);

  std::size_t n() const { return n_; }
  std::size_t m() const { return channels_.size(); }
  const std::vector<Polynomial>& drift() const { return drift_; }
  const std::vector<std::vector<Polynomial>>& channels() const { return channels_; }

  Eigen::VectorXd eval_drift(const Eigen::VectorXd& x) const;
  /// n x m matrix whose column i is f_i(x).
  Eigen::MatrixXd input_matrix(const Eigen::VectorXd& x) const;
  /// d f(x,u) / dx.
  Eigen::MatrixXd jacobian_x(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;

  bool operator==(const ControlAffineSystem& o) const {
    return drift_ == o.drift_ && channels_ == o.channels_;
  }

 private:
  std::size_t n_ = 0;
  std::vector<Polynomial> drift_;
  std::vector<std::vector<Polynomial>> channels_;
  // Cached partial derivatives: [row][col].
  std::vector<std::vector<Polynomial>> drift_jac_;
  std::vector<std::vector<std::vector<Polynomial>>> channel_jac_;
};

Eigen::VectorXd vector_field(const ControlAffineSystem& sys, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& u);

/// Reach-while-stay extras: V > beta on the boundary faces of S and V < beta
/// on the initial set.
struct ReachWhileStay {
  SemialgebraicSet init_set;
  /// Each face is {x in S : face_i(x) = 0}; defaults to the S constraints.
  std::vector<Polynomial> boundary_faces;
  double beta = 1.0;
  std::optional<double> target_radius;

  bool operator==(const ReachWhileStay& o) const;
};

/// Per-problem tuning carried by benchmark definitions and problem files.
struct ProblemOverrides {
  std::optional<double> mpc_tau;
  std::optional<double> mpc_horizon;
  std::optional<int> mpc_max_iters;
  std::optional<int> relaxation_degree;
  std::optional<double> delta;
  std::optional<double> eps_w;

  bool operator==(const ProblemOverrides&) const = default;
};

struct ProblemInstance {
  std::string name;
  std::vector<std::string> variables;
  ControlAffineSystem system;
  SemialgebraicSet safe_set;
  Box safe_box = Box::symmetric(1, 1.0);
  InputPolytope inputs = interval_input_polytope(Eigen::VectorXd::Constant(1, -1.0),
                                                 Eigen::VectorXd::Constant(1, 1.0));
  std::vector<Polynomial> basis;
  std::vector<std::string> basis_labels;
  Box coeff_box = Box::symmetric(1, 100.0);
  std::optional<ReachWhileStay> reach_while_stay;
  double exclusion_radius = 0.01;
  ProblemOverrides overrides;

  std::size_t n() const { return system.n(); }
  std::size_t m() const { return system.m(); }
  std::size_t r() const { return basis.size(); }

  /// V_c = sum_j c_j g_j.
  Polynomial candidate(const Eigen::VectorXd& c) const;

  /// Throws ProblemError when an invariant fails (g_j(0) != 0, origin not
  /// strictly inside S, dimension mismatches).
  void validate() const;
};

bool operator==(const ProblemInstance& a, const ProblemInstance& b);

/// Default exclusion radius: 1% of the smallest half-width of S_box.
double default_exclusion_radius(const Box& safe_box);

/// All monomials of degree exactly two, graded-lex order.
std::vector<Polynomial> quadratic_basis(std::size_t n);

enum class BenchmarkId { kDoubleIntegrator, kTora, kBicycle, kInvertedPendulum };

BenchmarkId parse_benchmark_id(const std::string& name);
std::string benchmark_name(BenchmarkId id);
std::vector<BenchmarkId> all_benchmarks();

struct BenchmarkOptions {
  double tora_epsilon = 0.1;
};

ProblemInstance load_benchmark(BenchmarkId id, const BenchmarkOptions& opts = {});

/// Frozen least-squares fits used by the cart-pole benchmark over theta in [-1, 1]
/// (2001 uniform samples): drift term ~ a1*t + a3*t^3 and cos ~ c0 + c2*t^2.
struct PendulumFits {
  static constexpr double kDriftA1 = 9.216038330428713;
  static constexpr double kDriftA3 = 5.6173392328725322;
  static constexpr double kCosC0 = 0.99655186341071389;
  static constexpr double kCosC2 = -0.46522914418167161;
  /// Max residual of the drift fit on the sample grid.
  static constexpr double kDriftResidual = 0.42921813831680034;
  static constexpr double kCosResidual = 0.008979586639097481;
};

}  // namespace clfsyn
