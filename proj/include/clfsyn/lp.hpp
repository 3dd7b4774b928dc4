#pragma once

#include <vector>

#include <Eigen/Dense>

namespace clfsyn {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  Eigen::VectorXd x;
  double value = 0.0;
};

/// Dense two-phase simplex with Bland's rule for
///   minimize c^T x  s.t.  A x = b,  x >= 0.
/// Intended for the small programs of this library (tens of columns).
LpResult solve_standard_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                           const Eigen::VectorXd& c, double tol = 1e-10);

/// maximize c^T x  s.t.  G x <= h, with x free.
LpResult solve_inequality_lp(const Eigen::MatrixXd& G, const Eigen::VectorXd& h,
                             const Eigen::VectorXd& c, double tol = 1e-10);

/// Vertices of the bounded polytope {u : A u >= b}, each listed once.
std::vector<Eigen::VectorXd> polytope_vertices(const Eigen::MatrixXd& A,
                                               const Eigen::VectorXd& b,
                                               double tol = 1e-9);

struct QpResult {
  bool feasible = false;
  Eigen::VectorXd x;
};

/// minimize ||x - target||^2  s.t.  G x <= h, by enumerating active sets.
/// Exact for the low-dimensional (m <= 6) problems used by the feedback laws.
QpResult project_onto_polyhedron_exact(const Eigen::VectorXd& target,
                                       const Eigen::MatrixXd& G,
                                       const Eigen::VectorXd& h, double tol = 1e-12);

/// Dykstra's alternating projection onto {u : A u >= b} (row halfspaces).
Eigen::VectorXd dykstra_projection(const Eigen::VectorXd& target, const Eigen::MatrixXd& A,
                                   const Eigen::VectorXd& b, int max_sweeps = 2000,
                                   double tol = 1e-12);

}  // namespace clfsyn
