#pragma once

#include <vector>

#include <Eigen/Dense>

#include "clfsyn/polynomial.hpp"

namespace clfsyn {

inline constexpr double kDefaultMembershipTol = 1e-9;

/// {x : r_i(x) <= 0 for every i}.
struct SemialgebraicSet {
  std::size_t nvars = 0;
  std::vector<Polynomial> constraints;

  bool contains(const Eigen::VectorXd& x, double tol = kDefaultMembershipTol) const;
  /// max_i r_i(x); negative means strictly inside.
  double max_violation(const Eigen::VectorXd& x) const;
};

/// Axis-aligned box with lower < upper componentwise.
class Box {
 public:
  Box(Eigen::VectorXd lower, Eigen::VectorXd upper);
  static Box symmetric(std::size_t dim, double half_width);

  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }
  std::size_t dim() const { return static_cast<std::size_t>(lower_.size()); }
  Eigen::VectorXd center() const { return 0.5 * (lower_ + upper_); }
  Eigen::VectorXd half_widths() const { return 0.5 * (upper_ - lower_); }

  bool contains(const Eigen::VectorXd& x, double tol = kDefaultMembershipTol) const;
  Eigen::VectorXd clamp(const Eigen::VectorXd& x) const;

  bool operator==(const Box& o) const { return lower_ == o.lower_ && upper_ == o.upper_; }

 private:
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
};

struct Ball {
  Ball(Eigen::VectorXd center, double radius);
  Eigen::VectorXd center;
  double radius;
  bool contains(const Eigen::VectorXd& x, double tol = kDefaultMembershipTol) const;
};

/// {u : A u >= b}. Construction verifies nonemptiness (slack-maximising LP)
/// and boundedness (2m coordinate LPs).
class InputPolytope {
 public:
  InputPolytope(Eigen::MatrixXd A, Eigen::VectorXd b);
  /// Converts the {u : A u <= b} convention by negating both sides.
  static InputPolytope from_upper_form(const Eigen::MatrixXd& A, const Eigen::VectorXd& b);

  const Eigen::MatrixXd& A() const { return A_; }
  const Eigen::VectorXd& b() const { return b_; }
  std::size_t dim() const { return static_cast<std::size_t>(A_.cols()); }
  const Eigen::VectorXd& interior_point() const { return interior_; }
  const std::vector<Eigen::VectorXd>& vertices() const { return vertices_; }
  /// Non-empty when the polytope is an axis-aligned interval.
  bool is_interval() const { return interval_; }
  const Eigen::VectorXd& interval_lower() const { return lo_; }
  const Eigen::VectorXd& interval_upper() const { return hi_; }

  bool contains(const Eigen::VectorXd& u, double tol = kDefaultMembershipTol) const;
  /// Euclidean projection: exact clamp for intervals, Dykstra otherwise.
  Eigen::VectorXd project(const Eigen::VectorXd& u) const;

  bool operator==(const InputPolytope& o) const { return A_ == o.A_ && b_ == o.b_; }

 private:
  Eigen::MatrixXd A_;
  Eigen::VectorXd b_;
  Eigen::VectorXd interior_;
  std::vector<Eigen::VectorXd> vertices_;
  bool interval_ = false;
  Eigen::VectorXd lo_;
  Eigen::VectorXd hi_;
};

SemialgebraicSet box_to_semialgebraic(const Box& b);

/// A = [I; -I], b = [lo; -hi].
InputPolytope interval_input_polytope(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);

}  // namespace clfsyn
