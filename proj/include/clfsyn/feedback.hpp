#pragma once

#include <optional>

#include <Eigen/Dense>

#include "clfsyn/dynamics.hpp"
#include "clfsyn/errors.hpp"
#include "clfsyn/lie.hpp"

namespace clfsyn {

/// Min-norm QP infeasible even with sigma = 0.
class FeedbackInfeasible : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Universal formula u = -b (a + sqrt(a^2 + (b^T b)^2)) / (b^T b); u = 0
/// when ||b|| <= 1e-12.
Eigen::VectorXd sontag(const LieDecomposition& ld, const Eigen::VectorXd& x);
Eigen::VectorXd sontag(const Polynomial& V, const ControlAffineSystem& sys, const Eigen::VectorXd& x);

struct MinNormResult {
  Eigen::VectorXd u;
  double sigma = 0.0;    // rate actually enforced
  bool relaxed = false;  // sigma was halved at least once
};

/// argmin ||u||^2 s.t. a + b^T u <= -sigma V(x), u in U. Halves sigma on
/// infeasibility, finishing with sigma = 0.
MinNormResult min_norm(const Polynomial& V, const LieDecomposition& ld, const InputPolytope& U,
                       double sigma, const Eigen::VectorXd& x);
MinNormResult min_norm(const Polynomial& V, const ControlAffineSystem& sys, const InputPolytope& U,
                       double sigma, const Eigen::VectorXd& x);

enum class FeedbackMode { kSontag, kMinNorm };

/// Closed-form law with the Lie decomposition computed once.
class FeedbackLaw {
 public:
  FeedbackLaw(Polynomial V, const ControlAffineSystem& sys, std::optional<InputPolytope> U,
              FeedbackMode mode, double sigma = 0.1);

  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const;
  FeedbackMode mode() const { return mode_; }
  double sigma() const { return sigma_; }

 private:
  Polynomial V_;
  LieDecomposition ld_;
  std::optional<InputPolytope> U_;
  FeedbackMode mode_;
  double sigma_;
};

}  // namespace clfsyn
