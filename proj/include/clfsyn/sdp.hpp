#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace clfsyn {

/// Block-diagonal semidefinite program in dual form:
///
///   maximize  b^T y   s.t.  S(y) = C - sum_i y_i A_i  is PSD,
///
/// with primal  minimize <C, X>  s.t.  <A_i, X> = b_i,  X PSD.
/// Blocks flagged `diagonal` are LP cones; their constant, slack and primal
/// matrices are stored as a single column holding the diagonal.
struct SdpProblem {
  struct Entry {
    int var;
    int row;  // row <= col
    int col;
    double value;
  };
  struct Block {
    int size = 0;
    bool diagonal = false;
    Eigen::MatrixXd constant;   // C restricted to the block
    std::vector<Entry> entries; // coefficients of A_i restricted to the block
  };

  int num_vars = 0;
  std::vector<Block> blocks;
  Eigen::VectorXd objective;  // b

  /// Adds a block and returns its index.
  int add_block(int size, bool diagonal = false);
  /// Adds `value` to (A_var)(row, col) and its mirror.
  void add_coefficient(int block, int var, int row, int col, double value);

  /// S(y) per block.
  std::vector<Eigen::MatrixXd> slack(const Eigen::VectorXd& y) const;
  /// Smallest eigenvalue of S(y) over all blocks.
  double min_slack_eigenvalue(const Eigen::VectorXd& y) const;
  /// <A_i, X> for every i.
  Eigen::VectorXd apply(const std::vector<Eigen::MatrixXd>& X) const;
};

enum class SdpStatus { kOptimal, kStopped, kIterationLimit, kNumericalFailure };

struct SdpIterate {
  int iteration = 0;
  const Eigen::VectorXd* y = nullptr;
  const std::vector<Eigen::MatrixXd>* X = nullptr;
  double primal_objective = 0.0;  // <C, X>
  double dual_objective = 0.0;    // b^T y
  double primal_residual = 0.0;   // ||b - A(X)||_1
  const Eigen::VectorXd* residual = nullptr;
  double mu = 0.0;
};

struct SdpOptions {
  int max_iterations = 120;
  double gap_tol = 1e-9;
  double feas_tol = 1e-9;
  double step_fraction = 0.95;
  /// Returning true ends the solve with kStopped.
  std::function<bool(const SdpIterate&)> stop;
};

struct SdpResult {
  SdpStatus status = SdpStatus::kNumericalFailure;
  Eigen::VectorXd y;
  std::vector<Eigen::MatrixXd> X;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double primal_residual = 0.0;
  int iterations = 0;
};

/// Infeasible-primal, feasible-dual path following (HKM direction with a
/// Mehrotra corrector). `y0` must make S(y0) positive definite; every dual
/// iterate stays strictly feasible.
SdpResult solve_sdp(const SdpProblem& problem, const Eigen::VectorXd& y0,
                    const SdpOptions& options = {});

}  // namespace clfsyn
