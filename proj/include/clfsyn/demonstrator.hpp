#pragma once

#include <vector>

#include <Eigen/Dense>

#include "clfsyn/dynamics.hpp"

namespace clfsyn {

struct MpcConfig {
  double tau = 0.25;
  double horizon = 5.0;
  /// Empty matrices select I, I and (horizon / tau) * I.
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
  Eigen::MatrixXd QF;
  int max_iters = 500;
  double grad_tol = 1e-6;
  double shrink = 0.5;
  double initial_step = 1.0;
  double armijo = 1e-4;

  int steps() const;
};

/// Config from the problem's overrides (tau, horizon, iteration cap).
MpcConfig mpc_config_for(const ProblemInstance& problem);

struct MpcSolution {
  std::vector<Eigen::VectorXd> inputs;
  double cost = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Cost of an input sequence under the RK4 rollout from x0.
double mpc_cost(const ProblemInstance& problem, const MpcConfig& cfg, const Eigen::VectorXd& x0,
                const std::vector<Eigen::VectorXd>& inputs);

/// Gradient of mpc_cost with respect to the inputs (discrete adjoint).
std::vector<Eigen::VectorXd> mpc_gradient(const ProblemInstance& problem, const MpcConfig& cfg,
                                          const Eigen::VectorXd& x0,
                                          const std::vector<Eigen::VectorXd>& inputs);

/// Projected gradient descent with backtracking from the all-zero sequence.
MpcSolution mpc_solve(const ProblemInstance& problem, const MpcConfig& cfg, const Eigen::VectorXd& x0);

struct Demonstration {
  Eigen::VectorXd x;
  Eigen::VectorXd u;
  std::vector<Eigen::VectorXd> plan;
  std::vector<Eigen::VectorXd> states;
  double cost = 0.0;
  bool converged = false;
  int iterations = 0;
};

Demonstration demonstrate(const ProblemInstance& problem, const MpcConfig& cfg, const Eigen::VectorXd& x);

struct MomentWitness;

/// Projects w onto state space, clamps into S_box and demonstrates there.
Demonstration demonstrate_witness(const ProblemInstance& problem, const MpcConfig& cfg, const MomentWitness& w);

}  // namespace clfsyn
