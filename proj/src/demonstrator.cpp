#include "clfsyn/demonstrator.hpp"

#include <cassert>
#include <cmath>

#include "clfsyn/errors.hpp"
#include "clfsyn/simulator.hpp"
#include "clfsyn/verifier.hpp"

namespace clfsyn {

using Eigen::MatrixXd;
using Eigen::VectorXd;

int MpcConfig::steps() const { return static_cast<int>(std::lround(horizon / tau)); }

MpcConfig mpc_config_for(const ProblemInstance& problem) {
  MpcConfig cfg;
  if (problem.overrides.mpc_tau) cfg.tau = *problem.overrides.mpc_tau;
  if (problem.overrides.mpc_horizon) cfg.horizon = *problem.overrides.mpc_horizon;
  if (problem.overrides.mpc_max_iters) cfg.max_iters = *problem.overrides.mpc_max_iters;
  return cfg;
}

namespace {

struct Weights {
  MatrixXd Q, R, QF;
};

void check_psd(const MatrixXd& M, const char* what) {
  if (!M.isApprox(M.transpose(), 1e-12)) throw ProblemError(std::string("MPC weight ") + what + " is not symmetric");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(M, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().size() > 0 && es.eigenvalues()[0] < -1e-12) {
    throw ProblemError(std::string("MPC weight ") + what + " is not positive semidefinite");
  }
}

Weights weights_for(const ProblemInstance& problem, const MpcConfig& cfg) {
  if (!(cfg.tau > 0.0) || cfg.horizon < cfg.tau) throw ProblemError("MPC: need tau > 0 and horizon >= tau");
  if (std::abs(cfg.horizon / cfg.tau - cfg.steps()) > 1e-9 * cfg.steps()) {
    throw ProblemError("MPC: horizon must be an integer multiple of tau");
  }
  const auto n = static_cast<Eigen::Index>(problem.n());
  const auto m = static_cast<Eigen::Index>(problem.m());
  Weights w;
  w.Q = cfg.Q.size() ? cfg.Q : MatrixXd::Identity(n, n);
  w.R = cfg.R.size() ? cfg.R : MatrixXd::Identity(m, m);
  w.QF = cfg.QF.size() ? cfg.QF : MatrixXd(static_cast<double>(cfg.steps()) * MatrixXd::Identity(n, n));
  if (w.Q.rows() != n || w.Q.cols() != n || w.QF.rows() != n || w.QF.cols() != n || w.R.rows() != m || w.R.cols() != m) {
    throw DimensionError("MPC: weight dimensions do not match the system");
  }
  check_psd(w.Q, "Q");
  check_psd(w.R, "R");
  check_psd(w.QF, "Q_F");
  return w;
}

std::vector<VectorXd> rollout(const ControlAffineSystem& sys, double tau, const VectorXd& x0,
                              const std::vector<VectorXd>& inputs) {
  std::vector<VectorXd> xs;
  xs.reserve(inputs.size() + 1);
  xs.push_back(x0);
  for (const auto& u : inputs) xs.push_back(rk4_step(sys, xs.back(), u, tau));
  return xs;
}

double cost_of(const Weights& w, double tau, const std::vector<VectorXd>& xs, const std::vector<VectorXd>& us) {
  double J = 0.0;
  for (std::size_t k = 0; k < us.size(); ++k) {
    J += tau * (xs[k].dot(w.Q * xs[k]) + us[k].dot(w.R * us[k]));
  }
  J += xs.back().dot(w.QF * xs.back());
  return J;
}

// Vector-Jacobian product through one RK4 step: given lam = dJ/dx', returns
// dJ/dx (through this step only) and accumulates dJ/du into gu.
VectorXd rk4_vjp(const ControlAffineSystem& sys, const VectorXd& x, const VectorXd& u, double h,
                 const VectorXd& lam, VectorXd& gu) {
  const VectorXd k1 = vector_field(sys, x, u);
  const VectorXd z2 = x + 0.5 * h * k1;
  const VectorXd k2 = vector_field(sys, z2, u);
  const VectorXd z3 = x + 0.5 * h * k2;
  const VectorXd k3 = vector_field(sys, z3, u);
  const VectorXd z4 = x + h * k3;

  VectorXd gx = lam;
  const VectorXd a4 = (h / 6.0) * lam;
  VectorXd zb = sys.jacobian_x(z4, u).transpose() * a4;
  gu += sys.input_matrix(z4).transpose() * a4;
  gx += zb;
  const VectorXd a3 = (h / 3.0) * lam + h * zb;
  zb = sys.jacobian_x(z3, u).transpose() * a3;
  gu += sys.input_matrix(z3).transpose() * a3;
  gx += zb;
  const VectorXd a2 = (h / 3.0) * lam + 0.5 * h * zb;
  zb = sys.jacobian_x(z2, u).transpose() * a2;
  gu += sys.input_matrix(z2).transpose() * a2;
  gx += zb;
  const VectorXd a1 = (h / 6.0) * lam + 0.5 * h * zb;
  gx += sys.jacobian_x(x, u).transpose() * a1;
  gu += sys.input_matrix(x).transpose() * a1;
  return gx;
}

std::vector<VectorXd> gradient_of(const ProblemInstance& problem, const Weights& w, double tau,
                                  const std::vector<VectorXd>& xs, const std::vector<VectorXd>& us) {
  const std::size_t N = us.size();
  std::vector<VectorXd> g(N);
  VectorXd lam = 2.0 * w.QF * xs[N];
  for (std::size_t k = N; k-- > 0;) {
    VectorXd gu = 2.0 * tau * w.R * us[k];
    const VectorXd gx = rk4_vjp(problem.system, xs[k], us[k], tau, lam, gu);
    g[k] = gu;
    lam = gx + 2.0 * tau * w.Q * xs[k];
  }
  return g;
}

void check_start(const ProblemInstance& problem, const VectorXd& x0) {
  require_dim(static_cast<std::size_t>(x0.size()), problem.n(), "MPC initial state");
  if (!problem.safe_box.contains(x0)) throw ProblemError("MPC: initial state outside S_box");
}

}  // namespace

double mpc_cost(const ProblemInstance& problem, const MpcConfig& cfg, const VectorXd& x0,
                const std::vector<VectorXd>& inputs) {
  const Weights w = weights_for(problem, cfg);
  return cost_of(w, cfg.tau, rollout(problem.system, cfg.tau, x0, inputs), inputs);
}

std::vector<VectorXd> mpc_gradient(const ProblemInstance& problem, const MpcConfig& cfg, const VectorXd& x0,
                                   const std::vector<VectorXd>& inputs) {
  const Weights w = weights_for(problem, cfg);
  return gradient_of(problem, w, cfg.tau, rollout(problem.system, cfg.tau, x0, inputs), inputs);
}

MpcSolution mpc_solve(const ProblemInstance& problem, const MpcConfig& cfg, const VectorXd& x0) {
  check_start(problem, x0);
  const Weights w = weights_for(problem, cfg);
  const int N = cfg.steps();
  const auto m = static_cast<Eigen::Index>(problem.m());
  std::vector<VectorXd> us(static_cast<std::size_t>(N), VectorXd::Zero(m));
  for (auto& u : us) u = problem.inputs.project(u);
  std::vector<VectorXd> xs = rollout(problem.system, cfg.tau, x0, us);
  double J = cost_of(w, cfg.tau, xs, us);

  MpcSolution sol;
  std::vector<VectorXd> g = gradient_of(problem, w, cfg.tau, xs, us);
  std::vector<VectorXd> prev_u, prev_g;
  for (int it = 0; it < cfg.max_iters; ++it) {
    sol.iterations = it;
    // Stationarity measure: projected unit gradient step.
    double pg = 0.0;
    for (std::size_t k = 0; k < us.size(); ++k) {
      pg = std::max(pg, (us[k] - problem.inputs.project(us[k] - g[k])).cwiseAbs().maxCoeff());
    }
    if (pg <= cfg.grad_tol) {
      sol.converged = true;
      break;
    }
    // Barzilai-Borwein trial step, then backtracking.
    double step = cfg.initial_step;
    if (!prev_u.empty()) {
      double ss = 0.0, sy = 0.0;
      for (std::size_t k = 0; k < us.size(); ++k) {
        const VectorXd s = us[k] - prev_u[k];
        ss += s.squaredNorm();
        sy += s.dot(g[k] - prev_g[k]);
      }
      if (sy > 0.0) step = std::min(ss / sy, 1e6);
    }
    bool accepted = false;
    for (int ls = 0; ls < 80; ++ls) {
      std::vector<VectorXd> trial(us.size());
      double decrease = 0.0;
      for (std::size_t k = 0; k < us.size(); ++k) {
        trial[k] = problem.inputs.project(us[k] - step * g[k]);
        decrease += g[k].dot(us[k] - trial[k]);
      }
      auto xt = rollout(problem.system, cfg.tau, x0, trial);
      const double Jt = cost_of(w, cfg.tau, xt, trial);
      if (std::isfinite(Jt) && Jt <= J - cfg.armijo * decrease) {
        assert(Jt <= J);
        prev_u = std::move(us);
        prev_g = std::move(g);
        us = std::move(trial);
        xs = std::move(xt);
        J = Jt;
        g = gradient_of(problem, w, cfg.tau, xs, us);
        accepted = true;
        break;
      }
      step *= cfg.shrink;
    }
    if (!accepted) break;
    sol.iterations = it + 1;
  }
  sol.inputs = std::move(us);
  sol.cost = J;
  return sol;
}

Demonstration demonstrate(const ProblemInstance& problem, const MpcConfig& cfg, const VectorXd& x) {
  const MpcSolution sol = mpc_solve(problem, cfg, x);
  Demonstration d;
  d.x = x;
  d.u = sol.inputs.front();
  d.plan = sol.inputs;
  d.states = rollout(problem.system, cfg.tau, x, sol.inputs);
  d.cost = sol.cost;
  d.converged = sol.converged;
  d.iterations = sol.iterations;
  return d;
}

Demonstration demonstrate_witness(const ProblemInstance& problem, const MpcConfig& cfg, const MomentWitness& w) {
  return demonstrate(problem, cfg, problem.safe_box.clamp(project(w, problem.safe_box)));
}

}  // namespace clfsyn
