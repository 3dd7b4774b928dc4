#include "clfsyn/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "clfsyn/errors.hpp"

namespace clfsyn {

using Eigen::VectorXd;

VectorXd rk4_step(const ControlAffineSystem& sys, const VectorXd& x, const VectorXd& u, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("rk4_step: step must be positive");
  const VectorXd k1 = vector_field(sys, x, u);
  const VectorXd k2 = vector_field(sys, x + 0.5 * h * k1, u);
  const VectorXd k3 = vector_field(sys, x + 0.5 * h * k2, u);
  const VectorXd k4 = vector_field(sys, x + h * k3, u);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Trajectory simulate(const ControlAffineSystem& sys, const FeedbackFn& law, const VectorXd& x0,
                    double t_end, const SimulateOptions& opts) {
  require_dim(static_cast<std::size_t>(x0.size()), sys.n(), "simulate x0");
  if (!(opts.h > 0.0)) throw std::invalid_argument("simulate: step must be positive");
  Trajectory tr;
  double t = 0.0;
  VectorXd x = x0;
  auto record = [&]() {
    tr.times.push_back(t);
    tr.states.push_back(x);
    if (opts.V) tr.values.push_back(opts.V->eval(x));
  };
  record();
  auto done = [&]() {
    if (opts.safe_set && !opts.safe_set->contains(x, opts.membership_tol)) {
      tr.exited = true;
      return true;
    }
    if (opts.target_radius && x.norm() <= *opts.target_radius) {
      tr.converged = true;
      return true;
    }
    return false;
  };
  if (done()) return tr;
  while (t < t_end - 1e-12) {
    const double h = std::min(opts.h, t_end - t);
    VectorXd u;
    try {
      u = law(x);
    } catch (const std::exception& e) {
      throw SimulationError(std::string("feedback law failed: ") + e.what(), tr);
    }
    x = rk4_step(sys, x, u, h);
    t += h;
    tr.inputs.push_back(u);
    record();
    if (done()) break;
  }
  return tr;
}

double beta_star(const Polynomial& V, const ProblemInstance& problem, int samples, unsigned seed) {
  const std::size_t n = problem.n();
  const auto& box = problem.safe_box;
  std::vector<VectorXd> dirs;
  for (std::size_t i = 0; i < n; ++i) {
    VectorXd e = VectorXd::Zero(static_cast<Eigen::Index>(n));
    e[static_cast<Eigen::Index>(i)] = 1.0;
    dirs.push_back(e);
    dirs.push_back(-e);
  }
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  for (int s = 0; s < samples; ++s) {
    VectorXd d(n);
    for (std::size_t i = 0; i < n; ++i) d[static_cast<Eigen::Index>(i)] = nd(rng);
    if (d.norm() > 0) dirs.push_back(d.normalized());
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& d : dirs) {
    // Exit parameter of the ray from the box.
    double tmax = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Index ii = static_cast<Eigen::Index>(i);
      if (d[ii] > 0) tmax = std::min(tmax, box.upper()[ii] / d[ii]);
      if (d[ii] < 0) tmax = std::min(tmax, box.lower()[ii] / d[ii]);
    }
    double t = tmax;
    if (!problem.safe_set.contains(tmax * d, 0.0)) {
      double lo = 0.0;
      double hi = tmax;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (problem.safe_set.contains(mid * d, 0.0)) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      t = lo;
    }
    best = std::min(best, V.eval(t * d));
  }
  if (!std::isfinite(best)) throw NumericalError("beta_star: no boundary samples");
  return 0.95 * best;
}

}  // namespace clfsyn
