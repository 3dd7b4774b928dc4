#include "clfsyn/dynamics.hpp"

#include <cmath>

#include "clfsyn/errors.hpp"

namespace clfsyn {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

ControlAffineSystem::ControlAffineSystem(std::vector<Polynomial> drift,
                                         std::vector<std::vector<Polynomial>> channels)
    : n_(drift.size()), drift_(std::move(drift)), channels_(std::move(channels)) {
  if (n_ == 0) throw ProblemError("ControlAffineSystem: empty state");
  for (const auto& p : drift_) require_dim(p.nvars(), n_, "ControlAffineSystem drift");
  for (const auto& ch : channels_) {
    require_dim(ch.size(), n_, "ControlAffineSystem channel length");
    for (const auto& p : ch) require_dim(p.nvars(), n_, "ControlAffineSystem channel");
  }
  drift_jac_.resize(n_);
  for (std::size_t r = 0; r < n_; ++r) drift_jac_[r] = grad(drift_[r]);
  channel_jac_.resize(channels_.size());
  for (std::size_t i = 0; i < channels_.size(); ++i) {
    channel_jac_[i].resize(n_);
    for (std::size_t r = 0; r < n_; ++r) channel_jac_[i][r] = grad(channels_[i][r]);
  }
}

VectorXd ControlAffineSystem::eval_drift(const VectorXd& x) const {
  require_dim(static_cast<std::size_t>(x.size()), n_, "eval_drift");
  VectorXd out(static_cast<Index>(n_));
  for (std::size_t r = 0; r < n_; ++r) out[static_cast<Index>(r)] = drift_[r].eval(x);
  return out;
}

MatrixXd ControlAffineSystem::input_matrix(const VectorXd& x) const {
  require_dim(static_cast<std::size_t>(x.size()), n_, "input_matrix");
  MatrixXd G(static_cast<Index>(n_), static_cast<Index>(m()));
  for (std::size_t i = 0; i < m(); ++i) {
    for (std::size_t r = 0; r < n_; ++r) {
      G(static_cast<Index>(r), static_cast<Index>(i)) = channels_[i][r].eval(x);
    }
  }
  return G;
}

MatrixXd ControlAffineSystem::jacobian_x(const VectorXd& x, const VectorXd& u) const {
  require_dim(static_cast<std::size_t>(x.size()), n_, "jacobian_x state");
  require_dim(static_cast<std::size_t>(u.size()), m(), "jacobian_x input");
  const auto n = static_cast<Index>(n_);
  MatrixXd J(n, n);
  for (std::size_t r = 0; r < n_; ++r) {
    for (std::size_t c = 0; c < n_; ++c) {
      double v = drift_jac_[r][c].eval(x);
      for (std::size_t i = 0; i < m(); ++i) {
        const double ui = u[static_cast<Index>(i)];
        if (ui != 0.0) v += channel_jac_[i][r][c].eval(x) * ui;
      }
      J(static_cast<Index>(r), static_cast<Index>(c)) = v;
    }
  }
  return J;
}

VectorXd vector_field(const ControlAffineSystem& sys, const VectorXd& x, const VectorXd& u) {
  require_dim(static_cast<std::size_t>(u.size()), sys.m(), "vector_field input");
  VectorXd f = sys.eval_drift(x);
  if (sys.m() > 0) f += sys.input_matrix(x) * u;
  return f;
}

bool ReachWhileStay::operator==(const ReachWhileStay& o) const {
  return init_set.nvars == o.init_set.nvars && init_set.constraints == o.init_set.constraints &&
         boundary_faces == o.boundary_faces && beta == o.beta && target_radius == o.target_radius;
}

Polynomial ProblemInstance::candidate(const VectorXd& c) const {
  require_dim(static_cast<std::size_t>(c.size()), basis.size(), "ProblemInstance::candidate");
  Polynomial v(n());
  for (std::size_t j = 0; j < basis.size(); ++j) v += basis[j] * c[static_cast<Index>(j)];
  return v;
}

void ProblemInstance::validate() const {
  const std::size_t nn = n();
  if (variables.size() != nn) throw ProblemError("variables: expected " + std::to_string(nn) + " names");
  require_dim(safe_set.nvars, nn, "safe_set");
  require_dim(safe_box.dim(), nn, "s_box");
  require_dim(inputs.dim(), m(), "inputs");
  require_dim(coeff_box.dim(), basis.size(), "coefficient box");
  if (basis.empty()) throw ProblemError("basis: at least one basis function required");
  const VectorXd origin = VectorXd::Zero(static_cast<Index>(nn));
  for (std::size_t j = 0; j < basis.size(); ++j) {
    require_dim(basis[j].nvars(), nn, "basis");
    if (std::abs(basis[j].eval(origin)) > 0.0) {
      throw ProblemError("basis[" + std::to_string(j) + "] does not vanish at the origin");
    }
  }
  for (std::size_t i = 0; i < safe_set.constraints.size(); ++i) {
    if (!(safe_set.constraints[i].eval(origin) < 0.0)) {
      throw ProblemError("safe_set[" + std::to_string(i) + "]: origin is not strictly inside S");
    }
  }
  if (!safe_box.contains(origin, 0.0) || !((safe_box.lower().array() < 0).all() &&
                                            (safe_box.upper().array() > 0).all())) {
    throw ProblemError("s_box: origin must be strictly inside the enclosing box");
  }
  if (!(exclusion_radius > 0.0)) throw ProblemError("exclusion radius must be positive");
  if (reach_while_stay) require_dim(reach_while_stay->init_set.nvars, nn, "reach_while_stay.init_set");
}

bool operator==(const ProblemInstance& a, const ProblemInstance& b) {
  return a.name == b.name && a.variables == b.variables && a.system == b.system &&
         a.safe_set.nvars == b.safe_set.nvars &&
         a.safe_set.constraints == b.safe_set.constraints && a.safe_box == b.safe_box &&
         a.inputs == b.inputs && a.basis == b.basis && a.coeff_box == b.coeff_box &&
         a.reach_while_stay == b.reach_while_stay &&
         a.exclusion_radius == b.exclusion_radius && a.overrides == b.overrides;
}

double default_exclusion_radius(const Box& safe_box) {
  return 0.01 * safe_box.half_widths().minCoeff();
}

std::vector<Polynomial> quadratic_basis(std::size_t n) {
  std::vector<Polynomial> out;
  for (const auto& m : homogeneous_monomials(n, 2)) out.push_back(Polynomial::monomial(m));
  return out;
}

BenchmarkId parse_benchmark_id(const std::string& name) {
  if (name == "double_integrator") return BenchmarkId::kDoubleIntegrator;
  if (name == "tora") return BenchmarkId::kTora;
  if (name == "bicycle") return BenchmarkId::kBicycle;
  if (name == "inverted_pendulum") return BenchmarkId::kInvertedPendulum;
  throw ProblemError("unknown benchmark id '" + name + "'");
}

std::string benchmark_name(BenchmarkId id) {
  switch (id) {
    case BenchmarkId::kDoubleIntegrator: return "double_integrator";
    case BenchmarkId::kTora: return "tora";
    case BenchmarkId::kBicycle: return "bicycle";
    case BenchmarkId::kInvertedPendulum: return "inverted_pendulum";
  }
  return "unknown";
}

std::vector<BenchmarkId> all_benchmarks() {
  return {BenchmarkId::kDoubleIntegrator, BenchmarkId::kTora, BenchmarkId::kBicycle,
          BenchmarkId::kInvertedPendulum};
}

namespace {

Polynomial var(std::size_t n, std::size_t i) { return Polynomial::variable(n, i); }
Polynomial cst(std::size_t n, double v) { return Polynomial::constant(n, v); }

SemialgebraicSet ball_set(std::size_t n, double radius) {
  SemialgebraicSet s;
  s.nvars = n;
  Polynomial r = cst(n, -radius * radius);
  for (std::size_t i = 0; i < n; ++i) r += var(n, i) * var(n, i);
  s.constraints.push_back(r);
  return s;
}

void finish(ProblemInstance& p, const Box& box) {
  p.safe_box = box;
  p.safe_set = box_to_semialgebraic(box);
  p.basis = quadratic_basis(p.n());
  p.basis_labels.clear();
  for (const auto& g : p.basis) p.basis_labels.push_back(format_polynomial(g, p.variables));
  p.coeff_box = Box::symmetric(p.basis.size(), 100.0);
  p.exclusion_radius = default_exclusion_radius(box);
  p.validate();
}

ProblemInstance make_double_integrator() {
  const std::size_t n = 2;
  ProblemInstance p;
  p.name = "double_integrator";
  p.variables = {"x1", "x2"};
  p.system = ControlAffineSystem({var(n, 1), cst(n, 0)}, {{cst(n, 0), cst(n, 1)}});
  p.inputs = interval_input_polytope(VectorXd::Constant(1, -1.0), VectorXd::Constant(1, 1.0));
  p.overrides.mpc_tau = 0.25;
  p.overrides.mpc_horizon = 5.0;
  p.overrides.relaxation_degree = 2;
  finish(p, Box::symmetric(2, 1.0));
  return p;
}

ProblemInstance make_tora(double eps) {
  const std::size_t n = 4;
  ProblemInstance p;
  p.name = "tora";
  p.variables = {"x1", "x2", "x3", "x4"};
  // sin(x3) ~ x3 - x3^3/6 on [-2, 2].
  const Polynomial sin3 = var(n, 2) - var(n, 2).pow(3) * (1.0 / 6.0);
  p.system = ControlAffineSystem({var(n, 1), var(n, 0) * -1.0 + sin3 * eps, var(n, 3), cst(n, 0)},
                                 {{cst(n, 0), cst(n, 0), cst(n, 0), cst(n, 1)}});
  p.inputs = interval_input_polytope(VectorXd::Constant(1, -1.5), VectorXd::Constant(1, 1.5));
  p.overrides.mpc_tau = 1.0;
  p.overrides.mpc_horizon = 30.0;
  p.overrides.relaxation_degree = 4;
  VectorXd lo(4), hi(4);
  lo << -1, -1, -2, -1;
  hi << 1, 1, 2, 1;
  finish(p, Box(lo, hi));
  return p;
}

ProblemInstance make_bicycle() {
  const std::size_t n = 4;
  ProblemInstance p;
  p.name = "bicycle";
  // v is the deviation from the target speed 5.
  p.variables = {"y", "v", "theta", "sigma"};
  const Polynomial speed = var(n, 1) + cst(n, 5.0);
  p.system = ControlAffineSystem(
      {speed * var(n, 2), cst(n, 0), speed * var(n, 3), cst(n, 0)},
      {{cst(n, 0), cst(n, 1), cst(n, 0), cst(n, 0)}, {cst(n, 0), cst(n, 0), cst(n, 0), cst(n, 1)}});
  p.inputs = interval_input_polytope(VectorXd::Constant(2, -10.0), VectorXd::Constant(2, 10.0));
  p.overrides.mpc_tau = 0.4;
  p.overrides.mpc_horizon = 8.0;
  p.overrides.relaxation_degree = 3;
  VectorXd lo(4), hi(4);
  lo << -2, -2, -1, -1;
  hi << 2, 2, 1, 1;
  finish(p, Box(lo, hi));
  ReachWhileStay rws;
  rws.init_set = ball_set(n, 0.4);
  rws.boundary_faces = p.safe_set.constraints;
  rws.beta = 1.0;
  rws.target_radius = 0.1;
  p.reach_while_stay = rws;
  return p;
}

ProblemInstance make_inverted_pendulum() {
  const std::size_t n = 4;
  ProblemInstance p;
  p.name = "inverted_pendulum";
  p.variables = {"x", "xd", "theta", "thetad"};
  constexpr double kLength = 0.305;
  const Polynomial th = var(n, 2);
  const Polynomial drift_acc = th * PendulumFits::kDriftA1 + th.pow(3) * PendulumFits::kDriftA3;
  const Polynomial cos_fit = cst(n, PendulumFits::kCosC0) + th.pow(2) * PendulumFits::kCosC2;
  p.system = ControlAffineSystem({var(n, 1), drift_acc, var(n, 3), cst(n, 0)},
                                 {{cst(n, 0), cst(n, 4.0), cst(n, 0), cos_fit * (-3.0 / kLength)}});
  p.inputs = interval_input_polytope(VectorXd::Constant(1, -20.0), VectorXd::Constant(1, 20.0));
  p.overrides.mpc_tau = 0.04;
  p.overrides.mpc_horizon = 2.0;
  p.overrides.relaxation_degree = 5;
  finish(p, Box::symmetric(4, 1.0));
  ReachWhileStay rws;
  rws.init_set = ball_set(n, 0.1);
  rws.boundary_faces = p.safe_set.constraints;
  rws.beta = 1.0;
  rws.target_radius = 0.1;
  p.reach_while_stay = rws;
  return p;
}

}  // namespace

ProblemInstance load_benchmark(BenchmarkId id, const BenchmarkOptions& opts) {
  switch (id) {
    case BenchmarkId::kDoubleIntegrator: return make_double_integrator();
    case BenchmarkId::kTora: return make_tora(opts.tora_epsilon);
    case BenchmarkId::kBicycle: return make_bicycle();
    case BenchmarkId::kInvertedPendulum: return make_inverted_pendulum();
  }
  throw ProblemError("unknown benchmark id");
}

}  // namespace clfsyn
