#include "clfsyn/sets.hpp"

#include <cmath>
#include <limits>

#include "clfsyn/errors.hpp"
#include "clfsyn/lp.hpp"

namespace clfsyn {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

bool SemialgebraicSet::contains(const VectorXd& x, double tol) const {
  require_dim(static_cast<std::size_t>(x.size()), nvars, "SemialgebraicSet::contains");
  for (const auto& r : constraints) {
    if (r.eval(x) > tol) return false;
  }
  return true;
}

double SemialgebraicSet::max_violation(const VectorXd& x) const {
  double v = -std::numeric_limits<double>::infinity();
  for (const auto& r : constraints) v = std::max(v, r.eval(x));
  return v;
}

Box::Box(VectorXd lower, VectorXd upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  require_dim(static_cast<std::size_t>(upper_.size()), static_cast<std::size_t>(lower_.size()), "Box");
  if (!(lower_.array() < upper_.array()).all()) {
    throw ProblemError("Box: lower must be strictly below upper in every coordinate");
  }
}

Box Box::symmetric(std::size_t dim, double half_width) {
  const auto d = static_cast<Index>(dim);
  return Box(VectorXd::Constant(d, -half_width), VectorXd::Constant(d, half_width));
}

bool Box::contains(const VectorXd& x, double tol) const {
  require_dim(static_cast<std::size_t>(x.size()), dim(), "Box::contains");
  return ((x - upper_).array() <= tol).all() && ((lower_ - x).array() <= tol).all();
}

VectorXd Box::clamp(const VectorXd& x) const {
  require_dim(static_cast<std::size_t>(x.size()), dim(), "Box::clamp");
  return x.cwiseMax(lower_).cwiseMin(upper_);
}

Ball::Ball(VectorXd c, double r) : center(std::move(c)), radius(r) {
  if (!(r > 0.0)) throw ProblemError("Ball: radius must be positive");
}

bool Ball::contains(const VectorXd& x, double tol) const {
  require_dim(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(center.size()), "Ball::contains");
  return (x - center).norm() - radius <= tol;
}

InputPolytope::InputPolytope(MatrixXd A, VectorXd b) : A_(std::move(A)), b_(std::move(b)) {
  require_dim(static_cast<std::size_t>(b_.size()), static_cast<std::size_t>(A_.rows()), "InputPolytope");
  const Index m = A_.cols();
  const Index l = A_.rows();
  if (m == 0) {
    interior_ = VectorXd();
    vertices_.emplace_back(VectorXd());
    return;
  }
  // Slack maximisation: max s  s.t.  A u - s 1 >= b,  s <= 1.
  MatrixXd G(l + 1, m + 1);
  VectorXd h(l + 1);
  G.topLeftCorner(l, m) = -A_;
  G.topRightCorner(l, 1).setOnes();
  h.head(l) = -b_;
  G.row(l).setZero();
  G(l, m) = 1.0;
  h[l] = 1.0;
  VectorXd c = VectorXd::Zero(m + 1);
  c[m] = 1.0;
  LpResult slack = solve_inequality_lp(G, h, c);
  if (slack.status != LpStatus::kOptimal || slack.value <= 0.0) {
    throw ProblemError("InputPolytope: set {u : A u >= b} has empty interior");
  }
  interior_ = slack.x.head(m);
  for (Index i = 0; i < m; ++i) {
    for (double dir : {1.0, -1.0}) {
      VectorXd obj = VectorXd::Zero(m);
      obj[i] = dir;
      LpResult r = solve_inequality_lp(-A_, -b_, obj);
      if (r.status != LpStatus::kOptimal) {
        throw ProblemError("InputPolytope: set {u : A u >= b} is unbounded");
      }
    }
  }
  vertices_ = polytope_vertices(A_, b_);

  // Interval detection: every row is +-e_i and each coordinate has both sides.
  lo_ = VectorXd::Constant(m, -std::numeric_limits<double>::infinity());
  hi_ = VectorXd::Constant(m, std::numeric_limits<double>::infinity());
  bool interval = true;
  for (Index r = 0; r < l && interval; ++r) {
    Index nz = -1;
    for (Index j = 0; j < m; ++j) {
      if (A_(r, j) != 0.0) {
        if (nz >= 0) {
          interval = false;
          break;
        }
        nz = j;
      }
    }
    if (!interval || nz < 0) {
      interval = false;
      break;
    }
    const double a = A_(r, nz);
    if (a > 0) {
      lo_[nz] = std::max(lo_[nz], b_[r] / a);
    } else {
      hi_[nz] = std::min(hi_[nz], b_[r] / a);
    }
  }
  interval_ = interval && lo_.allFinite() && hi_.allFinite();
}

InputPolytope InputPolytope::from_upper_form(const MatrixXd& A, const VectorXd& b) {
  return InputPolytope(-A, -b);
}

bool InputPolytope::contains(const VectorXd& u, double tol) const {
  require_dim(static_cast<std::size_t>(u.size()), dim(), "InputPolytope::contains");
  if (A_.rows() == 0) return true;
  return ((A_ * u - b_).array() >= -tol).all();
}

VectorXd InputPolytope::project(const VectorXd& u) const {
  require_dim(static_cast<std::size_t>(u.size()), dim(), "InputPolytope::project");
  if (dim() == 0) return u;
  if (interval_) return u.cwiseMax(lo_).cwiseMin(hi_);
  return dykstra_projection(u, A_, b_);
}

SemialgebraicSet box_to_semialgebraic(const Box& b) {
  SemialgebraicSet s;
  s.nvars = b.dim();
  for (std::size_t i = 0; i < b.dim(); ++i) {
    const auto ii = static_cast<Index>(i);
    const Polynomial xi = Polynomial::variable(s.nvars, i);
    s.constraints.push_back(xi - Polynomial::constant(s.nvars, b.upper()[ii]));
    s.constraints.push_back(Polynomial::constant(s.nvars, b.lower()[ii]) - xi);
  }
  return s;
}

InputPolytope interval_input_polytope(const VectorXd& lo, const VectorXd& hi) {
  require_dim(static_cast<std::size_t>(hi.size()), static_cast<std::size_t>(lo.size()),
              "interval_input_polytope");
  if (!(lo.array() < hi.array()).all()) {
    throw ProblemError("interval_input_polytope: empty interval");
  }
  const Index m = lo.size();
  MatrixXd A(2 * m, m);
  A << MatrixXd::Identity(m, m), -MatrixXd::Identity(m, m);
  VectorXd b(2 * m);
  b << lo, -hi;
  return InputPolytope(std::move(A), std::move(b));
}

}  // namespace clfsyn
