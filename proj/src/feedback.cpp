#include "clfsyn/feedback.hpp"

#include <cmath>

#include "clfsyn/lp.hpp"

namespace clfsyn {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd eval_terms(const LieDecomposition& ld, const VectorXd& x) {
  VectorXd b(static_cast<Eigen::Index>(ld.input_terms.size()));
  for (std::size_t i = 0; i < ld.input_terms.size(); ++i) b[static_cast<Eigen::Index>(i)] = ld.input_terms[i].eval(x);
  return b;
}

}  // namespace

VectorXd sontag(const LieDecomposition& ld, const VectorXd& x) {
  const double a = ld.drift_term.eval(x);
  const VectorXd b = eval_terms(ld, x);
  const double bb = b.squaredNorm();
  if (std::sqrt(bb) <= 1e-12) return VectorXd::Zero(b.size());
  return -b * ((a + std::sqrt(a * a + bb * bb)) / bb);
}

VectorXd sontag(const Polynomial& V, const ControlAffineSystem& sys, const VectorXd& x) {
  return sontag(lie_decompose(V, sys), x);
}

MinNormResult min_norm(const Polynomial& V, const LieDecomposition& ld, const InputPolytope& U,
                       double sigma, const VectorXd& x) {
  if (sigma < 0.0) throw std::invalid_argument("min_norm: sigma must be nonnegative");
  const double a = ld.drift_term.eval(x);
  const VectorXd b = eval_terms(ld, x);
  const double v = V.eval(x);
  const Eigen::Index m = b.size();
  // G u <= h with the decrease row first, then -A u <= -b_U.
  MatrixXd G(U.A().rows() + 1, m);
  VectorXd h(U.A().rows() + 1);
  G.row(0) = b.transpose();
  G.bottomRows(U.A().rows()) = -U.A();
  h.tail(U.A().rows()) = -U.b();
  MinNormResult out;
  double s = sigma;
  for (int attempt = 0; attempt < 64; ++attempt) {
    h[0] = -s * v - a;
    const QpResult qp = project_onto_polyhedron_exact(VectorXd::Zero(m), G, h);
    // The QP accepts small violations; U itself must hold to round-off.
    if (qp.feasible && U.contains(qp.x, 1e-12 * (1.0 + U.b().cwiseAbs().maxCoeff()))) {
      out.u = qp.x;
      out.sigma = s;
      out.relaxed = attempt > 0;
      return out;
    }
    if (s == 0.0) break;
    s = attempt < 40 ? 0.5 * s : 0.0;
  }
  throw FeedbackInfeasible("min_norm: no admissible input decreases V at this state");
}

MinNormResult min_norm(const Polynomial& V, const ControlAffineSystem& sys, const InputPolytope& U,
                       double sigma, const VectorXd& x) {
  return min_norm(V, lie_decompose(V, sys), U, sigma, x);
}

FeedbackLaw::FeedbackLaw(Polynomial V, const ControlAffineSystem& sys, std::optional<InputPolytope> U,
                         FeedbackMode mode, double sigma)
    : V_(std::move(V)), ld_(lie_decompose(V_, sys)), U_(std::move(U)), mode_(mode), sigma_(sigma) {
  if (mode_ == FeedbackMode::kMinNorm && !U_) throw std::invalid_argument("FeedbackLaw: min-norm needs U");
}

VectorXd FeedbackLaw::operator()(const VectorXd& x) const {
  if (mode_ == FeedbackMode::kSontag) return sontag(ld_, x);
  return min_norm(V_, ld_, *U_, sigma_, x).u;
}

}  // namespace clfsyn
