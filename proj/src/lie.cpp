#include "clfsyn/lie.hpp"

#include "clfsyn/errors.hpp"

namespace clfsyn {

double LieDecomposition::eval(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
  require_dim(static_cast<std::size_t>(u.size()), input_terms.size(), "LieDecomposition::eval");
  double v = drift_term.eval(x);
  for (std::size_t i = 0; i < input_terms.size(); ++i) {
    v += input_terms[i].eval(x) * u[static_cast<Eigen::Index>(i)];
  }
  return v;
}

LieDecomposition lie_decompose(const Polynomial& V, const ControlAffineSystem& sys) {
  require_dim(V.nvars(), sys.n(), "lie_decompose");
  const auto g = grad(V);
  LieDecomposition out;
  out.drift_term = dot(g, sys.drift());
  for (const auto& channel : sys.channels()) out.input_terms.push_back(dot(g, channel));
  return out;
}

}  // namespace clfsyn
