#pragma once

#include <vector>

#include "clfsyn/dynamics.hpp"
#include "clfsyn/polynomial.hpp"

namespace clfsyn {

/// grad V . f(x, u) = drift_term(x) + sum_i input_terms[i](x) * u_i.
struct LieDecomposition {
  Polynomial drift_term;
  std::vector<Polynomial> input_terms;

  double eval(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;
};

LieDecomposition lie_decompose(const Polynomial& V, const ControlAffineSystem& sys);

}  // namespace clfsyn
