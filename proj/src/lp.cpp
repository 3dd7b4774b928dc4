#include "clfsyn/lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "clfsyn/errors.hpp"

namespace clfsyn {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Tableau simplex on [T | rhs] with objective row `obj` (reduced costs).
// Returns false when unbounded.
bool run_simplex(MatrixXd& T, VectorXd& rhs, VectorXd& obj, double& obj_val,
                 std::vector<Index>& basis, Index allowed_cols, double tol) {
  const Index m = T.rows();
  for (int guard = 0; guard < 100000; ++guard) {
    Index enter = -1;
    for (Index j = 0; j < allowed_cols; ++j) {
      if (obj[j] < -tol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) return true;
    Index leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < m; ++i) {
      if (T(i, enter) > tol) {
        const double ratio = rhs[i] / T(i, enter);
        if (ratio < best - tol || (std::abs(ratio - best) <= tol && leave >= 0 &&
                                   basis[static_cast<std::size_t>(i)] <
                                       basis[static_cast<std::size_t>(leave)])) {
          best = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) return false;
    const double piv = T(leave, enter);
    T.row(leave) /= piv;
    rhs[leave] /= piv;
    for (Index i = 0; i < m; ++i) {
      if (i == leave) continue;
      const double f = T(i, enter);
      if (f != 0.0) {
        T.row(i) -= f * T.row(leave);
        rhs[i] -= f * rhs[leave];
      }
    }
    const double f = obj[enter];
    obj -= f * T.row(leave).transpose();
    obj_val -= f * rhs[leave];
    basis[static_cast<std::size_t>(leave)] = enter;
  }
  throw NumericalError("simplex: iteration limit reached");
}

}  // namespace

LpResult solve_standard_lp(const MatrixXd& A, const VectorXd& b, const VectorXd& c,
                           double tol) {
  const Index m = A.rows();
  const Index n = A.cols();
  require_dim(static_cast<std::size_t>(b.size()), static_cast<std::size_t>(m), "solve_standard_lp b");
  require_dim(static_cast<std::size_t>(c.size()), static_cast<std::size_t>(n), "solve_standard_lp c");

  // Phase I: artificials on every row after sign-normalising rhs.
  MatrixXd T = MatrixXd::Zero(m, n + m);
  VectorXd rhs(m);
  for (Index i = 0; i < m; ++i) {
    const double s = b[i] < 0 ? -1.0 : 1.0;
    T.block(i, 0, 1, n) = s * A.row(i);
    T(i, n + i) = 1.0;
    rhs[i] = s * b[i];
  }
  std::vector<Index> basis(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n + i;

  VectorXd obj = VectorXd::Zero(n + m);
  double obj_val = 0.0;
  for (Index i = 0; i < m; ++i) {
    obj.head(n) -= T.row(i).head(n).transpose();
    obj_val -= rhs[i];
  }
  run_simplex(T, rhs, obj, obj_val, basis, n + m, tol);

  LpResult result;
  const double scale = 1.0 + b.cwiseAbs().maxCoeff();
  if (-obj_val > tol * 1e2 * scale) {
    result.status = LpStatus::kInfeasible;
    return result;
  }
  // Drive artificials out of the basis where possible.
  for (Index i = 0; i < m; ++i) {
    if (basis[static_cast<std::size_t>(i)] < n) continue;
    Index col = -1;
    for (Index j = 0; j < n; ++j) {
      if (std::abs(T(i, j)) > 1e-9) {
        col = j;
        break;
      }
    }
    if (col < 0) continue;  // redundant row
    const double piv = T(i, col);
    T.row(i) /= piv;
    rhs[i] /= piv;
    for (Index k = 0; k < m; ++k) {
      if (k == i) continue;
      const double f = T(k, col);
      if (f != 0.0) {
        T.row(k) -= f * T.row(i);
        rhs[k] -= f * rhs[i];
      }
    }
    basis[static_cast<std::size_t>(i)] = col;
  }

  // Phase II on original columns only.
  obj = VectorXd::Zero(n + m);
  obj.head(n) = c;
  obj_val = 0.0;
  for (Index i = 0; i < m; ++i) {
    const Index bi = basis[static_cast<std::size_t>(i)];
    if (bi < n && obj[bi] != 0.0) {
      const double f = obj[bi];
      obj -= f * T.row(i).transpose();
      obj_val -= f * rhs[i];
    }
  }
  if (!run_simplex(T, rhs, obj, obj_val, basis, n, tol)) {
    result.status = LpStatus::kUnbounded;
    return result;
  }
  result.status = LpStatus::kOptimal;
  result.x = VectorXd::Zero(n);
  for (Index i = 0; i < m; ++i) {
    const Index bi = basis[static_cast<std::size_t>(i)];
    if (bi < n) result.x[bi] = std::max(0.0, rhs[i]);
  }
  result.value = c.dot(result.x);
  return result;
}

LpResult solve_inequality_lp(const MatrixXd& G, const VectorXd& h, const VectorXd& c,
                             double tol) {
  const Index m = G.rows();
  const Index n = G.cols();
  // x = xp - xm, G xp - G xm + s = h.
  MatrixXd A(m, 2 * n + m);
  A << G, -G, MatrixXd::Identity(m, m);
  VectorXd cost = VectorXd::Zero(2 * n + m);
  cost.head(n) = -c;
  cost.segment(n, n) = c;
  LpResult std_res = solve_standard_lp(A, h, cost, tol);
  LpResult out;
  out.status = std_res.status;
  if (std_res.status == LpStatus::kOptimal) {
    out.x = std_res.x.head(n) - std_res.x.segment(n, n);
    out.value = c.dot(out.x);
  }
  return out;
}

std::vector<VectorXd> polytope_vertices(const MatrixXd& A, const VectorXd& b, double tol) {
  const Index l = A.rows();
  const Index m = A.cols();
  std::vector<VectorXd> out;
  if (m == 0) {
    out.emplace_back(VectorXd());
    return out;
  }
  std::vector<Index> pick(static_cast<std::size_t>(m));
  // Enumerate m-subsets of rows in lexicographic order.
  for (Index i = 0; i < m; ++i) pick[static_cast<std::size_t>(i)] = i;
  if (l < m) return out;
  while (true) {
    MatrixXd S(m, m);
    VectorXd rhs(m);
    for (Index i = 0; i < m; ++i) {
      S.row(i) = A.row(pick[static_cast<std::size_t>(i)]);
      rhs[i] = b[pick[static_cast<std::size_t>(i)]];
    }
    Eigen::FullPivLU<MatrixXd> lu(S);
    if (lu.rank() == m) {
      VectorXd u = lu.solve(rhs);
      const double scale = 1.0 + u.cwiseAbs().maxCoeff();
      if (((A * u - b).array() >= -tol * scale).all()) {
        bool dup = false;
        for (const auto& v : out) {
          if ((v - u).cwiseAbs().maxCoeff() <= tol * scale) {
            dup = true;
            break;
          }
        }
        if (!dup) out.push_back(u);
      }
    }
    Index k = m - 1;
    while (k >= 0 && pick[static_cast<std::size_t>(k)] == l - m + k) --k;
    if (k < 0) break;
    ++pick[static_cast<std::size_t>(k)];
    for (Index j = k + 1; j < m; ++j) {
      pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return out;
}

QpResult project_onto_polyhedron_exact(const VectorXd& target, const MatrixXd& G,
                                       const VectorXd& h, double tol) {
  const Index m = G.cols();
  const Index k = G.rows();
  QpResult best;
  double best_dist = std::numeric_limits<double>::infinity();
  auto feasible = [&](const VectorXd& x) {
    const double scale = 1.0 + h.cwiseAbs().maxCoeff() + x.cwiseAbs().maxCoeff();
    return ((G * x - h).array() <= tol * 1e3 * scale).all();
  };
  if (feasible(target)) {
    best.feasible = true;
    best.x = target;
    return best;
  }
  // Each candidate active set gives a KKT point; keep the nearest feasible one.
  const Index max_active = std::min(k, m);
  std::vector<Index> pick;
  for (Index size = 1; size <= max_active; ++size) {
    pick.assign(static_cast<std::size_t>(size), 0);
    for (Index i = 0; i < size; ++i) pick[static_cast<std::size_t>(i)] = i;
    while (true) {
      MatrixXd Ga(size, m);
      VectorXd ha(size);
      for (Index i = 0; i < size; ++i) {
        Ga.row(i) = G.row(pick[static_cast<std::size_t>(i)]);
        ha[i] = h[pick[static_cast<std::size_t>(i)]];
      }
      // x = target - Ga^T mu,  Ga x = ha  =>  (Ga Ga^T) mu = Ga target - ha.
      MatrixXd GG = Ga * Ga.transpose();
      Eigen::FullPivLU<MatrixXd> lu(GG);
      if (lu.rank() == size) {
        VectorXd mu = lu.solve(Ga * target - ha);
        if ((mu.array() >= -1e-12).all()) {
          VectorXd x = target - Ga.transpose() * mu;
          const double dist = (x - target).squaredNorm();
          if (feasible(x) && dist < best_dist) {
            best_dist = dist;
            best.feasible = true;
            best.x = x;
          }
        }
      }
      Index j = size - 1;
      while (j >= 0 && pick[static_cast<std::size_t>(j)] == k - size + j) --j;
      if (j < 0) break;
      ++pick[static_cast<std::size_t>(j)];
      for (Index q = j + 1; q < size; ++q) {
        pick[static_cast<std::size_t>(q)] = pick[static_cast<std::size_t>(q - 1)] + 1;
      }
    }
  }
  return best;
}

VectorXd dykstra_projection(const VectorXd& target, const MatrixXd& A, const VectorXd& b,
                            int max_sweeps, double tol) {
  const Index l = A.rows();
  VectorXd x = target;
  MatrixXd incr = MatrixXd::Zero(l, target.size());
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double change = 0.0;
    for (Index i = 0; i < l; ++i) {
      const VectorXd y = x + incr.row(i).transpose();
      const double nrm2 = A.row(i).squaredNorm();
      VectorXd p = y;
      const double viol = b[i] - A.row(i).dot(y);
      if (viol > 0 && nrm2 > 0) p = y + (viol / nrm2) * A.row(i).transpose();
      incr.row(i) = (y - p).transpose();
      change = std::max(change, (p - x).cwiseAbs().maxCoeff());
      x = p;
    }
    if (change <= tol) break;
  }
  return x;
}

}  // namespace clfsyn
