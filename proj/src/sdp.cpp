#include "clfsyn/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "clfsyn/errors.hpp"

namespace clfsyn {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

int SdpProblem::add_block(int size, bool diagonal) {
  Block blk;
  blk.size = size;
  blk.diagonal = diagonal;
  blk.constant = MatrixXd::Zero(size, diagonal ? 1 : size);
  blocks.push_back(std::move(blk));
  return static_cast<int>(blocks.size()) - 1;
}

void SdpProblem::add_coefficient(int block, int var, int row, int col, double value) {
  if (value == 0.0) return;
  if (row > col) std::swap(row, col);
  Block& blk = blocks.at(static_cast<std::size_t>(block));
  if (blk.diagonal && row != col) {
    throw std::invalid_argument("SdpProblem: off-diagonal entry in a diagonal block");
  }
  blk.entries.push_back({var, row, col, value});
}

std::vector<MatrixXd> SdpProblem::slack(const VectorXd& y) const {
  std::vector<MatrixXd> S;
  S.reserve(blocks.size());
  for (const auto& blk : blocks) {
    MatrixXd s = blk.constant;
    for (const auto& e : blk.entries) {
      const double d = e.value * y[e.var];
      if (blk.diagonal) {
        s(e.row, 0) -= d;
      } else {
        s(e.row, e.col) -= d;
        if (e.row != e.col) s(e.col, e.row) -= d;
      }
    }
    S.push_back(std::move(s));
  }
  return S;
}

namespace {

// Diagonal blocks are stored as a single column holding the diagonal.

double min_eigenvalue(const MatrixXd& m, bool diagonal) {
  if (m.rows() == 0) return std::numeric_limits<double>::infinity();
  if (diagonal) return m.col(0).minCoeff();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

// Largest alpha in (0, inf] with M + alpha dM PSD, given M positive definite.
double max_step(const MatrixXd& M, const MatrixXd& dM, bool diagonal) {
  if (M.rows() == 0) return std::numeric_limits<double>::infinity();
  double lam = 0.0;
  if (diagonal) {
    lam = (dM.col(0).array() / M.col(0).array()).minCoeff();
  } else {
    Eigen::LLT<MatrixXd> llt(M);
    if (llt.info() != Eigen::Success) return 0.0;
    MatrixXd T = llt.matrixL().solve(dM);
    const MatrixXd Tt = T.transpose();
    T = llt.matrixL().solve(Tt).transpose().eval();
    T = 0.5 * (T + T.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(T, Eigen::EigenvaluesOnly);
    lam = es.eigenvalues()[0];
  }
  if (lam >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lam;
}

bool positive_definite(const MatrixXd& S, bool diagonal) {
  if (S.rows() == 0) return true;
  if (diagonal) return (S.col(0).array() > 0).all();
  Eigen::LLT<MatrixXd> llt(S);
  return llt.info() == Eigen::Success;
}

bool invert_pd(const MatrixXd& S, bool diagonal, MatrixXd& W) {
  if (S.rows() == 0) {
    W = S;
    return true;
  }
  if (diagonal) {
    if ((S.col(0).array() <= 0).any()) return false;
    W = S.cwiseInverse();
    return true;
  }
  Eigen::LLT<MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) return false;
  W = llt.solve(MatrixXd::Identity(S.rows(), S.cols()));
  W = 0.5 * (W + W.transpose()).eval();
  return true;
}

double inner(const MatrixXd& a, const MatrixXd& b) { return (a.array() * b.array()).sum(); }

MatrixXd identity_like(int size, bool diagonal) {
  if (diagonal) return MatrixXd::Ones(size, 1);
  return MatrixXd::Identity(size, size);
}

// Product a * b * c for blocks of either kind.
MatrixXd triple(const MatrixXd& a, const MatrixXd& b, const MatrixXd& c, bool diagonal) {
  if (diagonal) return (a.array() * b.array() * c.array()).matrix();
  return a * b * c;
}

// Per-block entries grouped for Schur assembly.
struct GroupedBlock {
  std::vector<int> vars;  // distinct variables
  std::vector<std::vector<SdpProblem::Entry>> by_var;
  std::vector<std::vector<SdpProblem::Entry>> by_row;  // diagonal blocks only
};

std::vector<GroupedBlock> group_entries(const SdpProblem& p) {
  std::vector<GroupedBlock> out(p.blocks.size());
  std::vector<int> slot(static_cast<std::size_t>(p.num_vars), -1);
  for (std::size_t k = 0; k < p.blocks.size(); ++k) {
    auto& g = out[k];
    if (p.blocks[k].diagonal) {
      g.by_row.resize(static_cast<std::size_t>(p.blocks[k].size));
      for (const auto& e : p.blocks[k].entries) g.by_row[static_cast<std::size_t>(e.row)].push_back(e);
      continue;
    }
    for (const auto& e : p.blocks[k].entries) {
      int& s = slot[static_cast<std::size_t>(e.var)];
      if (s < 0) {
        s = static_cast<int>(g.vars.size());
        g.vars.push_back(e.var);
        g.by_var.emplace_back();
      }
      g.by_var[static_cast<std::size_t>(s)].push_back(e);
    }
    for (int v : g.vars) slot[static_cast<std::size_t>(v)] = -1;
  }
  return out;
}

// M_pq += tr(A_p X A_q W) for one block.
void accumulate_schur(const GroupedBlock& g, const MatrixXd& X, const MatrixXd& W, bool diagonal,
                      MatrixXd& M) {
  if (diagonal) {
    for (const auto& row : g.by_row) {
      if (row.empty()) continue;
      const int r = row.front().row;
      const double d = X(r, 0) * W(r, 0);
      for (const auto& ea : row) {
        for (const auto& eb : row) M(ea.var, eb.var) += d * ea.value * eb.value;
      }
    }
    return;
  }
  const std::size_t nv = g.vars.size();
  for (std::size_t a = 0; a < nv; ++a) {
    for (std::size_t b = a; b < nv; ++b) {
      double s = 0.0;
      for (const auto& e : g.by_var[a]) {
        const int ea = e.row;
        const int eb = e.col;
        const double fe = (ea == eb ? 0.5 : 1.0) * e.value;
        for (const auto& f : g.by_var[b]) {
          const int c = f.row;
          const int d = f.col;
          const double ff = (c == d ? 0.5 : 1.0) * f.value;
          s += fe * ff *
               (X(eb, c) * W(d, ea) + X(eb, d) * W(c, ea) + X(ea, c) * W(d, eb) +
                X(ea, d) * W(c, eb));
        }
      }
      M(g.vars[a], g.vars[b]) += s;
      if (a != b) M(g.vars[b], g.vars[a]) += s;
    }
  }
}

}  // namespace

double SdpProblem::min_slack_eigenvalue(const VectorXd& y) const {
  const auto S = slack(y);
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    m = std::min(m, min_eigenvalue(S[k], blocks[k].diagonal));
  }
  return m;
}

VectorXd SdpProblem::apply(const std::vector<MatrixXd>& X) const {
  VectorXd out = VectorXd::Zero(num_vars);
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const bool diag = blocks[k].diagonal;
    for (const auto& e : blocks[k].entries) {
      double x = 0.0;
      if (diag) {
        x = X[k](e.row, 0);
      } else {
        x = X[k](e.row, e.col) + (e.row != e.col ? X[k](e.col, e.row) : 0.0);
      }
      out[e.var] += e.value * x;
    }
  }
  return out;
}

SdpResult solve_sdp(const SdpProblem& p, const VectorXd& y0, const SdpOptions& opt) {
  require_dim(static_cast<std::size_t>(y0.size()), static_cast<std::size_t>(p.num_vars), "solve_sdp y0");
  require_dim(static_cast<std::size_t>(p.objective.size()), static_cast<std::size_t>(p.num_vars),
              "solve_sdp objective");
  const std::size_t nb = p.blocks.size();
  const auto grouped = group_entries(p);
  double total_dim = 0.0;
  for (const auto& blk : p.blocks) total_dim += blk.size;

  SdpResult res;
  VectorXd y = y0;
  std::vector<MatrixXd> S = p.slack(y);
  std::vector<MatrixXd> X(nb);
  std::vector<MatrixXd> W(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    if (min_eigenvalue(S[k], p.blocks[k].diagonal) <= 0.0) {
      throw NumericalError("solve_sdp: starting point is not strictly dual feasible");
    }
    X[k] = identity_like(p.blocks[k].size, p.blocks[k].diagonal);
  }
  const double bnorm = 1.0 + p.objective.cwiseAbs().maxCoeff();

  auto primal_objective = [&]() {
    double v = 0.0;
    for (std::size_t k = 0; k < nb; ++k) v += inner(p.blocks[k].constant, X[k]);
    return v;
  };
  auto finish = [&](SdpStatus st, int it) {
    res.status = st;
    res.y = y;
    res.X = X;
    res.iterations = it;
    res.dual_objective = p.objective.dot(y);
    res.primal_objective = primal_objective();
    res.primal_residual = (p.objective - p.apply(X)).lpNorm<1>();
    return res;
  };

  for (int it = 0; it < opt.max_iterations; ++it) {
    for (std::size_t k = 0; k < nb; ++k) {
      if (!invert_pd(S[k], p.blocks[k].diagonal, W[k])) return finish(SdpStatus::kNumericalFailure, it);
    }
    const VectorXd rp = p.objective - p.apply(X);
    double xs = 0.0;
    for (std::size_t k = 0; k < nb; ++k) xs += inner(X[k], S[k]);
    const double pobj = primal_objective();
    const double mu = xs / total_dim;
    const double dobj = p.objective.dot(y);

    SdpIterate state;
    state.iteration = it;
    state.y = &y;
    state.X = &X;
    state.primal_objective = pobj;
    state.dual_objective = dobj;
    state.primal_residual = rp.lpNorm<1>();
    state.residual = &rp;
    state.mu = mu;
    if (opt.stop && opt.stop(state)) return finish(SdpStatus::kStopped, it);
    const bool primal_ok = rp.cwiseAbs().maxCoeff() <= opt.feas_tol * bnorm;
    if (primal_ok && std::abs(pobj - dobj) <= opt.gap_tol * (1.0 + std::abs(dobj)) &&
        xs <= opt.gap_tol * (1.0 + std::abs(dobj))) {
      return finish(SdpStatus::kOptimal, it);
    }

    // Schur complement M_pq = tr(A_p X A_q W).
    MatrixXd M = MatrixXd::Zero(p.num_vars, p.num_vars);
    for (std::size_t k = 0; k < nb; ++k) {
      accumulate_schur(grouped[k], X[k], W[k], p.blocks[k].diagonal, M);
    }
    const double diag_scale = std::max(1e-300, M.diagonal().cwiseAbs().maxCoeff());
    Eigen::LLT<MatrixXd> chol(M);
    if (chol.info() != Eigen::Success) {
      M.diagonal().array() += 1e-13 * diag_scale;
      chol.compute(M);
      if (chol.info() != Eigen::Success) return finish(SdpStatus::kNumericalFailure, it);
    }

    // dX = target - X dS W, where target already holds -X plus any corrector.
    auto direction = [&](const VectorXd& rhs, const std::vector<MatrixXd>& target, VectorXd& dy,
                         std::vector<MatrixXd>& dS, std::vector<MatrixXd>& dX) {
      dy = chol.solve(rhs);
      dS.resize(nb);
      dX.resize(nb);
      for (std::size_t k = 0; k < nb; ++k) {
        const auto& blk = p.blocks[k];
        MatrixXd ds = MatrixXd::Zero(blk.size, blk.diagonal ? 1 : blk.size);
        for (const auto& e : blk.entries) {
          const double d = e.value * dy[e.var];
          if (blk.diagonal) {
            ds(e.row, 0) -= d;
          } else {
            ds(e.row, e.col) -= d;
            if (e.row != e.col) ds(e.col, e.row) -= d;
          }
        }
        MatrixXd dx = target[k] - triple(X[k], ds, W[k], blk.diagonal);
        if (!blk.diagonal) dx = 0.5 * (dx + dx.transpose()).eval();
        dS[k] = std::move(ds);
        dX[k] = std::move(dx);
      }
    };

    // Predictor.
    std::vector<MatrixXd> target(nb);
    for (std::size_t k = 0; k < nb; ++k) target[k] = -X[k];
    VectorXd dy_a;
    std::vector<MatrixXd> dS_a, dX_a;
    direction(p.objective, target, dy_a, dS_a, dX_a);
    double ap = std::numeric_limits<double>::infinity();
    double ad = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < nb; ++k) {
      ap = std::min(ap, max_step(X[k], dX_a[k], p.blocks[k].diagonal));
      ad = std::min(ad, max_step(S[k], dS_a[k], p.blocks[k].diagonal));
    }
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    double xs_aff = 0.0;
    for (std::size_t k = 0; k < nb; ++k) xs_aff += inner(X[k] + ap * dX_a[k], S[k] + ad * dS_a[k]);
    const double mu_aff = xs_aff / total_dim;
    double sigma = mu > 0 ? std::pow(std::max(0.0, mu_aff) / mu, 3.0) : 0.0;
    sigma = std::clamp(sigma, 0.0, 1.0);

    // Corrector: M dy = b - sigma mu A(W) + A(dX_a dS_a W).
    std::vector<MatrixXd> corr(nb);
    for (std::size_t k = 0; k < nb; ++k) {
      const bool diag = p.blocks[k].diagonal;
      MatrixXd c = sigma * mu * W[k] - triple(dX_a[k], dS_a[k], W[k], diag);
      corr[k] = diag ? c : (0.5 * (c + c.transpose())).eval();
      target[k] = corr[k] - X[k];
    }
    const VectorXd rhs = p.objective - p.apply(corr);
    VectorXd dy;
    std::vector<MatrixXd> dS, dX;
    direction(rhs, target, dy, dS, dX);

    ap = std::numeric_limits<double>::infinity();
    ad = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < nb; ++k) {
      ap = std::min(ap, max_step(X[k], dX[k], p.blocks[k].diagonal));
      ad = std::min(ad, max_step(S[k], dS[k], p.blocks[k].diagonal));
    }
    ap = std::min(1.0, opt.step_fraction * ap);
    ad = std::min(1.0, opt.step_fraction * ad);
    if (!(ap > 0.0) || !(ad > 0.0)) return finish(SdpStatus::kNumericalFailure, it);

    for (std::size_t k = 0; k < nb; ++k) X[k] += ap * dX[k];
    // Round-off can push S(y) out of the cone; back off until it is interior.
    VectorXd y_new = y + ad * dy;
    std::vector<MatrixXd> S_new = p.slack(y_new);
    double shrink = 1.0;
    for (int tries = 0; tries < 30; ++tries) {
      bool ok = true;
      for (std::size_t k = 0; k < nb && ok; ++k) ok = positive_definite(S_new[k], p.blocks[k].diagonal);
      if (ok) break;
      shrink *= 0.5;
      y_new = y + shrink * ad * dy;
      S_new = p.slack(y_new);
    }
    y = y_new;
    S = std::move(S_new);
  }
  return finish(SdpStatus::kIterationLimit, opt.max_iterations);
}

}  // namespace clfsyn
