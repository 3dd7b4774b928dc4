#include "clfsyn/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "clfsyn/errors.hpp"
#include "clfsyn/lie.hpp"
#include "clfsyn/sdp.hpp"

namespace clfsyn {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Halfspace Halfspace::normalized(VectorXd a, double b, std::string tag) {
  const double nrm = a.norm();
  Halfspace h;
  if (nrm > 0.0) {
    h.a = a / nrm;
    h.b = b / nrm;
  } else {
    h.a = std::move(a);
    h.b = b;
  }
  h.tag = std::move(tag);
  return h;
}

std::vector<Halfspace> WitnessConstraintPair::rows() const {
  std::vector<Halfspace> out;
  if (positivity) out.push_back(*positivity);
  if (decrease) out.push_back(*decrease);
  out.insert(out.end(), extra.begin(), extra.end());
  return out;
}

namespace {

VectorXd basis_values(const ProblemInstance& problem, const VectorXd& x) {
  VectorXd g(problem.r());
  for (std::size_t j = 0; j < problem.r(); ++j) g[static_cast<Eigen::Index>(j)] = problem.basis[j].eval(x);
  return g;
}

}  // namespace

WitnessConstraintPair witness_rows(const ProblemInstance& problem, const VectorXd& x, const VectorXd& u) {
  require_dim(static_cast<std::size_t>(x.size()), problem.n(), "witness_rows state");
  require_dim(static_cast<std::size_t>(u.size()), problem.m(), "witness_rows input");
  if (x.cwiseAbs().maxCoeff() == 0.0) throw ProblemError("witness_rows: the origin is not a witness");
  const VectorXd fx = vector_field(problem.system, x, u);
  const std::size_t r = problem.r();
  VectorXd pos(r), dec(r);
  for (std::size_t j = 0; j < r; ++j) {
    const Eigen::Index jj = static_cast<Eigen::Index>(j);
    pos[jj] = -problem.basis[j].eval(x);
    const auto gj = grad(problem.basis[j]);
    double s = 0.0;
    for (std::size_t i = 0; i < gj.size(); ++i) s += gj[i].eval(x) * fx[static_cast<Eigen::Index>(i)];
    dec[jj] = s;
  }
  WitnessConstraintPair out;
  out.positivity = Halfspace::normalized(pos, 0.0, "positivity");
  out.decrease = Halfspace::normalized(dec, 0.0, "decrease");
  return out;
}

WitnessConstraintPair state_rows_for(const ProblemInstance& problem, WitnessKind kind,
                                     const VectorXd& x, const VectorXd& u) {
  if (kind == WitnessKind::kPositivity || kind == WitnessKind::kDecrease) {
    return witness_rows(problem, x, u);
  }
  const double beta = problem.reach_while_stay ? problem.reach_while_stay->beta : 1.0;
  const VectorXd g = basis_values(problem, x);
  WitnessConstraintPair out;
  if (kind == WitnessKind::kBoundary) {
    out.extra.push_back(Halfspace::normalized(-g, -beta, "boundary"));
  } else {
    out.extra.push_back(Halfspace::normalized(g, beta, "initial"));
  }
  return out;
}

WitnessConstraintPair relaxed_witness_rows(const ProblemInstance& problem, const MomentWitness& w,
                                           const VectorXd& u) {
  const std::size_t r = problem.r();
  VectorXd L(r);
  for (std::size_t j = 0; j < r; ++j) L[static_cast<Eigen::Index>(j)] = w.riesz(problem.basis[j]);
  const double beta = problem.reach_while_stay ? problem.reach_while_stay->beta : 1.0;
  WitnessConstraintPair out;
  out.source = witness_kind_name(w.kind);
  switch (w.kind) {
    case WitnessKind::kPositivity:
      out.positivity = Halfspace::normalized(-L, 0.0, "relaxed-positivity");
      break;
    case WitnessKind::kDecrease: {
      require_dim(static_cast<std::size_t>(u.size()), problem.m(), "relaxed_witness_rows input");
      VectorXd dec(r);
      for (std::size_t j = 0; j < r; ++j) {
        const LieDecomposition ld = lie_decompose(problem.basis[j], problem.system);
        double s = w.riesz(ld.drift_term);
        for (std::size_t i = 0; i < problem.m(); ++i) s += u[static_cast<Eigen::Index>(i)] * w.riesz(ld.input_terms[i]);
        dec[static_cast<Eigen::Index>(j)] = s;
      }
      out.decrease = Halfspace::normalized(dec, 0.0, "relaxed-decrease");
      break;
    }
    case WitnessKind::kBoundary:
      out.extra.push_back(Halfspace::normalized(-L, -beta, "relaxed-boundary"));
      break;
    case WitnessKind::kInitial:
      out.extra.push_back(Halfspace::normalized(L, beta, "relaxed-initial"));
      break;
  }
  return out;
}

double Ellipsoid::logvol() const {
  Eigen::LLT<MatrixXd> llt(P);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  return llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

double Ellipsoid::max_semi_axis() const {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(P, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

CandidateRegion::CandidateRegion(Box c0) : box_(std::move(c0)) {}

void CandidateRegion::add_row(Halfspace h) {
  require_dim(static_cast<std::size_t>(h.a.size()), dim(), "CandidateRegion::add_row");
  rows_.push_back(std::move(h));
  cached_mve.reset();
}

void CandidateRegion::add_witness(const WitnessConstraintPair& pair) {
  for (auto& h : pair.rows()) add_row(h);
}

double CandidateRegion::min_slack(const VectorXd& c, double eps_w) const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& h : rows_) m = std::min(m, h.slack(c) - eps_w);
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    m = std::min(m, box_.upper()[i] - c[i] - eps_w);
    m = std::min(m, c[i] - box_.lower()[i] - eps_w);
  }
  return m;
}

std::vector<Halfspace> CandidateRegion::all_faces() const {
  std::vector<Halfspace> faces = rows_;
  const std::size_t r = dim();
  for (std::size_t i = 0; i < r; ++i) {
    VectorXd e = VectorXd::Zero(static_cast<Eigen::Index>(r));
    e[static_cast<Eigen::Index>(i)] = 1.0;
    faces.push_back({e, box_.upper()[static_cast<Eigen::Index>(i)], "box"});
    faces.push_back({-e, -box_.lower()[static_cast<Eigen::Index>(i)], "box"});
  }
  return faces;
}

Ellipsoid& CandidateRegion::ellipsoid() {
  if (!ellipsoid_) {
    const VectorXd h = box_.half_widths();
    Ellipsoid e;
    e.center = box_.center();
    e.P = (static_cast<double>(dim()) * h.array().square()).matrix().asDiagonal();
    ellipsoid_ = e;
  }
  return *ellipsoid_;
}

ChebyshevResult chebyshev_center(const std::vector<Halfspace>& faces, const VectorXd& start) {
  const int r = static_cast<int>(start.size());
  SdpProblem p;
  p.num_vars = r + 1;
  const int k = p.add_block(static_cast<int>(faces.size()), true);
  auto& C = p.blocks[static_cast<std::size_t>(k)].constant;
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const int ii = static_cast<int>(i);
    C(ii, 0) = faces[i].b;
    for (int j = 0; j < r; ++j) p.add_coefficient(k, j, ii, ii, faces[i].a[j]);
    p.add_coefficient(k, r, ii, ii, 1.0);
  }
  p.objective = VectorXd::Zero(r + 1);
  p.objective[r] = 1.0;
  VectorXd y0(r + 1);
  y0.head(r) = start;
  double m = std::numeric_limits<double>::infinity();
  for (const auto& f : faces) m = std::min(m, f.slack(start));
  y0[r] = m - 1.0;
  SdpOptions opt;
  opt.gap_tol = 1e-11;
  opt.feas_tol = 1e-10;
  opt.max_iterations = 200;
  const SdpResult res = solve_sdp(p, y0, opt);
  return {res.y.head(r), res.y[r]};
}

namespace {

// Symmetric coordinates: index of (k, l), k <= l.
struct SymIndex {
  int r;
  std::vector<std::pair<int, int>> pairs;
  explicit SymIndex(int dim) : r(dim) {
    for (int k = 0; k < r; ++k)
      for (int l = k; l < r; ++l) pairs.emplace_back(k, l);
  }
  int size() const { return static_cast<int>(pairs.size()); }
};

MatrixXd unpack(const SymIndex& si, const VectorXd& v) {
  MatrixXd B(si.r, si.r);
  for (int a = 0; a < si.size(); ++a) {
    const auto [k, l] = si.pairs[static_cast<std::size_t>(a)];
    B(k, l) = B(l, k) = v[a];
  }
  return B;
}

struct BarrierEval {
  bool feasible = false;
  double value = 0.0;
};

}  // namespace

MveResult mve(const std::vector<Halfspace>& rows, const Box& box, double margin) {
  const int r = static_cast<int>(box.dim());
  std::vector<Halfspace> faces;
  for (const auto& h : rows) {
    if (h.a.norm() == 0.0) {
      if (h.b - margin <= 0.0) throw NumericalError("mve: empty polytope");
      continue;
    }
    faces.push_back({h.a, h.b - margin, h.tag});
  }
  for (int i = 0; i < r; ++i) {
    VectorXd e = VectorXd::Zero(r);
    e[i] = 1.0;
    faces.push_back({e, box.upper()[i] - margin, "box"});
    faces.push_back({-e, -box.lower()[i] - margin, "box"});
  }
  const int M = static_cast<int>(faces.size());
  MatrixXd A(M, r);
  VectorXd b(M);
  for (int i = 0; i < M; ++i) {
    A.row(i) = faces[static_cast<std::size_t>(i)].a.transpose();
    b[i] = faces[static_cast<std::size_t>(i)].b;
  }

  const ChebyshevResult cheb = chebyshev_center(faces, box.center());
  if (!(cheb.margin > 1e-12)) throw NumericalError("mve: empty or lower-dimensional polytope");

  const SymIndex si(r);
  const int nB = si.size();
  const int nv = nB + r;
  VectorXd v(nv);
  {
    const MatrixXd B0 = 0.5 * cheb.margin * MatrixXd::Identity(r, r);
    for (int a = 0; a < nB; ++a) v[a] = B0(si.pairs[static_cast<std::size_t>(a)].first, si.pairs[static_cast<std::size_t>(a)].second);
    v.tail(r) = cheb.center;
  }

  auto evaluate = [&](const VectorXd& vv, double tau) {
    BarrierEval ev;
    const MatrixXd B = unpack(si, vv);
    Eigen::LLT<MatrixXd> llt(B);
    if (llt.info() != Eigen::Success) return ev;
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const VectorXd s = b - A * vv.tail(r);
    const MatrixXd Z = A * B;  // row i is (B a_i)^T
    double sum = 0.0;
    for (int i = 0; i < M; ++i) {
      if (!(s[i] > 0.0)) return ev;
      const double q = s[i] * s[i] - Z.row(i).squaredNorm();
      if (!(q > 0.0)) return ev;
      sum += std::log(q);
    }
    ev.feasible = true;
    ev.value = -tau * logdet - sum;
    return ev;
  };

  const double nu = 2.0 * M;
  double tau = 1.0;
  bool fallback = false;
  const double target_gap = 1e-8;
  for (int stage = 0; stage < 60; ++stage) {
    for (int newton = 0; newton < 80; ++newton) {
      const MatrixXd B = unpack(si, v);
      const MatrixXd Binv = B.llt().solve(MatrixXd::Identity(r, r));
      const VectorXd s = b - A * v.tail(r);
      const MatrixXd Z = A * B;
      VectorXd g = VectorXd::Zero(nv);
      MatrixXd H = MatrixXd::Zero(nv, nv);
      MatrixXd Jm(M, nv);
      MatrixXd P = MatrixXd::Zero(r, r);
      for (int i = 0; i < M; ++i) {
        const double q = s[i] * s[i] - Z.row(i).squaredNorm();
        for (int a = 0; a < nB; ++a) {
          const auto [k, l] = si.pairs[static_cast<std::size_t>(a)];
          Jm(i, a) = k == l ? -2.0 * Z(i, k) * A(i, k) : -2.0 * (Z(i, k) * A(i, l) + Z(i, l) * A(i, k));
        }
        Jm.row(i).tail(r) = -2.0 * s[i] * A.row(i);
        Jm.row(i) /= q;
        P += (2.0 / q) * A.row(i).transpose() * A.row(i);
      }
      g = -Jm.colwise().sum().transpose();
      H.noalias() += Jm.transpose() * Jm;
      H.bottomRightCorner(r, r) -= P;
      for (int a = 0; a < nB; ++a) {
        const auto [k, l] = si.pairs[static_cast<std::size_t>(a)];
        const double fa = k == l ? 0.5 : 1.0;
        g[a] += -tau * fa * 2.0 * Binv(k, l);
        for (int c = a; c < nB; ++c) {
          const auto [m, n] = si.pairs[static_cast<std::size_t>(c)];
          const double fc = m == n ? 0.5 : 1.0;
          const double trp = (l == m ? P(n, k) : 0.0) + (l == n ? P(m, k) : 0.0) +
                             (k == m ? P(n, l) : 0.0) + (k == n ? P(m, l) : 0.0);
          const double trb = Binv(l, m) * Binv(n, k) + Binv(l, n) * Binv(m, k) +
                             Binv(k, m) * Binv(n, l) + Binv(k, n) * Binv(m, l);
          const double h = fa * fc * (trp + tau * trb);
          H(a, c) += h;
          if (c != a) H(c, a) += h;
        }
      }
      Eigen::LDLT<MatrixXd> ldlt(H);
      VectorXd dv = ldlt.solve(-g);
      double dec2 = -g.dot(dv);
      if (!(dec2 > 0.0) || !dv.allFinite()) {
        dv = -g;
        dec2 = g.squaredNorm();
      }
      if (dec2 < 1e-8) break;
      const BarrierEval cur = evaluate(v, tau);
      double alpha = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls) {
        const VectorXd vn = v + alpha * dv;
        const BarrierEval ev = evaluate(vn, tau);
        if (ev.feasible && ev.value <= cur.value - 0.25 * alpha * dec2) {
          v = vn;
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!moved) {
        fallback = dec2 > 1e-6;
        break;
      }
    }
    if (nu / tau <= target_gap || fallback) break;
    tau *= 10.0;
  }

  MveResult res;
  res.B = unpack(si, v);
  res.d = v.tail(r);
  Eigen::LLT<MatrixXd> llt(res.B);
  res.logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  res.kkt_residual = nu / tau;
  res.fallback = fallback;
  return res;
}

CandidateResult find_candidate(CandidateRegion& region, const LearnerConfig& cfg) {
  CandidateResult out;
  const auto faces = region.all_faces();
  const ChebyshevResult cheb = chebyshev_center(faces, region.box().center());
  out.chebyshev_margin = cheb.margin;
  if (cheb.margin < cfg.eps_w) {
    out.kind = CandidateResult::Kind::kEmpty;
    return out;
  }
  if (cfg.strategy == LearnerStrategy::kMve) {
    if (!region.cached_mve) region.cached_mve = mve(region.rows(), region.box(), cfg.eps_w);
    const MveResult& m = *region.cached_mve;
    out.mve = m;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(m.B, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().maxCoeff() < cfg.delta) {
      out.kind = CandidateResult::Kind::kConverged;
      out.c = m.d;
      return out;
    }
    out.kind = CandidateResult::Kind::kCandidate;
    out.c = m.d;
    return out;
  }
  Ellipsoid& E = region.ellipsoid();
  for (int k = 0; k < 100000; ++k) {
    if (E.max_semi_axis() < cfg.delta) {
      out.kind = CandidateResult::Kind::kConverged;
      out.c = E.center;
      return out;
    }
    double worst = 0.0;
    const Halfspace* cut = nullptr;
    for (const auto& f : faces) {
      const double sl = f.slack(E.center) - cfg.eps_w;
      if (sl < worst) {
        worst = sl;
        cut = &f;
      }
    }
    if (!cut) {
      out.kind = CandidateResult::Kind::kCandidate;
      out.c = E.center;
      return out;
    }
    E = ellipsoid_step(E, cut->a);
  }
  throw NumericalError("find_candidate: ellipsoid method did not terminate");
}

Ellipsoid ellipsoid_step(const Ellipsoid& E, const VectorXd& a) {
  const double r = static_cast<double>(E.center.size());
  const VectorXd Pa = E.P * a;
  const double aPa = a.dot(Pa);
  if (!(aPa > 0.0)) throw NumericalError("ellipsoid_step: degenerate cut or shape");
  const VectorXd gt = Pa / std::sqrt(aPa);
  Ellipsoid out;
  if (E.center.size() == 1) {
    out.center = E.center - 0.5 * gt;
    out.P = 0.25 * E.P;
    return out;
  }
  out.center = E.center - gt / (r + 1.0);
  out.P = (r * r / (r * r - 1.0)) * (E.P - (2.0 / (r + 1.0)) * gt * gt.transpose());
  out.P = 0.5 * (out.P + out.P.transpose()).eval();
  Eigen::LLT<MatrixXd> llt(out.P);
  if (llt.info() != Eigen::Success) throw NumericalError("ellipsoid_step: shape lost positive definiteness");
  return out;
}

long iteration_bound(int r, double Delta, double delta) {
  if (r < 1 || !(delta > 0.0) || !(Delta > delta)) {
    throw std::invalid_argument("iteration_bound: need r >= 1 and Delta > delta > 0");
  }
  const double L = std::log(Delta) - std::log(delta);
  double v = 0.0;
  if (r == 1) {
    v = L;
  } else {
    const double rr = static_cast<double>(r);
    v = rr * L / (-std::log1p(-1.0 / rr));
  }
  return std::max(1L, static_cast<long>(std::ceil(v)));
}

}  // namespace clfsyn
