#include "clfsyn/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "clfsyn/lie.hpp"
#include "clfsyn/lp.hpp"
#include "clfsyn/sdp.hpp"

namespace clfsyn {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string witness_kind_name(WitnessKind k) {
  switch (k) {
    case WitnessKind::kPositivity: return "positivity";
    case WitnessKind::kDecrease: return "decrease";
    case WitnessKind::kBoundary: return "boundary";
    case WitnessKind::kInitial: return "initial";
  }
  return "unknown";
}

namespace {

using MomentIndex = std::map<Monomial, int, GradedLexLess>;

MomentIndex make_index(const std::vector<Monomial>& moments) {
  MomentIndex idx;
  for (std::size_t i = 0; i < moments.size(); ++i) idx.emplace(moments[i], static_cast<int>(i));
  return idx;
}

int ceil_half(int d) { return (d + 1) / 2; }

}  // namespace

double MomentWitness::riesz(const Polynomial& p) const {
  require_dim(p.nvars(), nvars, "MomentWitness::riesz");
  const auto idx = make_index(moments);
  double s = 0.0;
  for (const auto& [m, c] : p.terms()) {
    auto it = idx.find(m);
    if (it == idx.end()) throw DimensionError("MomentWitness::riesz: degree exceeds relaxation order");
    s += c * y[it->second];
  }
  return s;
}

MatrixXd MomentWitness::moment_matrix() const {
  const auto b = basis();
  const auto idx = make_index(moments);
  MatrixXd Z(b.size(), b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    for (std::size_t j = i; j < b.size(); ++j) {
      Z(i, j) = Z(j, i) = y[idx.at(b[i] * b[j])];
    }
  }
  return Z;
}

VectorXd MomentWitness::first_moments() const {
  const auto idx = make_index(moments);
  VectorXd x(nvars);
  for (std::size_t i = 0; i < nvars; ++i) x[i] = y[idx.at(Monomial::variable(nvars, i))];
  return x;
}

VectorXd project(const MomentWitness& w, const Box& box) { return box.clamp(w.first_moments()); }

FarkasResult farkas_feasible(double a0, const VectorXd& a, const InputPolytope& U, double tol) {
  require_dim(static_cast<std::size_t>(a.size()), U.dim(), "farkas_feasible");
  FarkasResult out;
  const MatrixXd& A = U.A();
  const VectorXd& b = U.b();
  const Eigen::Index l = A.rows();
  const Eigen::Index m = A.cols();
  if (m == 0 || l == 0) {
    out.feasible = a0 >= -tol;
    out.lambda = VectorXd::Zero(l);
    return out;
  }
  // Variables [lambda; s] >= 0:  A^T lambda = a,  b^T lambda - s = -a0 - tol.
  MatrixXd Aeq = MatrixXd::Zero(m + 1, l + 1);
  Aeq.topLeftCorner(m, l) = A.transpose();
  Aeq.block(m, 0, 1, l) = b.transpose();
  Aeq(m, l) = -1.0;
  VectorXd beq(m + 1);
  beq.head(m) = a;
  beq[m] = -a0 - tol;
  const auto lp = solve_standard_lp(Aeq, beq, VectorXd::Zero(l + 1));
  if (lp.status == LpStatus::kOptimal) {
    out.feasible = true;
    out.lambda = lp.x.head(l);
  }
  return out;
}

namespace {

// Coordinates x = scale .* xs map S_box into the unit box.
struct Scaling {
  VectorXd scale;
  VectorXd lo;  // scaled box
  VectorXd hi;
};

Scaling make_scaling(const Box& box) {
  Scaling s;
  const auto n = box.lower().size();
  s.scale.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    s.scale[i] = std::max(std::abs(box.lower()[i]), std::abs(box.upper()[i]));
  }
  s.lo = box.lower().cwiseQuotient(s.scale);
  s.hi = box.upper().cwiseQuotient(s.scale);
  return s;
}

std::vector<Polynomial> box_localizers(const Scaling& sc) {
  const std::size_t n = static_cast<std::size_t>(sc.scale.size());
  std::vector<Polynomial> out;
  for (std::size_t i = 0; i < n; ++i) {
    const Polynomial xi = Polynomial::variable(n, i);
    out.push_back(Polynomial::constant(n, 1.0) - xi * xi);
    if (sc.lo[i] != -1.0 || sc.hi[i] != 1.0) {
      out.push_back((Polynomial::constant(n, sc.hi[i]) - xi) * (xi - Polynomial::constant(n, sc.lo[i])));
    }
  }
  return out;
}

Polynomial excision(const Scaling& sc, double rho) {
  const std::size_t n = static_cast<std::size_t>(sc.scale.size());
  Polynomial p = Polynomial::constant(n, -rho * rho);
  for (std::size_t i = 0; i < n; ++i) {
    const Polynomial xi = Polynomial::variable(n, i);
    p += xi * xi * (sc.scale[i] * sc.scale[i]);
  }
  return p;
}

// Uniform-distribution moments on the scaled box.
double uniform_moment(const Monomial& m, const Scaling& sc) {
  double v = 1.0;
  for (std::size_t i = 0; i < m.nvars(); ++i) {
    const int k = m[i];
    const double lo = sc.lo[static_cast<Eigen::Index>(i)];
    const double hi = sc.hi[static_cast<Eigen::Index>(i)];
    v *= (std::pow(hi, k + 1) - std::pow(lo, k + 1)) / ((k + 1) * (hi - lo));
  }
  return v;
}

struct RelaxOutcome {
  bool feasible = false;
  VectorXd y;  // scaled, y_0 = 1
  double t_star = 0.0;
};

class MomentProgram {
 public:
  MomentProgram(std::size_t n, int order, const Scaling& sc)
      : n_(n), order_(order), sc_(sc), moments_(monomial_basis(n, 2 * order)),
        index_(make_index(moments_)) {}

  const std::vector<Monomial>& moments() const { return moments_; }

  void add_localizer(const Polynomial& g) {
    if (g.is_zero()) return;
    const int half = order_ - ceil_half(g.degree());
    if (half < 0) {
      throw ProblemError("relaxation degree " + std::to_string(order_) +
                         " is below half the constraint degree " + std::to_string(g.degree()));
    }
    localizers_.push_back(g * (1.0 / g.max_abs_coeff()));
  }
  void add_violation(const Polynomial& g) {
    if (g.is_zero()) return;
    violations_.push_back(g * (1.0 / g.max_abs_coeff()));
  }

  RelaxOutcome solve(const VerifierConfig& cfg) const {
    const int N = static_cast<int>(moments_.size());
    // Phase I: maximize t s.t. every block minus t I is PSD.
    SdpProblem p;
    p.num_vars = N;  // moments 1..N-1, then t
    build_blocks(p, N - 1, 0.0);
    p.objective = VectorXd::Zero(N);
    p.objective[N - 1] = 1.0;

    VectorXd y0(N);
    for (int i = 1; i < N; ++i) y0[i - 1] = uniform_moment(moments_[static_cast<std::size_t>(i)], sc_);
    y0[N - 1] = 0.0;
    y0[N - 1] = p.min_slack_eigenvalue(y0) - 1.0;

    bool certified = false;
    auto certificate = [&](double pobj, const VectorXd& rp) {
      return pobj + 1.5 * rp.head(N - 1).lpNorm<1>();
    };
    SdpOptions opt;
    opt.max_iterations = cfg.max_iterations;
    opt.stop = [&](const SdpIterate& it) {
      if (certificate(it.primal_objective, *it.residual) < -1e-10) {
        certified = true;
        return true;
      }
      return false;
    };
    const SdpResult r1 = solve_sdp(p, y0, opt);
    const double t_star = r1.y[N - 1];
    if (!certified) {
      const VectorXd rp = p.objective - p.apply(r1.X);
      certified = certificate(r1.primal_objective, rp) < -1e-10 && t_star < -cfg.feas_tol;
    }
    RelaxOutcome out;
    out.t_star = t_star;
    if (certified) return out;
    if (t_star < -cfg.feas_tol) {
      throw IndeterminateError("moment relaxation undecided: phase-I margin " +
                               std::to_string(t_star));
    }
    out.feasible = true;
    out.y = extract(r1.y.head(N - 1), t_star, cfg);
    return out;
  }

 private:
  // Adds one block per localizer (moment matrix first). Moment a (a >= 1)
  // is variable a - 1; `t_var` >= 0 adds -t I to each block; `shift` is
  // subtracted from each diagonal.
  void build_blocks(SdpProblem& p, int t_var, double shift) const {
    std::vector<Polynomial> all;
    all.push_back(Polynomial::constant(n_, 1.0));
    all.insert(all.end(), localizers_.begin(), localizers_.end());
    for (const auto& g : all) {
      const auto mb = monomial_basis(n_, order_ - ceil_half(g.degree()));
      const int sz = static_cast<int>(mb.size());
      const int k = p.add_block(sz);
      auto& C = p.blocks[static_cast<std::size_t>(k)].constant;
      for (int i = 0; i < sz; ++i) {
        for (int j = i; j < sz; ++j) {
          const Monomial base = mb[static_cast<std::size_t>(i)] * mb[static_cast<std::size_t>(j)];
          for (const auto& [gm, c] : g.terms()) {
            const int a = index_.at(gm * base);
            if (a == 0) {
              C(i, j) += c;
              if (i != j) C(j, i) += c;
            } else {
              p.add_coefficient(k, a - 1, i, j, -c);
            }
          }
        }
        if (t_var >= 0) p.add_coefficient(k, t_var, i, i, 1.0);
        C(i, i) -= shift;
      }
    }
  }

  // Scalar rows g(y) - sigma >= 0 for the severity objective.
  void build_violation_block(SdpProblem& p, int sigma_var) const {
    const int k = p.add_block(static_cast<int>(violations_.size()), true);
    auto& C = p.blocks[static_cast<std::size_t>(k)].constant;
    for (std::size_t r = 0; r < violations_.size(); ++r) {
      const int ri = static_cast<int>(r);
      for (const auto& [gm, c] : violations_[r].terms()) {
        const int a = index_.at(gm);
        if (a == 0) {
          C(ri, 0) += c;
        } else {
          p.add_coefficient(k, a - 1, ri, ri, -c);
        }
      }
      p.add_coefficient(k, sigma_var, ri, ri, 1.0);
    }
  }

  // Pushes the pseudo-measure toward one side of its principal axis so the
  // first moments are informative, keeping every block >= t_lo I.
  VectorXd extract(const VectorXd& ystart, double t_star, const VerifierConfig& cfg) const {
    const int N = static_cast<int>(moments_.size());
    auto full = [&](const VectorXd& v) {
      VectorXd y(N);
      y[0] = 1.0;
      y.tail(N - 1) = v.head(N - 1);
      return y;
    };
    const VectorXd y1 = full(ystart);
    VectorXd first(n_);
    MatrixXd second(n_, n_);
    for (std::size_t i = 0; i < n_; ++i) {
      const Monomial ei = Monomial::variable(n_, i);
      first[static_cast<Eigen::Index>(i)] = y1[index_.at(ei)];
      for (std::size_t j = 0; j < n_; ++j) {
        second(i, j) = y1[index_.at(ei * Monomial::variable(n_, j))];
      }
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(second);
    VectorXd w = es.eigenvectors().col(static_cast<Eigen::Index>(n_) - 1);
    const double proj = w.dot(first);
    if (proj < -1e-12) {
      w = -w;
    } else if (std::abs(proj) <= 1e-12) {
      Eigen::Index imax = 0;
      w.cwiseAbs().maxCoeff(&imax);
      if (w[imax] < 0) w = -w;
    }

    const double t_lo = t_star > 0 ? std::min(0.5 * t_star, 1e-9) : t_star - 1e-9;
    SdpProblem p;
    const bool sev = cfg.severity && !violations_.empty();
    p.num_vars = N - 1 + (sev ? 1 : 0);
    build_blocks(p, -1, t_lo);
    p.objective = VectorXd::Zero(p.num_vars);
    const double wscale = sev ? 1e-3 : 1.0;
    for (std::size_t i = 0; i < n_; ++i) {
      p.objective[index_.at(Monomial::variable(n_, i)) - 1] = wscale * w[static_cast<Eigen::Index>(i)];
    }
    VectorXd y0 = VectorXd::Zero(p.num_vars);
    y0.head(N - 1) = ystart.head(N - 1);
    if (sev) {
      const int sigma = N - 1;
      build_violation_block(p, sigma);
      p.objective[sigma] = 1.0;
      const auto S = p.slack(y0);
      const double lo = S.back().col(0).minCoeff();
      y0[sigma] = std::min(0.0, lo) - 1.0;
    }
    SdpOptions opt;
    opt.max_iterations = cfg.max_iterations;
    opt.gap_tol = 1e-7;
    opt.feas_tol = 1e-7;
    const SdpResult r2 = solve_sdp(p, y0, opt);
    // Every iterate is feasible, so the final point is usable whatever the status.
    return full(r2.y);
  }

  std::size_t n_;
  int order_;
  Scaling sc_;
  std::vector<Monomial> moments_;
  MomentIndex index_;
  std::vector<Polynomial> localizers_;
  std::vector<Polynomial> violations_;
};

double exclusion(const ProblemInstance& problem, const VerifierConfig& cfg) {
  return cfg.exclusion_radius > 0 ? cfg.exclusion_radius : problem.exclusion_radius;
}

// Moments in original coordinates from scaled ones.
VectorXd unscale(const std::vector<Monomial>& moments, const VectorXd& ys, const VectorXd& scale) {
  VectorXd y(ys.size());
  for (std::size_t a = 0; a < moments.size(); ++a) {
    double f = 1.0;
    for (std::size_t i = 0; i < moments[a].nvars(); ++i) {
      f *= std::pow(scale[static_cast<Eigen::Index>(i)], moments[a][i]);
    }
    y[static_cast<Eigen::Index>(a)] = ys[static_cast<Eigen::Index>(a)] * f;
  }
  return y;
}

MomentWitness make_witness(WitnessKind kind, int order, std::size_t n,
                           const std::vector<Monomial>& moments, const RelaxOutcome& r,
                           const VectorXd& scale) {
  MomentWitness w;
  w.kind = kind;
  w.order = order;
  w.nvars = n;
  w.moments = moments;
  w.y = unscale(moments, r.y, scale);
  w.margin = r.t_star;
  return w;
}

void add_safe_set(MomentProgram& prog, const ProblemInstance& problem, const Scaling& sc) {
  for (const auto& r : problem.safe_set.constraints) prog.add_localizer(-r.scale_variables(sc.scale));
  for (const auto& b : box_localizers(sc)) prog.add_localizer(b);
}

// p with x_k replaced by `value`, as a polynomial in the remaining variables.
Polynomial substitute(const Polynomial& p, std::size_t k, double value) {
  const std::size_t n = p.nvars();
  Polynomial out(n - 1);
  for (const auto& [m, c] : p.terms()) {
    std::vector<int> e;
    for (std::size_t i = 0; i < n; ++i) {
      if (i != k) e.push_back(m[i]);
    }
    out.add_term(Monomial(e), c * std::pow(value, m[k]));
  }
  return out;
}

// Returns (k, value) when face is c * x_k + d with c != 0.
std::optional<std::pair<std::size_t, double>> affine_single_variable(const Polynomial& face) {
  if (face.degree() != 1) return std::nullopt;
  std::optional<std::size_t> var;
  double c = 0.0;
  double d = 0.0;
  for (const auto& [m, coef] : face.terms()) {
    if (m.degree() == 0) {
      d = coef;
      continue;
    }
    for (std::size_t i = 0; i < m.nvars(); ++i) {
      if (m[i] == 1) {
        if (var) return std::nullopt;
        var = i;
        c = coef;
      }
    }
  }
  if (!var) return std::nullopt;
  return std::make_pair(*var, -d / c);
}

}  // namespace

VerifierConfig default_verifier_config(const ProblemInstance& problem) {
  VerifierConfig cfg;
  int deg_v = 0;
  for (const auto& g : problem.basis) deg_v = std::max(deg_v, g.degree());
  int deg_f = 0;
  for (const auto& f : problem.system.drift()) deg_f = std::max(deg_f, f.degree());
  for (const auto& ch : problem.system.channels()) {
    for (const auto& f : ch) deg_f = std::max(deg_f, f.degree());
  }
  int deg = std::max(deg_v, deg_v - 1 + deg_f);
  for (const auto& r : problem.safe_set.constraints) deg = std::max(deg, r.degree());
  cfg.relaxation_degree = std::max(1, ceil_half(deg));
  if (problem.overrides.relaxation_degree) cfg.relaxation_degree = *problem.overrides.relaxation_degree;
  cfg.exclusion_radius = problem.exclusion_radius;
  return cfg;
}

Verdict check_positivity(const Polynomial& V, const ProblemInstance& problem,
                         const VerifierConfig& cfg) {
  require_dim(V.nvars(), problem.n(), "check_positivity");
  const Scaling sc = make_scaling(problem.safe_box);
  MomentProgram prog(problem.n(), cfg.relaxation_degree, sc);
  add_safe_set(prog, problem, sc);
  prog.add_localizer(excision(sc, exclusion(problem, cfg)));
  const Polynomial negV = -V.scale_variables(sc.scale);
  if (negV.is_zero()) {
    // V = 0 violates positivity everywhere; the relaxation reduces to S itself.
    prog.add_violation(Polynomial::constant(problem.n(), 1.0));
  } else {
    prog.add_localizer(negV);
    prog.add_violation(negV);
  }
  const RelaxOutcome r = prog.solve(cfg);
  if (!r.feasible) return Verdict::Valid();
  return Verdict::Counterexample(
      make_witness(WitnessKind::kPositivity, cfg.relaxation_degree, problem.n(), prog.moments(), r, sc.scale));
}

Verdict check_decrease(const Polynomial& V, const ProblemInstance& problem,
                       const VerifierConfig& cfg) {
  require_dim(V.nvars(), problem.n(), "check_decrease");
  const Scaling sc = make_scaling(problem.safe_box);
  const LieDecomposition ld = lie_decompose(V, problem.system);
  MomentProgram prog(problem.n(), cfg.relaxation_degree, sc);
  add_safe_set(prog, problem, sc);
  prog.add_localizer(excision(sc, exclusion(problem, cfg)));

  // Decrease fails at x iff a(x) + b(x)^T v >= 0 at every vertex v of U.
  std::vector<Polynomial> vertex_polys;
  if (problem.m() == 0) {
    vertex_polys.push_back(ld.drift_term);
  } else {
    for (const auto& v : problem.inputs.vertices()) {
      Polynomial g = ld.drift_term;
      for (std::size_t i = 0; i < problem.m(); ++i) g += ld.input_terms[i] * v[static_cast<Eigen::Index>(i)];
      vertex_polys.push_back(g);
    }
  }
  bool any_nonzero = false;
  for (const auto& g : vertex_polys) {
    const Polynomial gs = g.scale_variables(sc.scale);
    if (gs.is_zero()) continue;
    any_nonzero = true;
    prog.add_localizer(gs);
    prog.add_violation(gs);
  }
  if (!any_nonzero) prog.add_violation(Polynomial::constant(problem.n(), 1.0));
  const RelaxOutcome r = prog.solve(cfg);
  if (!r.feasible) return Verdict::Valid();
  MomentWitness w =
      make_witness(WitnessKind::kDecrease, cfg.relaxation_degree, problem.n(), prog.moments(), r, sc.scale);
  const double a0 = w.riesz(ld.drift_term);
  VectorXd a(problem.m());
  for (std::size_t i = 0; i < problem.m(); ++i) a[static_cast<Eigen::Index>(i)] = w.riesz(ld.input_terms[i]);
  const double tol = 1e-6 * std::max({1.0, std::abs(a0), a.size() ? a.cwiseAbs().maxCoeff() : 0.0});
  const FarkasResult fk = farkas_feasible(a0, a, problem.inputs, tol);
  if (fk.feasible) w.lambda = fk.lambda;
  return Verdict::Counterexample(std::move(w));
}

Verdict check_boundary(const Polynomial& V, const ProblemInstance& problem,
                       const VerifierConfig& cfg) {
  if (!problem.reach_while_stay) return Verdict::Valid();
  const auto& rws = *problem.reach_while_stay;
  const std::size_t n = problem.n();
  const auto faces = rws.boundary_faces.empty() ? problem.safe_set.constraints : rws.boundary_faces;
  const Scaling sc = make_scaling(problem.safe_box);
  const auto full_moments = monomial_basis(n, 2 * cfg.relaxation_degree);

  for (const auto& face : faces) {
    const auto sub = affine_single_variable(face);
    if (sub && n > 1) {
      const auto [k, value] = *sub;
      const Eigen::Index ki = static_cast<Eigen::Index>(k);
      if (value < problem.safe_box.lower()[ki] - 1e-12 || value > problem.safe_box.upper()[ki] + 1e-12) continue;
      // Reduced problem over the remaining coordinates.
      std::vector<Eigen::Index> keep;
      for (std::size_t i = 0; i < n; ++i) {
        if (i != k) keep.push_back(static_cast<Eigen::Index>(i));
      }
      VectorXd lo(n - 1), hi(n - 1);
      for (std::size_t i = 0; i < keep.size(); ++i) {
        lo[static_cast<Eigen::Index>(i)] = problem.safe_box.lower()[keep[i]];
        hi[static_cast<Eigen::Index>(i)] = problem.safe_box.upper()[keep[i]];
      }
      const Scaling rsc = make_scaling(Box(lo, hi));
      MomentProgram prog(n - 1, cfg.relaxation_degree, rsc);
      for (const auto& r : problem.safe_set.constraints) {
        const Polynomial rs = substitute(r, k, value);
        if (rs.degree() == 0 && rs.is_zero()) continue;
        if (rs.degree() == 0 && rs.coeff(Monomial::constant(n - 1)) <= 0) continue;
        prog.add_localizer(-rs.scale_variables(rsc.scale));
      }
      for (const auto& b : box_localizers(rsc)) prog.add_localizer(b);
      const Polynomial g = (Polynomial::constant(n - 1, rws.beta) - substitute(V, k, value)).scale_variables(rsc.scale);
      if (g.degree() == 0) {
        if (g.coeff(Monomial::constant(n - 1)) < 0) continue;
        prog.add_violation(Polynomial::constant(n - 1, 1.0));
      } else {
        prog.add_localizer(g);
        prog.add_violation(g);
      }
      const RelaxOutcome r = prog.solve(cfg);
      if (!r.feasible) continue;
      // Lift the reduced moments back to n variables with x_k = value.
      const auto red_moments = prog.moments();
      const auto red_index = make_index(red_moments);
      const VectorXd yred = unscale(red_moments, r.y, rsc.scale);
      MomentWitness w;
      w.kind = WitnessKind::kBoundary;
      w.order = cfg.relaxation_degree;
      w.nvars = n;
      w.moments = full_moments;
      w.margin = r.t_star;
      w.y.resize(static_cast<Eigen::Index>(full_moments.size()));
      for (std::size_t a = 0; a < full_moments.size(); ++a) {
        std::vector<int> e;
        for (std::size_t i = 0; i < n; ++i) {
          if (i != k) e.push_back(full_moments[a][i]);
        }
        w.y[static_cast<Eigen::Index>(a)] =
            std::pow(value, full_moments[a][k]) * yred[red_index.at(Monomial(e))];
      }
      return Verdict::Counterexample(std::move(w));
    }
    // General face: a thin shell {-eta <= face <= 0} inside S.
    MomentProgram prog(n, cfg.relaxation_degree, sc);
    add_safe_set(prog, problem, sc);
    prog.add_localizer((face + Polynomial::constant(n, 1e-4)).scale_variables(sc.scale));
    const Polynomial g = (Polynomial::constant(n, rws.beta) - V).scale_variables(sc.scale);
    prog.add_localizer(g);
    prog.add_violation(g);
    const RelaxOutcome r = prog.solve(cfg);
    if (r.feasible) {
      return Verdict::Counterexample(
          make_witness(WitnessKind::kBoundary, cfg.relaxation_degree, n, prog.moments(), r, sc.scale));
    }
  }
  return Verdict::Valid();
}

Verdict check_initial(const Polynomial& V, const ProblemInstance& problem,
                      const VerifierConfig& cfg) {
  if (!problem.reach_while_stay) return Verdict::Valid();
  const auto& rws = *problem.reach_while_stay;
  const std::size_t n = problem.n();
  const Scaling sc = make_scaling(problem.safe_box);
  MomentProgram prog(n, cfg.relaxation_degree, sc);
  for (const auto& q : rws.init_set.constraints) prog.add_localizer(-q.scale_variables(sc.scale));
  for (const auto& b : box_localizers(sc)) prog.add_localizer(b);
  const Polynomial g = (V - Polynomial::constant(n, rws.beta)).scale_variables(sc.scale);
  prog.add_localizer(g);
  prog.add_violation(g);
  const RelaxOutcome r = prog.solve(cfg);
  if (!r.feasible) return Verdict::Valid();
  return Verdict::Counterexample(
      make_witness(WitnessKind::kInitial, cfg.relaxation_degree, n, prog.moments(), r, sc.scale));
}

Verdict verify(const Polynomial& V, const ProblemInstance& problem, const VerifierConfig& cfg) {
  Verdict v = check_positivity(V, problem, cfg);
  if (!v.valid) return v;
  v = check_decrease(V, problem, cfg);
  if (!v.valid) return v;
  if (cfg.reach_while_stay && problem.reach_while_stay) {
    v = check_boundary(V, problem, cfg);
    if (!v.valid) return v;
    v = check_initial(V, problem, cfg);
  }
  return v;
}

double min_lie_over_vertices(const Polynomial& V, const ProblemInstance& problem, const VectorXd& x) {
  const auto g = grad(V);
  VectorXd gv(static_cast<Eigen::Index>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) gv[static_cast<Eigen::Index>(i)] = g[i].eval(x);
  const double a = gv.dot(problem.system.eval_drift(x));
  if (problem.m() == 0) return a;
  const VectorXd b = problem.system.input_matrix(x).transpose() * gv;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& v : problem.inputs.vertices()) best = std::min(best, a + b.dot(v));
  return best;
}

std::optional<VectorXd> grid_falsify(const Polynomial& V, const ProblemInstance& problem,
                                     const GridFalsifyOptions& opts) {
  const std::size_t n = problem.n();
  const int d = std::max(2, opts.density);
  const double rho = opts.exclusion_radius > 0 ? opts.exclusion_radius : problem.exclusion_radius;
  const auto g = grad(V);
  const auto& lo = problem.safe_box.lower();
  const auto& hi = problem.safe_box.upper();
  std::vector<int> idx(n, 0);
  VectorXd x(n);
  while (true) {
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Index ii = static_cast<Eigen::Index>(i);
      x[ii] = lo[ii] + (hi[ii] - lo[ii]) * idx[i] / (d - 1);
    }
    if (x.norm() >= rho && problem.safe_set.contains(x, 0.0)) {
      if (V.eval(x) <= -opts.tol) return x;
      if (min_lie_over_vertices(V, problem, x) >= opts.tol) return x;
    }
    std::size_t k = 0;
    while (k < n && ++idx[k] == d) idx[k++] = 0;
    if (k == n) break;
  }
  return std::nullopt;
}

}  // namespace clfsyn
