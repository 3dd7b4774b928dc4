#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clfsyn/dynamics.hpp"
#include "clfsyn/errors.hpp"
#include "clfsyn/polynomial.hpp"
#include "clfsyn/sets.hpp"

namespace clfsyn {

/// Raised when the relaxation neither finds a feasible point nor certifies
/// infeasibility. Never converted into a Valid verdict.
class IndeterminateError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

enum class WitnessKind { kPositivity, kDecrease, kBoundary, kInitial };

std::string witness_kind_name(WitnessKind k);

/// Truncated pseudo-moment sequence y (indexed by all monomials of degree
/// <= 2 * order, graded-lex, y_0 = 1) in the original state coordinates.
struct MomentWitness {
  WitnessKind kind = WitnessKind::kPositivity;
  int order = 1;
  std::size_t nvars = 0;
  std::vector<Monomial> moments;
  Eigen::VectorXd y;
  /// Farkas multipliers for decrease witnesses (empty otherwise).
  Eigen::VectorXd lambda;
  /// Optimal phase-I margin; >= -feas_tol for any returned witness.
  double margin = 0.0;

  /// Riesz functional L_y(p) = sum_a p_a y_a.
  double riesz(const Polynomial& p) const;
  std::vector<Monomial> basis() const { return monomial_basis(nvars, order); }
  /// Z with Z(a, b) = y_{a+b} over basis().
  Eigen::MatrixXd moment_matrix() const;
  Eigen::VectorXd first_moments() const;
};

struct Verdict {
  bool valid = true;
  std::optional<MomentWitness> witness;

  static Verdict Valid() { return {}; }
  static Verdict Counterexample(MomentWitness w) { return {false, std::move(w)}; }
};

struct VerifierConfig {
  int relaxation_degree = 2;
  /// Radius of the excised ball around the origin; <= 0 selects the problem's.
  double exclusion_radius = -1.0;
  double feas_tol = 1e-8;
  bool severity = false;
  int max_iterations = 150;
  /// Reach-while-stay checks when the problem carries that data.
  bool reach_while_stay = true;
};

/// Default verifier config for a problem (relaxation degree, exclusion radius).
VerifierConfig default_verifier_config(const ProblemInstance& problem);

struct FarkasResult {
  bool feasible = false;
  Eigen::VectorXd lambda;
};

/// Exists lambda >= 0 with A^T lambda = a and b^T lambda >= -a0 - tol, i.e.
/// a0 + a^T u >= 0 for every u in U.
FarkasResult farkas_feasible(double a0, const Eigen::VectorXd& a, const InputPolytope& U,
                             double tol = 0.0);

Verdict check_positivity(const Polynomial& V, const ProblemInstance& problem,
                         const VerifierConfig& cfg);
Verdict check_decrease(const Polynomial& V, const ProblemInstance& problem,
                       const VerifierConfig& cfg);
/// V > beta on every boundary face of S.
Verdict check_boundary(const Polynomial& V, const ProblemInstance& problem,
                       const VerifierConfig& cfg);
/// V < beta on the initial set.
Verdict check_initial(const Polynomial& V, const ProblemInstance& problem,
                      const VerifierConfig& cfg);

/// Positivity, then decrease, then the reach-while-stay checks.
Verdict verify(const Polynomial& V, const ProblemInstance& problem, const VerifierConfig& cfg);

/// Degree-1 moments clamped into `box`.
Eigen::VectorXd project(const MomentWitness& w, const Box& box);

/// Smallest value of grad V . f(x, u) over the vertices of U.
double min_lie_over_vertices(const Polynomial& V, const ProblemInstance& problem,
                             const Eigen::VectorXd& x);

struct GridFalsifyOptions {
  int density = 201;
  /// Violation amount tolerated before a point is reported.
  double tol = 0.0;
  /// <= 0 selects the problem's exclusion radius.
  double exclusion_radius = -1.0;
};

/// Scans a uniform grid over S_box, skipping points outside S or within the
/// excised ball. Reports the first x with V(x) <= -tol or min over U-vertices
/// of grad V . f >= tol.
std::optional<Eigen::VectorXd> grid_falsify(const Polynomial& V, const ProblemInstance& problem,
                                            const GridFalsifyOptions& opts = {});

}  // namespace clfsyn
