#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clfsyn/dynamics.hpp"
#include "clfsyn/sets.hpp"
#include "clfsyn/verifier.hpp"

namespace clfsyn {

/// a^T c <= b - eps_w, stored with ||a||_2 = 1 (a zero row stays zero).
struct Halfspace {
  Eigen::VectorXd a;
  double b = 0.0;
  std::string tag;

  static Halfspace normalized(Eigen::VectorXd a, double b, std::string tag = {});
  /// b - a^T c.
  double slack(const Eigen::VectorXd& c) const { return b - a.dot(c); }
};

struct WitnessConstraintPair {
  std::optional<Halfspace> positivity;
  std::optional<Halfspace> decrease;
  std::vector<Halfspace> extra;
  std::string source;

  std::vector<Halfspace> rows() const;
};

/// Rows at a concrete state x with input u: V_c(x) > 0 and grad V_c . f(x,u) < 0.
/// Throws ProblemError for x = 0.
WitnessConstraintPair witness_rows(const ProblemInstance& problem, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& u);

/// Rows read off a moment witness through the Riesz functional; decrease
/// rows use the input u. Boundary and initial witnesses give V_c > beta and
/// V_c < beta respectively.
WitnessConstraintPair relaxed_witness_rows(const ProblemInstance& problem, const MomentWitness& w,
                                           const Eigen::VectorXd& u);

/// Same for a concrete state attached to a reach-while-stay witness.
WitnessConstraintPair state_rows_for(const ProblemInstance& problem, WitnessKind kind,
                                     const Eigen::VectorXd& x, const Eigen::VectorXd& u);

enum class LearnerStrategy { kMve, kEllipsoid };

struct LearnerConfig {
  LearnerStrategy strategy = LearnerStrategy::kMve;
  double delta = 1e-3;
  double eps_w = 1e-6;
  double Delta = 100.0;
};

struct MveResult {
  Eigen::VectorXd d;
  Eigen::MatrixXd B;
  double logdet = 0.0;
  /// Duality-gap bound of the barrier path at exit.
  double kkt_residual = 0.0;
  /// True when Newton stalled and the last barrier iterate was returned.
  bool fallback = false;
};

/// Ellipsoid {center + P^{1/2} v : ||v|| <= 1}.
struct Ellipsoid {
  Eigen::VectorXd center;
  Eigen::MatrixXd P;

  double logvol() const;  // log det P^{1/2}, up to the unit-ball constant
  double max_semi_axis() const;
};

class CandidateRegion {
 public:
  explicit CandidateRegion(Box c0);

  const Box& box() const { return box_; }
  std::size_t dim() const { return box_.dim(); }
  const std::vector<Halfspace>& rows() const { return rows_; }

  void add_row(Halfspace h);
  void add_witness(const WitnessConstraintPair& pair);

  /// Smallest margined slack over rows and box faces: min(b - eps - a^T c).
  double min_slack(const Eigen::VectorXd& c, double eps_w) const;
  bool contains(const Eigen::VectorXd& c, double eps_w) const { return min_slack(c, eps_w) >= 0.0; }

  /// Rows plus the 2r box faces as unit halfspaces.
  std::vector<Halfspace> all_faces() const;

  /// Ellipsoid-strategy state (starts as the box's circumscribed ellipsoid).
  Ellipsoid& ellipsoid();

  std::optional<MveResult> cached_mve;

 private:
  Box box_;
  std::vector<Halfspace> rows_;
  std::optional<Ellipsoid> ellipsoid_;
};

/// Largest Euclidean margin t with a_i^T c + t <= b_i over rows and box faces.
struct ChebyshevResult {
  Eigen::VectorXd center;
  double margin = 0.0;
};
ChebyshevResult chebyshev_center(const std::vector<Halfspace>& faces, const Eigen::VectorXd& start);

/// max log det B s.t. ||B a_i|| + a_i^T d <= b_i - margin for every face.
MveResult mve(const std::vector<Halfspace>& rows, const Box& box, double margin = 0.0);

struct CandidateResult {
  enum class Kind { kCandidate, kEmpty, kConverged } kind = Kind::kEmpty;
  Eigen::VectorXd c;
  double chebyshev_margin = 0.0;
  std::optional<MveResult> mve;
};

CandidateResult find_candidate(CandidateRegion& region, const LearnerConfig& cfg);

/// Central cut through E's center keeping {x : a^T x <= a^T center}.
Ellipsoid ellipsoid_step(const Ellipsoid& E, const Eigen::VectorXd& a);

/// Cutting-plane iteration bound for r coefficients, box half-width Delta
/// and robustness radius delta.
long iteration_bound(int r, double Delta, double delta);

}  // namespace clfsyn
