#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clfsyn/demonstrator.hpp"
#include "clfsyn/learner.hpp"
#include "clfsyn/verifier.hpp"

namespace clfsyn {

struct SynthesisConfig {
  LearnerConfig learner;
  VerifierConfig verifier;
  MpcConfig mpc;
  double max_wall_seconds = 3600.0;
  /// <= 0 selects iteration_bound(r, Delta, delta).
  long max_iterations = 0;
  /// Run grid_falsify on success when n <= 4.
  bool cross_check = true;
  int cross_check_density = 201;
};

/// Defaults for a problem: overrides applied, Delta from the coefficient box.
SynthesisConfig default_synthesis_config(const ProblemInstance& problem);

enum class Outcome { kSuccess, kFailureEmpty, kFailureConverged, kFailureBudget };

std::string outcome_name(Outcome o);
Outcome parse_outcome(const std::string& s);
/// 0 success, 2 empty/converged, 3 budget.
int exit_code(Outcome o);

struct IterationRecord {
  int index = 0;
  Eigen::VectorXd candidate;
  double chebyshev_margin = 0.0;
  bool valid = false;
  std::optional<MomentWitness> witness;
  std::optional<Demonstration> demonstration;
  bool retried = false;
  /// Rows added to the region after this iteration.
  std::vector<Halfspace> rows;
  double learner_seconds = 0.0;
  double verifier_seconds = 0.0;
  double demonstrator_seconds = 0.0;
};

struct SynthesisReport {
  std::string problem;
  Outcome outcome = Outcome::kFailureBudget;
  std::optional<Eigen::VectorXd> coefficients;
  std::string clf;
  std::vector<IterationRecord> iterations;
  long iteration_cap = 0;
  double eps_w = 1e-6;
  std::size_t region_rows = 0;
  double wall_seconds = 0.0;
  /// Populated when the loop aborted on a component failure.
  std::string error;
};

/// Carries the partial report of an aborted run.
class SynthesisError : public std::runtime_error {
 public:
  SynthesisError(const std::string& what, SynthesisReport partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const SynthesisReport& partial() const { return partial_; }

 private:
  SynthesisReport partial_;
};

/// Called after each iteration (for streaming logs).
using IterationObserver = std::function<void(const IterationRecord&)>;

SynthesisReport synthesize(const ProblemInstance& problem, const SynthesisConfig& config,
                           const IterationObserver& observer = {});

/// Rebuilds the regions from logged rows and checks, for every iteration,
/// that the learner reproduces the candidate, that it was feasible when
/// proposed and that its rows eliminate it.
bool replay(const SynthesisReport& report, const ProblemInstance& problem, const LearnerConfig& learner);

/// JSON text for a report and for one iteration (JSON-lines log).
std::string report_to_json(const SynthesisReport& report, int indent = 2);
std::string iteration_to_json_line(const IterationRecord& rec);
/// Throws ProblemError on malformed input.
SynthesisReport report_from_json(const std::string& text);

}  // namespace clfsyn
