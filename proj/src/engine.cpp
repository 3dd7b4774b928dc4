#include "clfsyn/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "clfsyn/errors.hpp"

namespace clfsyn {

using Eigen::VectorXd;
using json = nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Grid density keeping the cross-check near two million points.
int cross_check_density(std::size_t n, int requested) {
  const double cap = std::floor(std::pow(2.0e6, 1.0 / static_cast<double>(n)));
  return std::max(3, std::min(requested, static_cast<int>(cap)));
}

// True when the region plus `row` has no point with margin eps_w.
bool row_empties_region(const CandidateRegion& region, const Halfspace& row, const VectorXd& start,
                        double eps_w) {
  auto faces = region.all_faces();
  faces.push_back(row);
  return chebyshev_center(faces, start).margin < eps_w;
}

bool eliminated(const std::vector<Halfspace>& rows, const VectorXd& c, double eps_w) {
  return std::any_of(rows.begin(), rows.end(), [&](const Halfspace& h) { return h.slack(c) < eps_w; });
}

}  // namespace

SynthesisConfig default_synthesis_config(const ProblemInstance& problem) {
  SynthesisConfig cfg;
  cfg.verifier = default_verifier_config(problem);
  cfg.mpc = mpc_config_for(problem);
  if (problem.overrides.delta) cfg.learner.delta = *problem.overrides.delta;
  if (problem.overrides.eps_w) cfg.learner.eps_w = *problem.overrides.eps_w;
  cfg.learner.Delta = problem.coeff_box.half_widths().maxCoeff();
  return cfg;
}

std::string outcome_name(Outcome o) {
  switch (o) {
    case Outcome::kSuccess: return "Success";
    case Outcome::kFailureEmpty: return "FailureEmpty";
    case Outcome::kFailureConverged: return "FailureConverged";
    case Outcome::kFailureBudget: return "FailureBudget";
  }
  return "?";
}

Outcome parse_outcome(const std::string& s) {
  for (Outcome o : {Outcome::kSuccess, Outcome::kFailureEmpty, Outcome::kFailureConverged, Outcome::kFailureBudget}) {
    if (outcome_name(o) == s) return o;
  }
  throw ProblemError("unknown outcome '" + s + "'");
}

int exit_code(Outcome o) {
  switch (o) {
    case Outcome::kSuccess: return 0;
    case Outcome::kFailureEmpty:
    case Outcome::kFailureConverged: return 2;
    case Outcome::kFailureBudget: return 3;
  }
  return 3;
}

SynthesisReport synthesize(const ProblemInstance& problem, const SynthesisConfig& config,
                           const IterationObserver& observer) {
  problem.validate();
  const auto t_start = Clock::now();
  const LearnerConfig& lc = config.learner;
  SynthesisReport report;
  report.problem = problem.name;
  report.eps_w = lc.eps_w;
  report.iteration_cap = config.max_iterations > 0
                             ? config.max_iterations
                             : iteration_bound(static_cast<int>(problem.r()), lc.Delta, lc.delta);
  if (report.iteration_cap <= 0 || !(config.max_wall_seconds > 0.0)) {
    throw ProblemError("synthesize: caps must be positive");
  }
  const double rho = config.verifier.exclusion_radius > 0.0 ? config.verifier.exclusion_radius
                                                            : problem.exclusion_radius;

  CandidateRegion region(problem.coeff_box);
  auto finish = [&](Outcome o) {
    report.outcome = o;
    report.region_rows = region.rows().size();
    report.wall_seconds = seconds_since(t_start);
    return report;
  };
  auto abort = [&](const std::string& what) -> SynthesisError {
    report.error = what;
    report.region_rows = region.rows().size();
    report.wall_seconds = seconds_since(t_start);
    return SynthesisError(what, report);
  };

  for (long j = 0;; ++j) {
    if (j >= report.iteration_cap || seconds_since(t_start) > config.max_wall_seconds) {
      return finish(Outcome::kFailureBudget);
    }
    IterationRecord rec;
    rec.index = static_cast<int>(j);

    auto t0 = Clock::now();
    CandidateResult cand;
    try {
      cand = find_candidate(region, lc);
    } catch (const std::exception& e) {
      throw abort(std::string("learner failed: ") + e.what());
    }
    rec.learner_seconds = seconds_since(t0);
    if (cand.kind == CandidateResult::Kind::kEmpty) return finish(Outcome::kFailureEmpty);
    if (cand.kind == CandidateResult::Kind::kConverged) return finish(Outcome::kFailureConverged);
    rec.candidate = cand.c;
    rec.chebyshev_margin = cand.chebyshev_margin;
    const Polynomial V = problem.candidate(cand.c);

    t0 = Clock::now();
    Verdict verdict;
    try {
      verdict = verify(V, problem, config.verifier);
    } catch (const std::exception& e) {
      throw abort(std::string("verifier failed: ") + e.what());
    }
    rec.verifier_seconds = seconds_since(t0);

    if (verdict.valid) {
      rec.valid = true;
      report.iterations.push_back(rec);
      if (observer) observer(rec);
      if (config.cross_check && problem.n() <= 4) {
        GridFalsifyOptions go;
        go.density = cross_check_density(problem.n(), config.cross_check_density);
        go.exclusion_radius = rho;
        if (auto bad = grid_falsify(V, problem, go)) {
          Eigen::IOFormat fmt(Eigen::StreamPrecision, Eigen::DontAlignCols, ", ", ", ", "", "", "(", ")");
          std::ostringstream os;
          os << bad->format(fmt);
          throw abort("grid cross-check contradicts the Valid verdict at " + os.str());
        }
      }
      report.coefficients = cand.c;
      report.clf = format_polynomial(V, problem.variables);
      return finish(Outcome::kSuccess);
    }

    const MomentWitness& w = *verdict.witness;
    t0 = Clock::now();
    auto rows_for = [&](const Demonstration& d) {
      std::vector<Halfspace> rows = relaxed_witness_rows(problem, w, d.u).rows();
      if (d.x.norm() > rho) {
        for (auto& h : state_rows_for(problem, w.kind, d.x, d.u).rows()) rows.push_back(h);
      }
      return rows;
    };
    auto state_decrease = [&](const Demonstration& d) -> std::optional<Halfspace> {
      if (d.x.norm() <= rho) return std::nullopt;
      return witness_rows(problem, d.x, d.u).decrease;
    };
    Demonstration demo;
    try {
      demo = demonstrate_witness(problem, config.mpc, w);
      auto dec = state_decrease(demo);
      if (dec && row_empties_region(region, *dec, cand.c, lc.eps_w)) {
        MpcConfig longer = config.mpc;
        longer.max_iters *= 2;
        demo = demonstrate_witness(problem, longer, w);
        rec.retried = true;
      }
    } catch (const std::exception& e) {
      throw abort(std::string("demonstrator failed: ") + e.what());
    }
    rec.demonstrator_seconds = seconds_since(t0);
    rec.rows = rows_for(demo);
    rec.witness = w;
    rec.demonstration = demo;

    if (!eliminated(rec.rows, cand.c, lc.eps_w)) {
      report.iterations.push_back(rec);
      throw abort("candidate " + std::to_string(j) + " not eliminated by its witness rows");
    }
    for (const auto& h : rec.rows) region.add_row(h);
    report.iterations.push_back(rec);
    if (observer) observer(report.iterations.back());
  }
}

bool replay(const SynthesisReport& report, const ProblemInstance& problem, const LearnerConfig& learner) {
  CandidateRegion region(problem.coeff_box);
  const double eps = report.eps_w;
  std::size_t total_rows = 0;
  for (std::size_t k = 0; k < report.iterations.size(); ++k) {
    const auto& rec = report.iterations[k];
    if (static_cast<std::size_t>(rec.candidate.size()) != problem.r()) return false;
    const CandidateResult cand = find_candidate(region, learner);
    if (cand.kind != CandidateResult::Kind::kCandidate) return false;
    if ((cand.c - rec.candidate).cwiseAbs().maxCoeff() > eps) return false;
    if (region.min_slack(rec.candidate, 0.0) < 0.0) return false;
    if (rec.valid) {
      return k + 1 == report.iterations.size() && report.outcome == Outcome::kSuccess &&
             total_rows == report.region_rows;
    }
    if (rec.rows.empty() || !eliminated(rec.rows, rec.candidate, eps)) return false;
    for (const auto& h : rec.rows) {
      if (static_cast<std::size_t>(h.a.size()) != problem.r()) return false;
      region.add_row(h);
    }
    total_rows += rec.rows.size();
  }
  if (total_rows != report.region_rows || report.outcome == Outcome::kSuccess) return false;
  if (report.outcome == Outcome::kFailureEmpty || report.outcome == Outcome::kFailureConverged) {
    const auto last = find_candidate(region, learner);
    const auto want = report.outcome == Outcome::kFailureEmpty ? CandidateResult::Kind::kEmpty
                                                               : CandidateResult::Kind::kConverged;
    return last.kind == want;
  }
  return true;
}

namespace {

json vec_json(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

VectorXd vec_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

WitnessKind parse_kind(const std::string& s) {
  for (WitnessKind k : {WitnessKind::kPositivity, WitnessKind::kDecrease, WitnessKind::kBoundary, WitnessKind::kInitial}) {
    if (witness_kind_name(k) == s) return k;
  }
  throw ProblemError("unknown witness kind '" + s + "'");
}

json record_json(const IterationRecord& r) {
  json j;
  j["index"] = r.index;
  j["candidate"] = vec_json(r.candidate);
  j["chebyshev_margin"] = r.chebyshev_margin;
  j["verdict"] = r.valid ? "Valid" : "Counterexample";
  if (r.witness) {
    const auto& w = *r.witness;
    j["witness"] = {{"kind", witness_kind_name(w.kind)}, {"order", w.order}, {"nvars", w.nvars},
                    {"y", vec_json(w.y)},   {"lambda", vec_json(w.lambda)}, {"margin", w.margin}};
  }
  if (r.demonstration) {
    const auto& d = *r.demonstration;
    j["demonstration"] = {{"x", vec_json(d.x)}, {"u", vec_json(d.u)}, {"cost", d.cost},
                          {"converged", d.converged}, {"iterations", d.iterations}};
  }
  j["retried"] = r.retried;
  json rows = json::array();
  for (const auto& h : r.rows) rows.push_back({{"a", vec_json(h.a)}, {"b", h.b}, {"tag", h.tag}});
  j["rows"] = rows;
  j["timing"] = {{"learner", r.learner_seconds}, {"verifier", r.verifier_seconds},
                 {"demonstrator", r.demonstrator_seconds}};
  return j;
}

IterationRecord record_from(const json& j) {
  IterationRecord r;
  r.index = j.at("index").get<int>();
  r.candidate = vec_from(j.at("candidate"));
  r.chebyshev_margin = j.at("chebyshev_margin").get<double>();
  const auto verdict = j.at("verdict").get<std::string>();
  if (verdict != "Valid" && verdict != "Counterexample") throw ProblemError("unknown verdict '" + verdict + "'");
  r.valid = verdict == "Valid";
  if (j.contains("witness")) {
    const auto& jw = j.at("witness");
    MomentWitness w;
    w.kind = parse_kind(jw.at("kind").get<std::string>());
    w.order = jw.at("order").get<int>();
    w.nvars = jw.at("nvars").get<std::size_t>();
    w.moments = monomial_basis(w.nvars, 2 * w.order);
    w.y = vec_from(jw.at("y"));
    w.lambda = vec_from(jw.at("lambda"));
    w.margin = jw.at("margin").get<double>();
    if (static_cast<std::size_t>(w.y.size()) != w.moments.size()) throw ProblemError("witness moment count mismatch");
    r.witness = w;
  }
  if (j.contains("demonstration")) {
    const auto& jd = j.at("demonstration");
    Demonstration d;
    d.x = vec_from(jd.at("x"));
    d.u = vec_from(jd.at("u"));
    d.cost = jd.at("cost").get<double>();
    d.converged = jd.at("converged").get<bool>();
    d.iterations = jd.at("iterations").get<int>();
    r.demonstration = d;
  }
  r.retried = j.at("retried").get<bool>();
  for (const auto& h : j.at("rows")) {
    r.rows.push_back({vec_from(h.at("a")), h.at("b").get<double>(), h.at("tag").get<std::string>()});
  }
  const auto& t = j.at("timing");
  r.learner_seconds = t.at("learner").get<double>();
  r.verifier_seconds = t.at("verifier").get<double>();
  r.demonstrator_seconds = t.at("demonstrator").get<double>();
  return r;
}

}  // namespace

std::string report_to_json(const SynthesisReport& report, int indent) {
  json j;
  j["problem"] = report.problem;
  j["outcome"] = outcome_name(report.outcome);
  if (report.coefficients) j["coefficients"] = vec_json(*report.coefficients);
  if (!report.clf.empty()) j["clf"] = report.clf;
  j["iteration_count"] = report.iterations.size();
  j["iteration_cap"] = report.iteration_cap;
  j["eps_w"] = report.eps_w;
  j["region_rows"] = report.region_rows;
  j["wall_seconds"] = report.wall_seconds;
  if (!report.error.empty()) j["error"] = report.error;
  json its = json::array();
  for (const auto& r : report.iterations) its.push_back(record_json(r));
  j["iterations"] = its;
  return j.dump(indent);
}

std::string iteration_to_json_line(const IterationRecord& rec) { return record_json(rec).dump(); }

SynthesisReport report_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    SynthesisReport r;
    r.problem = j.at("problem").get<std::string>();
    r.outcome = parse_outcome(j.at("outcome").get<std::string>());
    if (j.contains("coefficients")) r.coefficients = vec_from(j.at("coefficients"));
    r.clf = j.value("clf", std::string());
    r.iteration_cap = j.at("iteration_cap").get<long>();
    r.eps_w = j.at("eps_w").get<double>();
    r.region_rows = j.at("region_rows").get<std::size_t>();
    r.wall_seconds = j.at("wall_seconds").get<double>();
    r.error = j.value("error", std::string());
    for (const auto& it : j.at("iterations")) r.iterations.push_back(record_from(it));
    if (j.at("iteration_count").get<std::size_t>() != r.iterations.size()) {
      throw ProblemError("iteration_count does not match the iteration list");
    }
    return r;
  } catch (const json::exception& e) {
    throw ProblemError(std::string("malformed report: ") + e.what());
  }
}

}  // namespace clfsyn
