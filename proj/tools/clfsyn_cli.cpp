// Command-line front end: synthesize, verify, demonstrate, simulate,
// feedback and benchmark.
#include <cstdio>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "clfsyn/engine.hpp"
#include "clfsyn/feedback.hpp"
#include "clfsyn/probio.hpp"
#include "clfsyn/simulator.hpp"

using namespace clfsyn;

namespace {

constexpr int kUsage = 64;

struct ProblemArgs {
  std::string path;
  std::string benchmark;

  void attach(CLI::App* cmd) {
    cmd->add_option("problem", path, "Problem JSON file");
    cmd->add_option("--benchmark,-b", benchmark, "Shipped benchmark id");
  }

  ProblemInstance load() const {
    if (!benchmark.empty() && !path.empty()) throw CLI::ValidationError("give a problem file or --benchmark, not both");
    if (!benchmark.empty()) return load_benchmark(parse_benchmark_id(benchmark));
    if (path.empty()) throw CLI::ValidationError("a problem file or --benchmark is required");
    return load_problem(path);
  }
};

Eigen::VectorXd state_arg(const std::string& csv, std::size_t n, const char* what) {
  const auto v = parse_csv_vector(csv);
  if (v.size() != n) {
    throw ProblemError(std::string(what) + ": expected " + std::to_string(n) + " values, got " + std::to_string(v.size()));
  }
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void print_row(std::ostream& os, const std::vector<double>& vals) {
  for (std::size_t i = 0; i < vals.size(); ++i) os << (i ? "," : "") << vals[i];
  os << "\n";
}

std::string header(const std::vector<std::string>& cols) {
  std::string h;
  for (std::size_t i = 0; i < cols.size(); ++i) h += (i ? "," : "") + cols[i];
  return h;
}

std::vector<std::string> input_names(std::size_t m) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < m; ++i) out.push_back("u" + std::to_string(i + 1));
  return out;
}

struct SynthArgs {
  std::string out;
  std::string log;
  double max_seconds = 0.0;
  long max_iterations = 0;
  std::string strategy = "mve";
  bool severity = false;
  int degree = 0;

  SynthesisConfig config(const ProblemInstance& p) const {
    SynthesisConfig cfg = default_synthesis_config(p);
    if (max_seconds > 0) cfg.max_wall_seconds = max_seconds;
    if (max_iterations > 0) cfg.max_iterations = max_iterations;
    cfg.learner.strategy = strategy == "ellipsoid" ? LearnerStrategy::kEllipsoid : LearnerStrategy::kMve;
    cfg.verifier.severity = severity;
    if (degree > 0) cfg.verifier.relaxation_degree = degree;
    return cfg;
  }
};

int run_synthesize(const ProblemArgs& pa, const SynthArgs& sa) {
  const ProblemInstance p = pa.load();
  const SynthesisConfig cfg = sa.config(p);
  std::ofstream log;
  if (!sa.log.empty()) {
    log.open(sa.log);
    if (!log) throw ProblemError("cannot write '" + sa.log + "'");
  }
  auto observer = [&](const IterationRecord& r) {
    if (log) log << iteration_to_json_line(r) << "\n" << std::flush;
    std::cerr << "iteration " << r.index << ": " << (r.valid ? "Valid" : witness_kind_name(r.witness->kind)) << "\n";
  };
  auto write = [&](const SynthesisReport& rep) {
    if (sa.out.empty()) return;
    std::ofstream os(sa.out);
    if (!os) throw ProblemError("cannot write '" + sa.out + "'");
    os << report_to_json(rep) << "\n";
  };
  try {
    const SynthesisReport rep = synthesize(p, cfg, observer);
    write(rep);
    std::cout << "outcome: " << outcome_name(rep.outcome) << "\n"
              << "iterations: " << rep.iterations.size() << " (cap " << rep.iteration_cap << ")\n"
              << "wall_seconds: " << rep.wall_seconds << "\n";
    if (rep.outcome == Outcome::kSuccess) std::cout << "V = " << rep.clf << "\n";
    return exit_code(rep.outcome);
  } catch (const SynthesisError& e) {
    write(e.partial());
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int run_verify(const ProblemArgs& pa, const std::string& clf, int degree, bool severity) {
  const ProblemInstance p = pa.load();
  const Polynomial V = load_clf(clf, p);
  VerifierConfig cfg = default_verifier_config(p);
  if (degree > 0) cfg.relaxation_degree = degree;
  cfg.severity = severity;
  try {
    const Verdict v = verify(V, p, cfg);
    if (v.valid) {
      std::cout << "Valid\n";
      return 0;
    }
    const auto& w = *v.witness;
    const Eigen::VectorXd x = project(w, p.safe_box);
    std::cout << "Counterexample (" << witness_kind_name(w.kind) << ")\n" << header(p.variables) << "\n";
    print_row(std::cout, std::vector<double>(x.data(), x.data() + x.size()));
    return 2;
  } catch (const IndeterminateError& e) {
    std::cout << "Indeterminate: " << e.what() << "\n";
    return 3;
  }
}

int run_demonstrate(const ProblemArgs& pa, const std::string& state) {
  const ProblemInstance p = pa.load();
  const MpcConfig cfg = mpc_config_for(p);
  const Demonstration d = demonstrate(p, cfg, state_arg(state, p.n(), "--state"));
  std::cout << std::setprecision(10);
  std::cout << "# u";
  for (Eigen::Index i = 0; i < d.u.size(); ++i) std::cout << "," << d.u[i];
  std::cout << "\n# cost," << d.cost << "\n# converged,"
            << (d.converged ? "true" : "false") << "\n";
  auto cols = std::vector<std::string>{"k", "t"};
  for (const auto& v : p.variables) cols.push_back(v);
  for (const auto& u : input_names(p.m())) cols.push_back(u);
  std::cout << header(cols) << "\n";
  for (std::size_t k = 0; k < d.states.size(); ++k) {
    std::vector<double> row{static_cast<double>(k), static_cast<double>(k) * cfg.tau};
    row.insert(row.end(), d.states[k].data(), d.states[k].data() + d.states[k].size());
    for (std::size_t i = 0; i < p.m(); ++i) {
      row.push_back(k < d.plan.size() ? d.plan[k][static_cast<Eigen::Index>(i)] : std::nan(""));
    }
    print_row(std::cout, row);
  }
  return d.converged ? 0 : 2;
}

int run_simulate(const ProblemArgs& pa, const std::string& clf, const std::string& x0, const std::string& law,
                 double t_end, double h, double sigma, double target) {
  const ProblemInstance p = pa.load();
  const Polynomial V = load_clf(clf, p);
  if (law != "sontag" && law != "min-norm") throw CLI::ValidationError("--law must be sontag or min-norm");
  const FeedbackLaw fb(V, p.system, p.inputs, law == "sontag" ? FeedbackMode::kSontag : FeedbackMode::kMinNorm, sigma);
  SimulateOptions opts;
  opts.h = h;
  opts.safe_set = p.safe_set;
  opts.V = V;
  if (target > 0) opts.target_radius = target;
  Trajectory tr;
  int code = 0;
  try {
    tr = simulate(p.system, [&](const Eigen::VectorXd& x) { return fb(x); }, state_arg(x0, p.n(), "--x0"), t_end, opts);
  } catch (const SimulationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    tr = e.partial();
    code = 1;
  }
  auto cols = std::vector<std::string>{"t"};
  for (const auto& v : p.variables) cols.push_back(v);
  for (const auto& u : input_names(p.m())) cols.push_back(u);
  cols.push_back("V");
  std::cout << std::setprecision(10) << header(cols) << "\n";
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    std::vector<double> row{tr.times[k]};
    row.insert(row.end(), tr.states[k].data(), tr.states[k].data() + tr.states[k].size());
    for (std::size_t i = 0; i < p.m(); ++i) {
      row.push_back(k < tr.inputs.size() ? tr.inputs[k][static_cast<Eigen::Index>(i)] : std::nan(""));
    }
    row.push_back(tr.values[k]);
    print_row(std::cout, row);
  }
  if (tr.exited) {
    std::cerr << "trajectory left the safe set\n";
    if (code == 0) code = 2;
  }
  return code;
}

int run_feedback(const ProblemArgs& pa, const std::string& clf, const std::string& state, const std::string& law,
                 double sigma) {
  const ProblemInstance p = pa.load();
  const Polynomial V = load_clf(clf, p);
  const Eigen::VectorXd x = state_arg(state, p.n(), "--state");
  Eigen::VectorXd u;
  if (law == "sontag") {
    u = sontag(V, p.system, x);
  } else if (law == "min-norm") {
    const MinNormResult r = min_norm(V, p.system, p.inputs, sigma, x);
    u = r.u;
    if (r.relaxed) std::cerr << "sigma relaxed to " << r.sigma << "\n";
  } else {
    throw CLI::ValidationError("--law must be sontag or min-norm");
  }
  std::cout << std::setprecision(12) << header(input_names(p.m())) << "\n";
  print_row(std::cout, std::vector<double>(u.data(), u.data() + u.size()));
  return 0;
}

int run_benchmark(bool all, std::vector<std::string> ids, double max_seconds) {
  if (!all && ids.empty()) throw CLI::ValidationError("pass --all or one or more --only ids");
  std::vector<BenchmarkId> which;
  if (all) {
    which = all_benchmarks();
  } else {
    for (const auto& s : ids) which.push_back(parse_benchmark_id(s));
  }
  struct Row {
    std::string name;
    std::size_t n, m;
    double tau, T;
    int dv;
    std::string outcome;
    std::size_t iterations;
    double minutes;
  };
  std::vector<std::future<Row>> jobs;
  for (BenchmarkId id : which) {
    jobs.push_back(std::async(std::launch::async, [id, max_seconds]() {
      const ProblemInstance p = load_benchmark(id);
      SynthesisConfig cfg = default_synthesis_config(p);
      if (max_seconds > 0) cfg.max_wall_seconds = max_seconds;
      Row r{p.name, p.n(), p.m(), cfg.mpc.tau, cfg.mpc.horizon, cfg.verifier.relaxation_degree, "", 0, 0.0};
      try {
        const SynthesisReport rep = synthesize(p, cfg);
        r.outcome = outcome_name(rep.outcome);
        r.iterations = rep.iterations.size();
        r.minutes = rep.wall_seconds / 60.0;
      } catch (const SynthesisError& e) {
        r.outcome = "Aborted";
        r.iterations = e.partial().iterations.size();
        r.minutes = e.partial().wall_seconds / 60.0;
      }
      return r;
    }));
  }
  std::cout << std::left << std::setw(20) << "system" << std::setw(4) << "n" << std::setw(4) << "m" << std::setw(7)
            << "tau" << std::setw(7) << "T" << std::setw(5) << "D_V" << std::setw(7) << "itr" << std::setw(10)
            << "minutes" << "outcome\n";
  int code = 0;
  for (auto& j : jobs) {
    const Row r = j.get();
    std::cout << std::left << std::setw(20) << r.name << std::setw(4) << r.n << std::setw(4) << r.m << std::setw(7)
              << r.tau << std::setw(7) << r.T << std::setw(5) << r.dv << std::setw(7) << r.iterations << std::setw(10)
              << std::fixed << std::setprecision(2) << r.minutes << std::defaultfloat << r.outcome << "\n";
    if (r.outcome != "Success") code = 2;
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn control Lyapunov functions from counterexamples and demonstrations"};
  app.require_subcommand(1);

  ProblemArgs pa;
  SynthArgs sa;
  auto* syn = app.add_subcommand("synthesize", "Run the learner/verifier/demonstrator loop");
  pa.attach(syn);
  syn->add_option("--out,-o", sa.out, "Write the JSON report here");
  syn->add_option("--log", sa.log, "Write one JSON line per iteration here");
  syn->add_option("--max-seconds", sa.max_seconds, "Wall-clock budget");
  syn->add_option("--max-iterations", sa.max_iterations, "Iteration cap (default: the cutting-plane bound)");
  syn->add_option("--strategy", sa.strategy, "mve or ellipsoid")->check(CLI::IsMember({"mve", "ellipsoid"}));
  syn->add_flag("--severity", sa.severity, "Prefer the most violated counterexample");
  syn->add_option("--degree", sa.degree, "Relaxation degree");

  std::string clf, state, x0, law = "min-norm";
  int degree = 0;
  bool severity = false;
  auto* ver = app.add_subcommand("verify", "Check a candidate CLF");
  pa.attach(ver);
  ver->add_option("--clf", clf, "Expression or JSON file")->required();
  ver->add_option("--degree", degree, "Relaxation degree");
  ver->add_flag("--severity", severity, "Prefer the most violated counterexample");

  auto* dem = app.add_subcommand("demonstrate", "Query the MPC demonstrator at a state");
  pa.attach(dem);
  dem->add_option("--state", state, "Comma-separated state")->required();

  double t_end = 30.0, h = 0.01, sigma = 0.1, target = 0.0;
  auto* sim = app.add_subcommand("simulate", "Closed-loop simulation under a CLF feedback law");
  pa.attach(sim);
  sim->add_option("--clf", clf, "Expression or JSON file")->required();
  sim->add_option("--x0", x0, "Comma-separated initial state")->required();
  sim->add_option("--law", law, "sontag or min-norm")->check(CLI::IsMember({"sontag", "min-norm"}));
  sim->add_option("--t-end", t_end, "Simulated time");
  sim->add_option("--step", h, "Integration step");
  sim->add_option("--sigma", sigma, "Decay rate for min-norm");
  sim->add_option("--target", target, "Stop inside this radius");

  auto* fbk = app.add_subcommand("feedback", "Evaluate a feedback law at a state");
  pa.attach(fbk);
  fbk->add_option("--clf", clf, "Expression or JSON file")->required();
  fbk->add_option("--state", state, "Comma-separated state")->required();
  fbk->add_option("--law", law, "sontag or min-norm")->check(CLI::IsMember({"sontag", "min-norm"}));
  fbk->add_option("--sigma", sigma, "Decay rate for min-norm");

  bool all = false;
  std::vector<std::string> only;
  double bench_seconds = 0.0;
  auto* bench = app.add_subcommand("benchmark", "Run the shipped benchmarks and print a summary table");
  bench->add_flag("--all", all, "Every shipped benchmark");
  bench->add_option("--only", only, "Benchmark ids");
  bench->add_option("--max-seconds", bench_seconds, "Wall-clock budget per benchmark");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*syn) return run_synthesize(pa, sa);
    if (*ver) return run_verify(pa, clf, degree, severity);
    if (*dem) return run_demonstrate(pa, state);
    if (*sim) return run_simulate(pa, clf, x0, law, t_end, h, sigma, target);
    if (*fbk) return run_feedback(pa, clf, state, law, sigma);
    if (*bench) return run_benchmark(all, only, bench_seconds);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    // ProblemError, DimensionError and parse failures on user input.
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kUsage;
}
