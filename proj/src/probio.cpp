#include "clfsyn/probio.hpp"

#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace clfsyn {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using json = nlohmann::json;

namespace {

class ExprParser {
 public:
  ExprParser(const std::string& src, const std::vector<std::string>& vars) : s_(src), vars_(vars) {}

  Polynomial parse() {
    Polynomial p = expr();
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == '/') fail("division is not supported");
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ExprError(msg, pos_ + 1); }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Polynomial expr() {
    Polynomial p = term();
    for (;;) {
      if (accept('+')) {
        p += term();
      } else if (accept('-')) {
        p = p - term();
      } else {
        return p;
      }
    }
  }

  Polynomial term() {
    Polynomial p = factor();
    while (accept('*')) p = p * factor();
    return p;
  }

  Polynomial factor() {
    if (accept('-')) return factor() * -1.0;
    Polynomial b = base();
    if (accept('^')) {
      skip_ws();
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (start == pos_) fail("exponent must be a nonnegative integer literal");
      if (pos_ < s_.size() && (s_[pos_] == '.' || s_[pos_] == 'e' || s_[pos_] == 'E')) {
        pos_ = start;
        fail("exponent must be a nonnegative integer literal");
      }
      int e = 0;
      auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, e);
      if (ec != std::errc() || e > 64) {
        pos_ = start;
        fail("exponent out of range");
      }
      b = b.pow(e);
    }
    return b;
  }

  Polynomial base() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Polynomial p = expr();
      if (!accept(')')) fail("expected ')'");
      return p;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return Polynomial::constant(vars_.size(), number());
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string id = s_.substr(start, pos_ - start);
      for (std::size_t i = 0; i < vars_.size(); ++i) {
        if (vars_[i] == id) return Polynomial::variable(vars_.size(), i);
      }
      pos_ = start;
      fail("unknown variable '" + id + "'");
    }
    if (c == '/') fail("division is not supported");
    fail("unexpected '" + std::string(1, c) + "'");
  }

  double number() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t q = pos_ + 1;
      if (q < s_.size() && (s_[q] == '+' || s_[q] == '-')) ++q;
      if (q < s_.size() && std::isdigit(static_cast<unsigned char>(s_[q]))) {
        pos_ = q;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      }
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, v);
    if (ec != std::errc() || ptr != s_.data() + pos_) {
      pos_ = start;
      fail("malformed number");
    }
    return v;
  }

  const std::string& s_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ProblemError("cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Schema walker that reports JSON-pointer paths.
class Reader {
 public:
  Reader(const json& root, std::vector<std::string> vars) : root_(root), vars_(std::move(vars)) {}

  [[noreturn]] static void fail(const std::string& ptr, const std::string& msg) {
    throw ProblemError((ptr.empty() ? "/" : ptr) + ": " + msg);
  }

  static const json& at(const json& j, const std::string& ptr, const std::string& key) {
    if (!j.is_object()) fail(ptr, "expected an object");
    if (!j.contains(key)) fail(ptr + "/" + key, "missing required field");
    return j.at(key);
  }

  static double number(const json& j, const std::string& ptr) {
    if (!j.is_number()) fail(ptr, "expected a number");
    return j.get<double>();
  }

  static int integer(const json& j, const std::string& ptr) {
    if (!j.is_number_integer()) fail(ptr, "expected an integer");
    return j.get<int>();
  }

  static std::string string(const json& j, const std::string& ptr) {
    if (!j.is_string()) fail(ptr, "expected a string");
    return j.get<std::string>();
  }

  static const json& array(const json& j, const std::string& ptr) {
    if (!j.is_array()) fail(ptr, "expected an array");
    return j;
  }

  static VectorXd vector(const json& j, const std::string& ptr) {
    array(j, ptr);
    VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i], ptr + "/" + std::to_string(i));
    return v;
  }

  Polynomial poly(const json& j, const std::string& ptr) const {
    const std::string src = string(j, ptr);
    try {
      return parse_poly(src, vars_);
    } catch (const ExprError& e) {
      fail(ptr, e.what());
    }
  }

  std::vector<Polynomial> polys(const json& j, const std::string& ptr) const {
    array(j, ptr);
    std::vector<Polynomial> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(poly(j[i], ptr + "/" + std::to_string(i)));
    return out;
  }

 private:
  const json& root_;
  std::vector<std::string> vars_;
};

Box read_box(const json& j, const std::string& ptr, std::size_t dim) {
  const VectorXd lo = Reader::vector(Reader::at(j, ptr, "lower"), ptr + "/lower");
  const VectorXd hi = Reader::vector(Reader::at(j, ptr, "upper"), ptr + "/upper");
  if (static_cast<std::size_t>(lo.size()) != dim || static_cast<std::size_t>(hi.size()) != dim) {
    Reader::fail(ptr, "expected " + std::to_string(dim) + " bounds");
  }
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (!(lo[i] < hi[i])) Reader::fail(ptr + "/lower/" + std::to_string(i), "lower bound must be below upper bound");
  }
  return Box(lo, hi);
}

json strings(const std::vector<Polynomial>& ps, const std::vector<std::string>& names) {
  json a = json::array();
  for (const auto& p : ps) a.push_back(format_polynomial(p, names));
  return a;
}

json vec(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

Polynomial parse_poly(const std::string& src, const std::vector<std::string>& vars) {
  return ExprParser(src, vars).parse();
}

ProblemInstance problem_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    // Byte offset to line/column.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ProblemError("line " + std::to_string(line) + ", column " + std::to_string(col) + ": malformed JSON");
  }
  if (!root.is_object()) Reader::fail("", "expected an object");
  const std::string version = Reader::string(Reader::at(root, "", "schema_version"), "/schema_version");
  if (version != kSchemaVersion) Reader::fail("/schema_version", "unsupported version '" + version + "'");

  ProblemInstance p;
  p.name = root.contains("name") ? Reader::string(root["name"], "/name") : "problem";
  const json& jv = Reader::array(Reader::at(root, "", "variables"), "/variables");
  if (jv.empty()) Reader::fail("/variables", "at least one variable required");
  for (std::size_t i = 0; i < jv.size(); ++i) {
    const std::string v = Reader::string(jv[i], "/variables/" + std::to_string(i));
    if (v.empty() || !(std::isalpha(static_cast<unsigned char>(v[0])) || v[0] == '_')) {
      Reader::fail("/variables/" + std::to_string(i), "invalid identifier '" + v + "'");
    }
    if (std::find(p.variables.begin(), p.variables.end(), v) != p.variables.end()) {
      Reader::fail("/variables/" + std::to_string(i), "duplicate variable '" + v + "'");
    }
    p.variables.push_back(v);
  }
  const std::size_t n = p.variables.size();
  const Reader rd(root, p.variables);

  const json& dyn = Reader::at(root, "", "dynamics");
  auto f0 = rd.polys(Reader::at(dyn, "/dynamics", "f0"), "/dynamics/f0");
  if (f0.size() != n) Reader::fail("/dynamics/f0", "expected " + std::to_string(n) + " components");
  const json& jch = Reader::array(Reader::at(dyn, "/dynamics", "channels"), "/dynamics/channels");
  std::vector<std::vector<Polynomial>> channels;
  for (std::size_t i = 0; i < jch.size(); ++i) {
    const std::string ptr = "/dynamics/channels/" + std::to_string(i);
    channels.push_back(rd.polys(jch[i], ptr));
    if (channels.back().size() != n) Reader::fail(ptr, "expected " + std::to_string(n) + " components");
  }
  p.system = ControlAffineSystem(std::move(f0), std::move(channels));
  const std::size_t m = p.system.m();

  p.safe_set.nvars = n;
  p.safe_set.constraints = rd.polys(Reader::at(root, "", "safe_set"), "/safe_set");
  p.safe_box = read_box(Reader::at(root, "", "s_box"), "/s_box", n);

  const json& ji = Reader::at(root, "", "inputs");
  try {
    if (ji.is_object() && ji.contains("lower")) {
      const Box b = read_box(ji, "/inputs", m);
      p.inputs = interval_input_polytope(b.lower(), b.upper());
    } else {
      const json& ja = Reader::array(Reader::at(ji, "/inputs", "A"), "/inputs/A");
      const VectorXd b = Reader::vector(Reader::at(ji, "/inputs", "b"), "/inputs/b");
      MatrixXd A(static_cast<Eigen::Index>(ja.size()), static_cast<Eigen::Index>(m));
      for (std::size_t r = 0; r < ja.size(); ++r) {
        const VectorXd row = Reader::vector(ja[r], "/inputs/A/" + std::to_string(r));
        if (static_cast<std::size_t>(row.size()) != m) Reader::fail("/inputs/A/" + std::to_string(r), "expected " + std::to_string(m) + " entries");
        A.row(static_cast<Eigen::Index>(r)) = row.transpose();
      }
      if (b.size() != A.rows()) Reader::fail("/inputs/b", "length must match the rows of A");
      p.inputs = InputPolytope(A, b);
    }
  } catch (const DimensionError& e) {
    Reader::fail("/inputs", e.what());
  } catch (const NumericalError& e) {
    Reader::fail("/inputs", e.what());
  }

  const json& jb = Reader::at(root, "", "basis");
  if (jb.is_string()) {
    if (jb.get<std::string>() != "quadratic") Reader::fail("/basis", "expected \"quadratic\" or an array of expressions");
    p.basis = quadratic_basis(n);
  } else {
    p.basis = rd.polys(jb, "/basis");
  }
  const VectorXd origin = VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < p.basis.size(); ++j) {
    if (p.basis[j].eval(origin) != 0.0) Reader::fail("/basis/" + std::to_string(j), "basis function does not vanish at the origin");
  }
  for (const auto& g : p.basis) p.basis_labels.push_back(format_polynomial(g, p.variables));

  const json& jc = Reader::at(root, "", "c0_halfwidth");
  if (jc.is_array()) {
    const VectorXd h = Reader::vector(jc, "/c0_halfwidth");
    if (static_cast<std::size_t>(h.size()) != p.basis.size()) Reader::fail("/c0_halfwidth", "one half-width per basis function");
    if ((h.array() <= 0).any()) Reader::fail("/c0_halfwidth", "half-widths must be positive");
    p.coeff_box = Box(-h, h);
  } else {
    const double h = Reader::number(jc, "/c0_halfwidth");
    if (!(h > 0)) Reader::fail("/c0_halfwidth", "half-width must be positive");
    p.coeff_box = Box::symmetric(p.basis.size(), h);
  }

  p.exclusion_radius = root.contains("exclusion_radius") ? Reader::number(root["exclusion_radius"], "/exclusion_radius")
                                                         : default_exclusion_radius(p.safe_box);

  if (root.contains("reach_while_stay")) {
    const json& jr = root["reach_while_stay"];
    ReachWhileStay rws;
    rws.init_set.nvars = n;
    rws.init_set.constraints = rd.polys(Reader::at(jr, "/reach_while_stay", "init_set"), "/reach_while_stay/init_set");
    rws.beta = Reader::number(Reader::at(jr, "/reach_while_stay", "beta"), "/reach_while_stay/beta");
    rws.boundary_faces = jr.contains("boundary_faces")
                             ? rd.polys(jr["boundary_faces"], "/reach_while_stay/boundary_faces")
                             : p.safe_set.constraints;
    if (jr.contains("target_radius")) rws.target_radius = Reader::number(jr["target_radius"], "/reach_while_stay/target_radius");
    p.reach_while_stay = rws;
  }

  if (root.contains("mpc")) {
    const json& j = root["mpc"];
    if (j.contains("tau")) p.overrides.mpc_tau = Reader::number(j["tau"], "/mpc/tau");
    if (j.contains("horizon")) p.overrides.mpc_horizon = Reader::number(j["horizon"], "/mpc/horizon");
    if (j.contains("max_iters")) p.overrides.mpc_max_iters = Reader::integer(j["max_iters"], "/mpc/max_iters");
  }
  if (root.contains("verifier")) {
    const json& j = root["verifier"];
    if (j.contains("relaxation_degree")) p.overrides.relaxation_degree = Reader::integer(j["relaxation_degree"], "/verifier/relaxation_degree");
  }
  if (root.contains("learner")) {
    const json& j = root["learner"];
    if (j.contains("delta")) p.overrides.delta = Reader::number(j["delta"], "/learner/delta");
    if (j.contains("eps_w")) p.overrides.eps_w = Reader::number(j["eps_w"], "/learner/eps_w");
  }

  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    Reader::fail("", e.what());
  }
  return p;
}

ProblemInstance load_problem(const std::string& path) { return problem_from_json(read_file(path)); }

std::string problem_to_json(const ProblemInstance& p) {
  const auto& names = p.variables;
  json j;
  j["schema_version"] = kSchemaVersion;
  j["name"] = p.name;
  j["variables"] = names;
  json channels = json::array();
  for (const auto& ch : p.system.channels()) channels.push_back(strings(ch, names));
  j["dynamics"] = {{"f0", strings(p.system.drift(), names)}, {"channels", channels}};
  j["safe_set"] = strings(p.safe_set.constraints, names);
  j["s_box"] = {{"lower", vec(p.safe_box.lower())}, {"upper", vec(p.safe_box.upper())}};
  if (p.inputs.is_interval()) {
    j["inputs"] = {{"lower", vec(p.inputs.interval_lower())}, {"upper", vec(p.inputs.interval_upper())}};
  } else {
    json A = json::array();
    for (Eigen::Index r = 0; r < p.inputs.A().rows(); ++r) A.push_back(vec(p.inputs.A().row(r).transpose()));
    j["inputs"] = {{"A", A}, {"b", vec(p.inputs.b())}};
  }
  if (p.basis == quadratic_basis(p.n())) {
    j["basis"] = "quadratic";
  } else {
    j["basis"] = strings(p.basis, names);
  }
  const VectorXd h = p.coeff_box.half_widths();
  if ((p.coeff_box.lower() + p.coeff_box.upper()).isZero(0.0) && (h.array() == h[0]).all()) {
    j["c0_halfwidth"] = h[0];
  } else {
    j["c0_halfwidth"] = vec(p.coeff_box.upper());
  }
  j["exclusion_radius"] = p.exclusion_radius;
  if (p.reach_while_stay) {
    const auto& r = *p.reach_while_stay;
    json jr = {{"init_set", strings(r.init_set.constraints, names)}, {"beta", r.beta}};
    if (r.boundary_faces != p.safe_set.constraints) jr["boundary_faces"] = strings(r.boundary_faces, names);
    if (r.target_radius) jr["target_radius"] = *r.target_radius;
    j["reach_while_stay"] = jr;
  }
  const auto& o = p.overrides;
  json mpc = json::object(), ver = json::object(), lrn = json::object();
  if (o.mpc_tau) mpc["tau"] = *o.mpc_tau;
  if (o.mpc_horizon) mpc["horizon"] = *o.mpc_horizon;
  if (o.mpc_max_iters) mpc["max_iters"] = *o.mpc_max_iters;
  if (o.relaxation_degree) ver["relaxation_degree"] = *o.relaxation_degree;
  if (o.delta) lrn["delta"] = *o.delta;
  if (o.eps_w) lrn["eps_w"] = *o.eps_w;
  if (!mpc.empty()) j["mpc"] = mpc;
  if (!ver.empty()) j["verifier"] = ver;
  if (!lrn.empty()) j["learner"] = lrn;
  return j.dump(2) + "\n";
}

void save_problem(const ProblemInstance& problem, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ProblemError("cannot write '" + path + "'");
  out << problem_to_json(problem);
}

Polynomial load_clf(const std::string& spec, const ProblemInstance& problem) {
  std::error_code ec;
  const bool looks_like_file = spec.size() > 5 && spec.compare(spec.size() - 5, 5, ".json") == 0;
  if (!looks_like_file && !std::filesystem::is_regular_file(spec, ec)) {
    return parse_poly(spec, problem.variables);
  }
  json j;
  try {
    j = json::parse(read_file(spec));
  } catch (const json::parse_error&) {
    throw ProblemError(spec + ": malformed JSON");
  }
  if (j.is_object() && j.contains("coefficients")) {
    const VectorXd c = Reader::vector(j["coefficients"], "/coefficients");
    if (static_cast<std::size_t>(c.size()) != problem.r()) {
      Reader::fail("/coefficients", "expected " + std::to_string(problem.r()) + " coefficients");
    }
    return problem.candidate(c);
  }
  if (j.is_object() && j.contains("clf")) {
    const Reader rd(j, problem.variables);
    return rd.poly(j["clf"], "/clf");
  }
  throw ProblemError(spec + ": expected a \"coefficients\" or \"clf\" field");
}

std::vector<double> parse_csv_vector(const std::string& s) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t end = s.find(',', pos);
    if (end == std::string::npos) end = s.size();
    std::string tok = s.substr(pos, end - pos);
    tok.erase(0, tok.find_first_not_of(" \t"));
    tok.erase(tok.find_last_not_of(" \t") + 1);
    double v = 0.0;
    auto [ptr, e] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || e != std::errc() || ptr != tok.data() + tok.size()) {
      throw ProblemError("malformed number '" + tok + "' in list");
    }
    out.push_back(v);
    pos = end + 1;
  }
  return out;
}

}  // namespace clfsyn
