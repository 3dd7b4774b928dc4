#include "clfsyn/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "clfsyn/errors.hpp"

namespace clfsyn {

Monomial::Monomial(std::vector<int> exps) : exps_(std::move(exps)) {
  for (int e : exps_) {
    if (e < 0) throw std::invalid_argument("Monomial: negative exponent");
  }
}

Monomial Monomial::variable(std::size_t nvars, std::size_t index) {
  Monomial m(nvars);
  m.exps_.at(index) = 1;
  return m;
}

int Monomial::degree() const {
  return std::accumulate(exps_.begin(), exps_.end(), 0);
}

Monomial Monomial::operator*(const Monomial& other) const {
  require_dim(other.nvars(), nvars(), "Monomial::operator*");
  Monomial out(*this);
  for (std::size_t i = 0; i < exps_.size(); ++i) out.exps_[i] += other.exps_[i];
  return out;
}

Monomial Monomial::operator/(const Monomial& other) const {
  require_dim(other.nvars(), nvars(), "Monomial::operator/");
  Monomial out(*this);
  for (std::size_t i = 0; i < exps_.size(); ++i) {
    out.exps_[i] -= other.exps_[i];
    if (out.exps_[i] < 0) throw std::invalid_argument("Monomial: not divisible");
  }
  return out;
}

bool Monomial::divides(const Monomial& other) const {
  if (other.nvars() != nvars()) return false;
  for (std::size_t i = 0; i < exps_.size(); ++i) {
    if (exps_[i] > other.exps_[i]) return false;
  }
  return true;
}

double Monomial::eval(const Eigen::VectorXd& x) const {
  double v = 1.0;
  for (std::size_t i = 0; i < exps_.size(); ++i) {
    for (int k = 0; k < exps_[i]; ++k) v *= x[static_cast<Eigen::Index>(i)];
  }
  return v;
}

bool GradedLexLess::operator()(const Monomial& a, const Monomial& b) const {
  const int da = a.degree();
  const int db = b.degree();
  if (da != db) return da < db;
  const std::size_t n = std::min(a.nvars(), b.nvars());
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] != b[i]) return a[i] > b[i];
  }
  return a.nvars() < b.nvars();
}

Polynomial Polynomial::constant(std::size_t nvars, double value) {
  Polynomial p(nvars);
  p.add_term(Monomial::constant(nvars), value);
  return p;
}

Polynomial Polynomial::variable(std::size_t nvars, std::size_t index) {
  Polynomial p(nvars);
  p.add_term(Monomial::variable(nvars, index), 1.0);
  return p;
}

Polynomial Polynomial::monomial(const Monomial& m, double coeff) {
  Polynomial p(m.nvars());
  p.add_term(m, coeff);
  return p;
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
  return d;
}

double Polynomial::coeff(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::add_term(const Monomial& m, double c) {
  require_dim(m.nvars(), nvars_, "Polynomial::add_term");
  if (c == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

double Polynomial::eval(const Eigen::VectorXd& x) const {
  require_dim(static_cast<std::size_t>(x.size()), nvars_, "Polynomial::eval");
  // Neumaier compensated summation.
  double sum = 0.0;
  double comp = 0.0;
  for (const auto& [m, c] : terms_) {
    const double term = c * m.eval(x);
    const double t = sum + term;
    if (std::abs(sum) >= std::abs(term)) {
      comp += (sum - t) + term;
    } else {
      comp += (term - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

void Polynomial::check_same_dim(const Polynomial& o) const {
  require_dim(o.nvars_, nvars_, "Polynomial arithmetic");
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  check_same_dim(o);
  for (const auto& [m, c] : o.terms_) add_term(m, c);
  return *this;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  Polynomial out(*this);
  out += o;
  return out;
}

Polynomial Polynomial::operator-(const Polynomial& o) const {
  return *this + (o * -1.0);
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
  check_same_dim(o);
  Polynomial out(nvars_);
  for (const auto& [ma, ca] : terms_) {
    for (const auto& [mb, cb] : o.terms_) out.add_term(ma * mb, ca * cb);
  }
  return out;
}

Polynomial Polynomial::operator*(double s) const {
  Polynomial out(nvars_);
  if (s == 0.0) return out;
  for (const auto& [m, c] : terms_) out.add_term(m, c * s);
  return out;
}

Polynomial Polynomial::pow(int k) const {
  if (k < 0) throw std::invalid_argument("Polynomial::pow: negative exponent");
  Polynomial out = Polynomial::constant(nvars_, 1.0);
  for (int i = 0; i < k; ++i) out = out * *this;
  return out;
}

Polynomial Polynomial::derivative(std::size_t var) const {
  if (var >= nvars_) throw DimensionError("Polynomial::derivative: index out of range");
  Polynomial out(nvars_);
  for (const auto& [m, c] : terms_) {
    const int e = m[var];
    if (e == 0) continue;
    std::vector<int> exps = m.exponents();
    exps[var] -= 1;
    out.add_term(Monomial(std::move(exps)), c * e);
  }
  return out;
}

Polynomial Polynomial::scale_variables(const Eigen::VectorXd& scale) const {
  require_dim(static_cast<std::size_t>(scale.size()), nvars_, "scale_variables");
  Polynomial out(nvars_);
  for (const auto& [m, c] : terms_) out.add_term(m, c * m.eval(scale));
  return out;
}

double Polynomial::max_abs_coeff() const {
  double v = 0.0;
  for (const auto& [m, c] : terms_) v = std::max(v, std::abs(c));
  return v;
}

std::vector<Polynomial> grad(const Polynomial& p) {
  std::vector<Polynomial> g;
  g.reserve(p.nvars());
  for (std::size_t i = 0; i < p.nvars(); ++i) g.push_back(p.derivative(i));
  return g;
}

Polynomial dot(const std::vector<Polynomial>& a, const std::vector<Polynomial>& b) {
  require_dim(b.size(), a.size(), "dot");
  if (a.empty()) return Polynomial();
  Polynomial out(a.front().nvars());
  for (std::size_t i = 0; i < a.size(); ++i) out += a[i] * b[i];
  return out;
}

namespace {

// Appends every exponent vector of total degree `remaining` over variables
// [var, n), larger leading powers first.
void enumerate_exact(std::size_t var, int remaining, std::vector<int>& current,
                     std::vector<Monomial>& out) {
  const std::size_t n = current.size();
  if (var + 1 == n) {
    current[var] = remaining;
    out.emplace_back(current);
    current[var] = 0;
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    current[var] = e;
    enumerate_exact(var + 1, remaining - e, current, out);
  }
  current[var] = 0;
}

}  // namespace

std::vector<Monomial> homogeneous_monomials(std::size_t nvars, int degree) {
  if (nvars == 0) throw std::invalid_argument("homogeneous_monomials: nvars must be >= 1");
  std::vector<Monomial> out;
  if (degree < 0) return out;
  std::vector<int> current(nvars, 0);
  enumerate_exact(0, degree, current, out);
  return out;
}

std::vector<Monomial> monomial_basis(std::size_t nvars, int degree) {
  if (nvars == 0) throw std::invalid_argument("monomial_basis: nvars must be >= 1");
  if (degree < 0) throw std::invalid_argument("monomial_basis: degree must be >= 0");
  std::vector<Monomial> out;
  for (int d = 0; d <= degree; ++d) {
    auto layer = homogeneous_monomials(nvars, d);
    out.insert(out.end(), layer.begin(), layer.end());
  }
  return out;
}

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

Polynomial GramMatrix::to_polynomial() const {
  const std::size_t n = basis.empty() ? 0 : basis.front().nvars();
  Polynomial p(n);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (std::size_t j = 0; j < basis.size(); ++j) {
      p.add_term(basis[i] * basis[j],
                 entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
  }
  return p;
}

GramMatrix to_gram(const Polynomial& p, int half_degree) {
  if (p.degree() > 2 * half_degree) {
    throw std::invalid_argument("to_gram: degree " + std::to_string(p.degree()) +
                                " exceeds 2*" + std::to_string(half_degree));
  }
  const std::size_t n = std::max<std::size_t>(p.nvars(), 1);
  GramMatrix g;
  g.basis = monomial_basis(n, half_degree);
  const auto size = static_cast<Eigen::Index>(g.basis.size());
  g.entries = Eigen::MatrixXd::Zero(size, size);

  for (const auto& [term, c] : p.terms()) {
    Eigen::Index best_i = -1;
    Eigen::Index best_j = -1;
    int best_gap = 0;
    // Basis is graded-lex sorted, so the first qualifying i wins ties.
    for (Eigen::Index i = 0; i < size; ++i) {
      const Monomial& a = g.basis[static_cast<std::size_t>(i)];
      if (!a.divides(term)) continue;
      const Monomial b = term / a;
      if (b.degree() > half_degree || GradedLexLess{}(b, a)) continue;
      const auto it = std::lower_bound(g.basis.begin(), g.basis.end(), b, GradedLexLess{});
      const Eigen::Index j = it - g.basis.begin();
      const int gap = std::abs(a.degree() - b.degree());
      if (best_i < 0 || gap < best_gap) {
        best_i = i;
        best_j = j;
        best_gap = gap;
      }
    }
    if (best_i == best_j) {
      g.entries(best_i, best_i) += c;
    } else {
      g.entries(best_i, best_j) += c / 2.0;
      g.entries(best_j, best_i) += c / 2.0;
    }
  }
  return g;
}

std::string to_string(const Monomial& m, const std::vector<std::string>& names) {
  if (m.is_constant()) return "1";
  std::ostringstream os;
  bool first = true;
  for (std::size_t i = 0; i < m.nvars(); ++i) {
    if (m[i] == 0) continue;
    if (!first) os << '*';
    first = false;
    os << (i < names.size() ? names[i] : "x" + std::to_string(i + 1));
    if (m[i] > 1) os << '^' << m[i];
  }
  return os.str();
}

}  // namespace clfsyn

namespace clfsyn {

std::string format_polynomial(const Polynomial& p, const std::vector<std::string>& names) {
  if (p.is_zero()) return "0";
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& [m, c] : p.terms()) {
    double mag = c;
    if (first) {
      if (c < 0) {
        os << "-";
        mag = -c;
      }
    } else {
      os << (c < 0 ? " - " : " + ");
      mag = std::abs(c);
    }
    first = false;
    if (m.is_constant()) {
      os << mag;
    } else if (mag == 1.0) {
      os << to_string(m, names);
    } else {
      os << mag << "*" << to_string(m, names);
    }
  }
  return os.str();
}

std::vector<std::string> default_variable_names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("x" + std::to_string(i + 1));
  return out;
}

}  // namespace clfsyn
