#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace clfsyn {

/// Exponent vector over a fixed ambient dimension. Entry i is the power of
/// variable i; the dense layout keeps zero powers implicit in the sense that
/// they contribute nothing to degree or evaluation.
class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(std::size_t nvars) : exps_(nvars, 0) {}
  explicit Monomial(std::vector<int> exps);

  static Monomial constant(std::size_t nvars) { return Monomial(nvars); }
  static Monomial variable(std::size_t nvars, std::size_t index);

  std::size_t nvars() const { return exps_.size(); }
  int operator[](std::size_t i) const { return exps_[i]; }
  int degree() const;
  bool is_constant() const { return degree() == 0; }
  const std::vector<int>& exponents() const { return exps_; }

  Monomial operator*(const Monomial& other) const;
  /// Exponent-wise difference; valid only when `divides(other)`.
  Monomial operator/(const Monomial& other) const;
  bool divides(const Monomial& other) const;

  double eval(const Eigen::VectorXd& x) const;

  bool operator==(const Monomial& other) const { return exps_ == other.exps_; }
  bool operator!=(const Monomial& other) const { return exps_ != other.exps_; }

 private:
  std::vector<int> exps_;
};

/// Graded-lexicographic order: lower total degree first, then the monomial
/// with the larger power of the earliest variable first (1 < x1 < x2 < x1^2).
struct GradedLexLess {
  bool operator()(const Monomial& a, const Monomial& b) const;
};

/// Sparse multivariate polynomial with double coefficients. Exact zeros are
/// never stored.
class Polynomial {
 public:
  using TermMap = std::map<Monomial, double, GradedLexLess>;

  Polynomial() = default;
  explicit Polynomial(std::size_t nvars) : nvars_(nvars) {}

  static Polynomial constant(std::size_t nvars, double value);
  static Polynomial variable(std::size_t nvars, std::size_t index);
  static Polynomial monomial(const Monomial& m, double coeff = 1.0);

  std::size_t nvars() const { return nvars_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;
  double coeff(const Monomial& m) const;
  /// Adds `c` to the coefficient of `m`, dropping the term if it cancels.
  void add_term(const Monomial& m, double c);

  double eval(const Eigen::VectorXd& x) const;

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(double s) const;
  Polynomial operator-() const { return *this * -1.0; }
  Polynomial& operator+=(const Polynomial& o);
  Polynomial pow(int k) const;

  Polynomial derivative(std::size_t var) const;
  /// Substitutes x_i -> scale[i] * x_i.
  Polynomial scale_variables(const Eigen::VectorXd& scale) const;
  /// Largest absolute coefficient (0 for the zero polynomial).
  double max_abs_coeff() const;

  bool operator==(const Polynomial& o) const {
    return nvars_ == o.nvars_ && terms_ == o.terms_;
  }

 private:
  void check_same_dim(const Polynomial& o) const;

  std::size_t nvars_ = 0;
  TermMap terms_;
};

inline Polynomial operator*(double s, const Polynomial& p) { return p * s; }

std::vector<Polynomial> grad(const Polynomial& p);

/// Dot product of two equally sized polynomial vectors.
Polynomial dot(const std::vector<Polynomial>& a, const std::vector<Polynomial>& b);

/// All monomials of total degree <= `degree` in graded-lex order.
std::vector<Monomial> monomial_basis(std::size_t nvars, int degree);

/// Monomials of total degree exactly `degree`, graded-lex order.
std::vector<Monomial> homogeneous_monomials(std::size_t nvars, int degree);

std::size_t binomial(std::size_t n, std::size_t k);

/// Symmetric matrix P with p(x) = m(x)^T P m(x) for the monomial vector m.
struct GramMatrix {
  std::vector<Monomial> basis;
  Eigen::MatrixXd entries;

  /// Sums entries over index pairs with equal product monomial.
  Polynomial to_polynomial() const;
};

/// Canonical Gram encoding. Each coefficient sits on the single pair (a, b),
/// a <= b in graded-lex order, a*b = term, minimising |deg a - deg b| with
/// ties going to the earliest a. Off-diagonal pairs share the coefficient
/// evenly between (a, b) and (b, a). Throws if deg p > 2 * half_degree.
GramMatrix to_gram(const Polynomial& p, int half_degree);

std::string to_string(const Monomial& m, const std::vector<std::string>& names);

}  // namespace clfsyn

namespace clfsyn {

/// Renders p in the problem-file expression grammar, e.g. "2*x1^2 - 1.5*x1*x2".
/// Coefficients use round-trip precision so the text reparses to the same terms.
std::string format_polynomial(const Polynomial& p, const std::vector<std::string>& names);

/// Default variable names x1..xn.
std::vector<std::string> default_variable_names(std::size_t n);

}  // namespace clfsyn
