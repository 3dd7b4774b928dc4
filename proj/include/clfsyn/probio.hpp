#pragma once

#include <string>
#include <vector>

#include "clfsyn/dynamics.hpp"
#include "clfsyn/errors.hpp"
#include "clfsyn/polynomial.hpp"

namespace clfsyn {

/// Syntax error in a polynomial expression; `column` is 1-based.
class ExprError : public ProblemError {
 public:
  ExprError(const std::string& msg, std::size_t column)
      : ProblemError("column " + std::to_string(column) + ": " + msg), column_(column) {}
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

/// expr := term (('+'|'-') term)*; term := factor ('*' factor)*;
/// factor := ['-'] base ('^' uint)?; base := number | ident | '(' expr ')'.
Polynomial parse_poly(const std::string& src, const std::vector<std::string>& vars);

inline constexpr const char* kSchemaVersion = "1";

/// Parses and validates a problem document. Errors name the offending JSON
/// pointer (or line/column for malformed JSON).
ProblemInstance problem_from_json(const std::string& text);
ProblemInstance load_problem(const std::string& path);

std::string problem_to_json(const ProblemInstance& problem);
void save_problem(const ProblemInstance& problem, const std::string& path);

/// A CLF given as an expression, or a path to a JSON file holding either
/// "coefficients" (over the basis) or "clf" (an expression).
Polynomial load_clf(const std::string& spec, const ProblemInstance& problem);

/// Comma-separated reals.
std::vector<double> parse_csv_vector(const std::string& s);

}  // namespace clfsyn
