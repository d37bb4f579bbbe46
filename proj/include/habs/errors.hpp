#pragma once

#include <stdexcept>
#include <string>

namespace habs {

// Thrown when a construction would exceed its configured state/cell budget.
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Positioned syntax or validation error (1-based line and column).
struct ParseError : std::runtime_error {
  int line;
  int column;
  ParseError(int line_, int column_, const std::string& message)
      : std::runtime_error("parse error at " + std::to_string(line_) + ":" +
                           std::to_string(column_) + ": " + message),
        line(line_),
        column(column_) {}
};

// A flat-output inversion hit a near-zero denominator or an infeasible
// residual; `equation` names the offending model equation.
struct SingularityError : std::runtime_error {
  std::string equation;
  SingularityError(std::string equation_, const std::string& message)
      : std::runtime_error("singular inversion in " + equation_ + ": " + message),
        equation(std::move(equation_)) {}
};

}  // namespace habs
