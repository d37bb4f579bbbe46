#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace habs {

/// Propositional formula in conjunctive normal form. Variables are numbered
/// 1..num_vars and literals are signed variable indices (never zero).
struct CnfFormula {
  int num_vars = 0;
  std::vector<std::vector<int>> clauses;
  /// Human-readable description of what each variable block means; its digest
  /// is stamped onto DIMACS exports so a witness can be traced back to the
  /// encoding that produced it.
  std::string var_map_note;
};

/// Rejects empty clauses, zero literals, and out-of-range variables.
void validate_cnf(const CnfFormula& cnf);

std::uint64_t fnv1a64(std::string_view text);

/// Standard DIMACS CNF ("p cnf <vars> <clauses>", zero-terminated clauses,
/// LF endings) preceded by one comment line carrying the var-map digest.
std::string dimacs_export(const CnfFormula& cnf);

}  // namespace habs
