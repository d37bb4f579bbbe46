#pragma once

#include <cstdint>
#include <vector>

#include "habs/cnf.hpp"

namespace habs {

enum class SatStatus { satisfiable, unsatisfiable, cap_exceeded };

struct SatOptions {
  /// Conflict budget; 0 means unlimited. Hitting the cap yields
  /// SatStatus::cap_exceeded, never a wrong verdict.
  std::uint64_t max_conflicts = 0;
};

struct SatResult {
  SatStatus status = SatStatus::unsatisfiable;
  /// 1-based truth values (index 0 unused); empty unless satisfiable.
  std::vector<bool> assignment;
  std::uint64_t conflicts = 0;
  std::uint64_t decisions = 0;
  std::uint64_t propagations = 0;
};

/// Complete CDCL search: two-watched-literal propagation, first-UIP clause
/// learning, activity-ordered decisions with phase saving, geometric
/// restarts. Fully deterministic (index tie-breaking, no randomness).
/// Satisfying assignments are re-verified clause by clause before returning.
SatResult sat_solve(const CnfFormula& cnf, const SatOptions& opts = {});

}  // namespace habs
