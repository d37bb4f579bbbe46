#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "habs/cnf.hpp"
#include "habs/ltl.hpp"
#include "habs/ts.hpp"

namespace habs {

/// CNF encoding of "some length-`bound` path of the system, loop-free or a
/// lasso closing anywhere in the window, violates `phi`".
///
/// Variable layout (1-based, stable):
///   1                      constant true
///   2 + i*S + q            state one-hot: step i in [0,k], state q, S states
///   2 + (k+1)*S + j        loop selector: the step after k is step j
///   above that             formula gates (Tseitin, allocated in translation
///                          order, structurally hashed)
struct BmcEncoding {
  CnfFormula cnf;
  std::uint32_t num_states = 0;
  std::uint32_t bound = 0;
  LtlPtr phi;         ///< the property being checked (not negated)
  Alphabet alphabet;  ///< (mode,label) universe the atoms index into

  int state_var(std::uint32_t step, StateId q) const {
    return 2 + static_cast<int>(step * num_states + q);
  }
  int loop_var(std::uint32_t j) const {
    return 2 + static_cast<int>((bound + 1) * num_states + j);
  }
};

/// Builds the violation encoding for `phi` over `ts`. Every output label of
/// `ts` must name a "mode,label" pair of `alphabet` (the atoms' universe).
/// With a non-empty `initial_states`, paths must start in that set; empty
/// leaves step 0 unconstrained. Satisfiable iff a bounded counterexample
/// exists: loop-free paths are judged by pessimistic bounded semantics,
/// lassos by exact infinite-word semantics.
BmcEncoding encode_bmc(const TransitionSystem& ts, const LtlPtr& phi, const Alphabet& alphabet,
                       std::uint32_t bound, const std::vector<StateId>& initial_states = {});

/// Reads the one-hot state block out of a satisfying assignment; throws
/// std::logic_error if any step is not exactly-one (an encoder bug).
std::vector<StateId> decode_state_path(const BmcEncoding& enc, const std::vector<bool>& assignment);

/// Reads the loop selector block; std::nullopt when no selector is set.
std::optional<std::uint32_t> decode_loop_back(const BmcEncoding& enc,
                                              const std::vector<bool>& assignment);

/// Full witness extraction: state path + loop point, replayed against the
/// transition relation and re-checked to violate `enc.phi` under
/// `eval_trace`. Any discrepancy throws std::logic_error (fails loudly).
Trace decode_witness(const BmcEncoding& enc, const std::vector<bool>& assignment,
                     const TransitionSystem& ts);

}  // namespace habs
