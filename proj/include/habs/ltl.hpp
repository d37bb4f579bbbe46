#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace habs {

/// The atomic-proposition alphabet: (mode, guard label) pairs.
struct Alphabet {
  std::vector<std::string> modes;
  std::vector<std::string> labels;
  int mode_index(const std::string& name) const;   // -1 when absent
  int label_index(const std::string& name) const;  // -1 when absent
};

/// Formula kernel. The parser emits only {tt, ff, atom, negation, disj,
/// next, until}; conjunction and release exist for negation normal form.
enum class LtlOp : std::uint8_t { tt, ff, atom, negation, conj, disj, next, until, release };

struct LtlNode;
using LtlPtr = std::shared_ptr<const LtlNode>;

struct LtlNode {
  LtlOp op;
  std::int32_t mode = -1;   // atom only
  std::int32_t label = -1;  // atom only
  LtlPtr a, b;              // unary operators use a
};

LtlPtr ltl_true();
LtlPtr ltl_false();
LtlPtr ltl_atom(std::int32_t mode, std::int32_t label);
LtlPtr ltl_not(LtlPtr a);
LtlPtr ltl_and(LtlPtr a, LtlPtr b);
LtlPtr ltl_or(LtlPtr a, LtlPtr b);
LtlPtr ltl_next(LtlPtr a);
LtlPtr ltl_until(LtlPtr a, LtlPtr b);
LtlPtr ltl_release(LtlPtr a, LtlPtr b);

/// Grammar: atoms "(MODE,LABEL)" with "*" expanding over all labels;
/// "true"/"false"; unary !, X, F, G (tightest); U (right-associative);
/// then &, then |, then -> (loosest, right-associative); parentheses.
/// F, G, &, -> desugar into the kernel. Throws ParseError with 1-based
/// line/column on syntax errors and unknown mode or label names.
LtlPtr parse_ltl(const std::string& text, const Alphabet& alphabet);

/// Pushes negations to the atoms (introduces conj/release). Idempotent.
LtlPtr to_nnf(const LtlPtr& phi);

std::string ltl_to_string(const LtlPtr& phi, const Alphabet& alphabet);

struct TraceStep {
  std::uint32_t mode = 0;
  std::uint32_t label = 0;
};

/// Finite trace of (mode, label) outputs, optionally a lasso whose last step
/// loops back to index loop_back.
struct Trace {
  std::vector<TraceStep> steps;
  std::optional<std::uint32_t> loop_back;
};

/// Semantics used across the tool: exact infinite-word semantics on lassos
/// (via fixpoint iteration over the loop), pessimistic bounded semantics on
/// loop-free traces (next beyond the end is false, until and release must be
/// fulfilled inside the trace).
bool eval_trace(const LtlPtr& phi, const Trace& trace);

}  // namespace habs
