#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "habs/ts.hpp"

namespace habs {

/// One integrator chain dx_1 = x_2, ..., dx_n = u on the bounded box
/// x_1 in [x1_lo, x1_hi), |x_j| <= orthant_bound for j >= 2.
struct BnfChain {
  std::uint32_t n = 1;
  double epsilon = 1.0;
  double x1_lo = 0.0;
  double x1_hi = 1.0;
  double orthant_bound = 1.0;
};

void validate_bnf(const BnfChain& chain);
std::uint32_t bnf_slice_count(const BnfChain& chain);

/// x1-slice index plus the sign orthant of x_2..x_n (+1/-1 entries; sign(0)
/// counts as +). Empty sign vector when n = 1.
struct SliceState {
  std::uint32_t i = 0;
  std::vector<int> s;
};

/// Partition map: throws std::invalid_argument when x lies outside the box.
SliceState bnf_slice_partition(const BnfChain& chain, const std::vector<double>& x);

/// "y<i>" for n = 1, otherwise "y<i>_" followed by one '+'/'-' per sign.
std::string bnf_state_name(const SliceState& state);

/// Finite quotient of the chain over the slice/orthant partition. Edges join
/// face-adjacent states only: slice moves follow the sign of x_2, a sign flip
/// of x_j needs the next chain coordinate (or u, for x_n) pointing at the
/// target sign, and every state carries a self-loop. Identity outputs.
TransitionSystem bnf_quotient(const BnfChain& chain);

/// Geometric centers per state, in bnf_quotient's state order.
std::vector<std::vector<double>> bnf_state_centers(const BnfChain& chain);

/// Finite output alphabet with memory depth for difference-flat systems.
struct FlatAlphabetSpec {
  std::vector<std::string> symbols;
  std::uint32_t memory = 1;
};

void validate_flat_alphabet(const FlatAlphabetSpec& spec);

/// Window quotient: states are all memory-length words over the alphabet
/// (named with '.' separators), the output is the word's first symbol, and
/// each word shifts to (tail, y) for every symbol y. Throws BudgetError when
/// |symbols|^memory exceeds the budget.
TransitionSystem difference_flat_quotient(const FlatAlphabetSpec& spec,
                                          std::uint64_t window_budget = 1000000);

}  // namespace habs
