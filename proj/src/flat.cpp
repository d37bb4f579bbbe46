#include "habs/flat.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "habs/errors.hpp"

namespace habs {

void validate_bnf(const BnfChain& chain) {
  if (chain.n < 1) throw std::invalid_argument("chain length must be at least 1");
  if (chain.n > 20) throw std::invalid_argument("chain length above 20 not supported");
  if (!(chain.epsilon > 0) || !std::isfinite(chain.epsilon))
    throw std::invalid_argument("epsilon must be positive");
  if (!std::isfinite(chain.x1_lo) || !std::isfinite(chain.x1_hi) || !(chain.x1_lo < chain.x1_hi))
    throw std::invalid_argument("x1 range must be a non-empty interval");
  if (!(chain.orthant_bound > 0) || !std::isfinite(chain.orthant_bound))
    throw std::invalid_argument("orthant bound must be positive");
  double ratio = (chain.x1_hi - chain.x1_lo) / chain.epsilon;
  double rounded = std::round(ratio);
  if (rounded < 1 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, std::abs(ratio)))
    throw std::invalid_argument("x1 range is not exactly tiled by epsilon");
  if (rounded > 1e6) throw std::invalid_argument("slice count too large");
}

std::uint32_t bnf_slice_count(const BnfChain& chain) {
  validate_bnf(chain);
  return static_cast<std::uint32_t>(std::round((chain.x1_hi - chain.x1_lo) / chain.epsilon));
}

SliceState bnf_slice_partition(const BnfChain& chain, const std::vector<double>& x) {
  const auto slices = bnf_slice_count(chain);
  if (x.size() != chain.n) throw std::invalid_argument("state dimension mismatch");
  if (!(x[0] >= chain.x1_lo) || !(x[0] < chain.x1_hi))
    throw std::invalid_argument("x1 outside the chain box");
  SliceState st;
  st.i = static_cast<std::uint32_t>(std::floor((x[0] - chain.x1_lo) / chain.epsilon));
  if (st.i >= slices) st.i = slices - 1;  // guards floor landing on the open end
  st.s.reserve(chain.n - 1);
  for (std::uint32_t j = 1; j < chain.n; ++j) {
    if (std::abs(x[j]) > chain.orthant_bound)
      throw std::invalid_argument("x" + std::to_string(j + 1) + " outside the chain box");
    st.s.push_back(x[j] >= 0 ? 1 : -1);
  }
  return st;
}

std::string bnf_state_name(const SliceState& state) {
  std::string name = "y" + std::to_string(state.i);
  if (state.s.empty()) return name;
  name += '_';
  for (int sg : state.s) name += sg > 0 ? '+' : '-';
  return name;
}

namespace {

// Orthant enumeration order shared by the quotient and the center table:
// pattern bit t (earlier signs most significant) set means '-'.
std::vector<int> orthant_signs(std::uint32_t pattern, std::uint32_t count) {
  std::vector<int> s(count);
  for (std::uint32_t t = 0; t < count; ++t)
    s[t] = (pattern >> (count - 1 - t) & 1) ? -1 : 1;
  return s;
}

}  // namespace

TransitionSystem bnf_quotient(const BnfChain& chain) {
  const auto slices = bnf_slice_count(chain);
  const std::uint32_t signs = chain.n - 1;
  const std::uint32_t orthants = 1u << signs;

  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(slices) * orthants);
  for (std::uint32_t i = 0; i < slices; ++i)
    for (std::uint32_t p = 0; p < orthants; ++p)
      names.push_back(bnf_state_name({i, orthant_signs(p, signs)}));

  auto id_of = [&](std::uint32_t i, std::uint32_t p) -> StateId {
    return static_cast<StateId>(i * orthants + p);
  };

  std::vector<Edge> edges;
  for (std::uint32_t i = 0; i < slices; ++i) {
    for (std::uint32_t p = 0; p < orthants; ++p) {
      const auto from = id_of(i, p);
      auto s = orthant_signs(p, signs);
      edges.push_back({from, from});

      if (chain.n == 1) {
        // u drives x_1 directly: both neighbors reachable.
        if (i + 1 < slices) edges.push_back({from, id_of(i + 1, p)});
        if (i > 0) edges.push_back({from, id_of(i - 1, p)});
        continue;
      }

      // Slice moves follow dx_1/dt = x_2, whose sign is s[0] on the orthant.
      if (s[0] > 0 && i + 1 < slices) edges.push_back({from, id_of(i + 1, p)});
      if (s[0] < 0 && i > 0) edges.push_back({from, id_of(i - 1, p)});

      // A flip of sign t crosses x_{t+2} = 0; the crossing needs the driving
      // coordinate (x_{t+3}, or u when t is the last sign) to point at the
      // target sign.
      for (std::uint32_t t = 0; t < signs; ++t) {
        const int target = -s[t];
        if (t + 1 < signs && s[t + 1] != target) continue;
        const std::uint32_t q = p ^ (1u << (signs - 1 - t));
        edges.push_back({from, id_of(i, q)});
      }
    }
  }

  std::vector<std::string> outputs = names;
  return TransitionSystem(std::move(names), std::move(outputs), std::move(edges));
}

std::vector<std::vector<double>> bnf_state_centers(const BnfChain& chain) {
  const auto slices = bnf_slice_count(chain);
  const std::uint32_t signs = chain.n - 1;
  const std::uint32_t orthants = 1u << signs;
  std::vector<std::vector<double>> centers;
  centers.reserve(static_cast<std::size_t>(slices) * orthants);
  for (std::uint32_t i = 0; i < slices; ++i)
    for (std::uint32_t p = 0; p < orthants; ++p) {
      std::vector<double> c(chain.n);
      c[0] = chain.x1_lo + (i + 0.5) * chain.epsilon;
      auto s = orthant_signs(p, signs);
      for (std::uint32_t t = 0; t < signs; ++t) c[t + 1] = s[t] * chain.orthant_bound / 2.0;
      centers.push_back(std::move(c));
    }
  return centers;
}

void validate_flat_alphabet(const FlatAlphabetSpec& spec) {
  if (spec.symbols.empty()) throw std::invalid_argument("alphabet must be non-empty");
  if (spec.memory < 1) throw std::invalid_argument("memory must be at least 1");
  std::set<std::string> seen;
  for (const auto& sym : spec.symbols) {
    if (sym.empty()) throw std::invalid_argument("empty symbol");
    if (!seen.insert(sym).second) throw std::invalid_argument("duplicate symbol: " + sym);
  }
}

TransitionSystem difference_flat_quotient(const FlatAlphabetSpec& spec,
                                          std::uint64_t window_budget) {
  validate_flat_alphabet(spec);
  const std::uint64_t base = spec.symbols.size();
  std::uint64_t total = 1;
  for (std::uint32_t t = 0; t < spec.memory; ++t) {
    if (total > window_budget / base) {
      total = window_budget + 1;
      break;
    }
    total *= base;
  }
  if (total > window_budget)
    throw BudgetError("window count exceeds budget of " + std::to_string(window_budget));

  // Words enumerated lexicographically, first position most significant.
  std::vector<std::string> names, outputs;
  names.reserve(total);
  outputs.reserve(total);
  std::vector<std::uint32_t> word(spec.memory, 0);
  for (std::uint64_t id = 0; id < total; ++id) {
    std::string name;
    for (std::uint32_t t = 0; t < spec.memory; ++t) {
      if (t) name += '.';
      name += spec.symbols[word[t]];
    }
    names.push_back(std::move(name));
    outputs.push_back(spec.symbols[word[0]]);
    for (std::uint32_t t = spec.memory; t-- > 0;) {
      if (++word[t] < base) break;
      word[t] = 0;
    }
  }

  // Shift rule: id encodes the word base-|Y|; dropping the first symbol and
  // appending y gives (id mod base^(memory-1)) * base + y.
  const std::uint64_t tail_mod = total / base;
  std::vector<Edge> edges;
  edges.reserve(total * base);
  for (std::uint64_t id = 0; id < total; ++id)
    for (std::uint64_t y = 0; y < base; ++y)
      edges.push_back({static_cast<StateId>(id), static_cast<StateId>(id % tail_mod * base + y)});

  return TransitionSystem(std::move(names), std::move(outputs), std::move(edges));
}

}  // namespace habs
