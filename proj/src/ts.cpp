#include "habs/ts.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace habs {

TransitionSystem::TransitionSystem(std::vector<std::string> state_names,
                                   std::vector<std::string> state_outputs,
                                   std::vector<Edge> edges)
    : names_(std::move(state_names)), edges_(std::move(edges)) {
  if (names_.empty()) throw std::invalid_argument("transition system needs at least one state");
  if (state_outputs.size() != names_.size())
    throw std::invalid_argument("output map must cover every state");
  {
    std::set<std::string> seen;
    for (const auto& n : names_)
      if (!seen.insert(n).second)
        throw std::invalid_argument("duplicate state name: " + n);
  }

  output_labels_.assign(state_outputs.begin(), state_outputs.end());
  std::sort(output_labels_.begin(), output_labels_.end());
  output_labels_.erase(std::unique(output_labels_.begin(), output_labels_.end()),
                       output_labels_.end());
  output_of_.resize(names_.size());
  for (std::size_t i = 0; i < names_.size(); ++i) {
    auto it = std::lower_bound(output_labels_.begin(), output_labels_.end(), state_outputs[i]);
    output_of_[i] = static_cast<std::uint32_t>(it - output_labels_.begin());
  }

  const auto n = num_states();
  for (const auto& e : edges_)
    if (e.from >= n || e.to >= n)
      throw std::invalid_argument("edge endpoint outside state set");
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

  succ_offsets_.assign(n + 1, 0);
  for (const auto& e : edges_) ++succ_offsets_[e.from + 1];
  for (std::size_t i = 1; i <= n; ++i) succ_offsets_[i] += succ_offsets_[i - 1];
  succ_.reserve(edges_.size());
  for (const auto& e : edges_) succ_.push_back(e.to);
}

std::span<const StateId> TransitionSystem::successors(StateId s) const {
  const auto begin = succ_offsets_[s], end = succ_offsets_[s + 1];
  // edges_ is sorted by (from, to), so each state's targets form a sorted,
  // contiguous run of succ_.
  return {succ_.data() + begin, end - begin};
}

bool TransitionSystem::has_edge(StateId from, StateId to) const {
  auto succ = successors(from);
  return std::binary_search(succ.begin(), succ.end(), to);
}

StateId TransitionSystem::state_index(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return static_cast<StateId>(i);
  throw std::out_of_range("no state named " + name);
}

void validate_partition(const TransitionSystem& ts, const StatePartition& part) {
  if (part.block_of.size() != ts.num_states())
    throw std::invalid_argument("partition must assign a block to every state");
  if (part.block_count == 0) throw std::invalid_argument("partition needs at least one block");
  std::vector<bool> seen(part.block_count, false);
  for (auto b : part.block_of) {
    if (b >= part.block_count) throw std::invalid_argument("block id out of range");
    seen[b] = true;
  }
  for (std::uint32_t b = 0; b < part.block_count; ++b)
    if (!seen[b]) throw std::invalid_argument("empty block " + std::to_string(b));
}

namespace {

// Shared by quotient and check_quotient_condition: validates, checks output
// agreement within blocks, and collects the induced block edge set.
std::vector<Edge> induced_block_edges(const TransitionSystem& ts, const StatePartition& part) {
  validate_partition(ts, part);
  std::vector<std::uint32_t> block_output(part.block_count, UINT32_MAX);
  for (StateId s = 0; s < ts.num_states(); ++s) {
    auto b = part.block_of[s];
    if (block_output[b] == UINT32_MAX) {
      block_output[b] = ts.output_index(s);
    } else if (block_output[b] != ts.output_index(s)) {
      throw std::invalid_argument("partition merges states with different outputs");
    }
  }
  std::vector<Edge> block_edges;
  block_edges.reserve(ts.num_edges());
  for (const auto& e : ts.edges())
    block_edges.push_back({part.block_of[e.from], part.block_of[e.to]});
  std::sort(block_edges.begin(), block_edges.end());
  block_edges.erase(std::unique(block_edges.begin(), block_edges.end()), block_edges.end());
  return block_edges;
}

}  // namespace

TransitionSystem quotient(const TransitionSystem& ts, const StatePartition& part) {
  auto block_edges = induced_block_edges(ts, part);
  std::vector<std::string> names(part.block_count);
  std::vector<std::string> outputs(part.block_count);
  for (StateId s = ts.num_states(); s-- > 0;) {
    auto b = part.block_of[s];
    names[b] = ts.state_name(s);  // lowest-id member wins (reverse iteration)
    outputs[b] = ts.output(s);
  }
  return TransitionSystem(std::move(names), std::move(outputs), std::move(block_edges));
}

bool check_quotient_condition(const TransitionSystem& ts, const StatePartition& part) {
  auto block_edges = induced_block_edges(ts, part);
  // For every block edge b -> b', every member of b must have a successor
  // in b'; equivalently the quotient map is a bisimulation.
  std::vector<std::vector<StateId>> members(part.block_count);
  for (StateId s = 0; s < ts.num_states(); ++s) members[part.block_of[s]].push_back(s);
  for (const auto& be : block_edges) {
    for (auto s : members[be.from]) {
      bool found = false;
      for (auto t : ts.successors(s))
        if (part.block_of[t] == be.to) {
          found = true;
          break;
        }
      if (!found) return false;
    }
  }
  return true;
}

StatePartition coarsest_bisimulation(const TransitionSystem& ts) {
  const auto n = ts.num_states();
  // Start from the output partition and repeatedly split on the set of
  // successor blocks until stable. This is the classic O(n * m * iterations)
  // signature refinement; fine for the sizes this library targets.
  std::vector<std::uint32_t> block(n);
  for (StateId s = 0; s < n; ++s) block[s] = ts.output_index(s);
  std::uint32_t count = static_cast<std::uint32_t>(ts.output_labels().size());

  for (;;) {
    std::map<std::pair<std::uint32_t, std::vector<std::uint32_t>>, std::uint32_t> sig_ids;
    std::vector<std::uint32_t> next(n);
    std::uint32_t next_count = 0;
    for (StateId s = 0; s < n; ++s) {
      std::vector<std::uint32_t> succ_blocks;
      for (auto t : ts.successors(s)) succ_blocks.push_back(block[t]);
      std::sort(succ_blocks.begin(), succ_blocks.end());
      succ_blocks.erase(std::unique(succ_blocks.begin(), succ_blocks.end()), succ_blocks.end());
      auto key = std::make_pair(block[s], std::move(succ_blocks));
      auto [it, inserted] = sig_ids.try_emplace(std::move(key), next_count);
      if (inserted) ++next_count;
      next[s] = it->second;
    }
    if (next_count == count) break;
    block = std::move(next);
    count = next_count;
  }

  // Renumber blocks by first occurrence so the result is stable under
  // signature-id permutations.
  std::vector<std::uint32_t> renum(count, UINT32_MAX);
  std::uint32_t fresh = 0;
  StatePartition part;
  part.block_of.resize(n);
  for (StateId s = 0; s < n; ++s) {
    if (renum[block[s]] == UINT32_MAX) renum[block[s]] = fresh++;
    part.block_of[s] = renum[block[s]];
  }
  part.block_count = fresh;
  return part;
}

bool check_bisimulation(const TransitionSystem& ts1, const TransitionSystem& ts2,
                        const BinaryRelation& rel) {
  for (const auto& [a, b] : rel.pairs) {
    if (a >= ts1.num_states() || b >= ts2.num_states())
      throw std::invalid_argument("relation pair out of range");
  }
  // Totality over ts1: without initial states every state is in play.
  std::vector<bool> covered(ts1.num_states(), false);
  for (const auto& [a, b] : rel.pairs) covered[a] = true;
  if (!std::all_of(covered.begin(), covered.end(), [](bool c) { return c; })) return false;

  std::set<std::pair<StateId, StateId>> in_rel(rel.pairs.begin(), rel.pairs.end());
  for (const auto& [a, b] : in_rel) {
    if (ts1.output(a) != ts2.output(b)) return false;
    // Forward simulation: every move of a is matched by some move of b.
    for (auto a2 : ts1.successors(a)) {
      bool matched = false;
      for (auto b2 : ts2.successors(b))
        if (in_rel.count({a2, b2})) {
          matched = true;
          break;
        }
      if (!matched) return false;
    }
    // Backward: every move of b is matched by some move of a.
    for (auto b2 : ts2.successors(b)) {
      bool matched = false;
      for (auto a2 : ts1.successors(a))
        if (in_rel.count({a2, b2})) {
          matched = true;
          break;
        }
      if (!matched) return false;
    }
  }
  return true;
}

BinaryRelation partition_graph(const StatePartition& part) {
  BinaryRelation rel;
  rel.pairs.reserve(part.block_of.size());
  for (StateId s = 0; s < part.block_of.size(); ++s)
    rel.pairs.emplace_back(s, part.block_of[s]);
  return rel;
}

namespace {

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::string to_dot(const TransitionSystem& ts) {
  std::ostringstream os;
  os << "digraph ts {\n";
  for (StateId s = 0; s < ts.num_states(); ++s) {
    os << "  n" << s << " [label=\"" << dot_escape(ts.state_name(s)) << "\\n"
       << dot_escape(ts.output(s)) << "\"];\n";
  }
  for (const auto& e : ts.edges()) os << "  n" << e.from << " -> n" << e.to << ";\n";
  os << "}\n";
  return os.str();
}

}  // namespace habs
