#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace habs {

using StateId = std::uint32_t;

struct Edge {
  StateId from = 0;
  StateId to = 0;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// A finite labeled transition system: states, a transition relation, and a
/// total output map into a finite label set. Immutable after construction;
/// states are dense ids 0..n-1 and all containers are kept sorted so that
/// iteration order (and thus DOT/JSON output) is deterministic.
///
/// The transition relation may be non-total: deadlock states are allowed and
/// their behavior under LTL is defined by the bounded-trace semantics of the
/// model-checking layer.
class TransitionSystem {
 public:
  /// `state_outputs[i]` is the output label of state i. Throws
  /// std::invalid_argument on empty state set, duplicate state names,
  /// or edges with endpoints outside the state set.
  TransitionSystem(std::vector<std::string> state_names,
                   std::vector<std::string> state_outputs,
                   std::vector<Edge> edges);

  std::uint32_t num_states() const { return static_cast<std::uint32_t>(names_.size()); }
  std::size_t num_edges() const { return edges_.size(); }

  const std::string& state_name(StateId s) const { return names_[s]; }
  const std::vector<std::string>& state_names() const { return names_; }

  /// Output label of a state.
  const std::string& output(StateId s) const { return output_labels_[output_of_[s]]; }
  std::uint32_t output_index(StateId s) const { return output_of_[s]; }
  /// The output label set, sorted and unique.
  const std::vector<std::string>& output_labels() const { return output_labels_; }

  const std::vector<Edge>& edges() const { return edges_; }
  std::span<const StateId> successors(StateId s) const;
  bool has_edge(StateId from, StateId to) const;

  /// Index of a state by name; throws std::out_of_range if absent.
  StateId state_index(const std::string& name) const;

 private:
  std::vector<std::string> names_;
  std::vector<std::string> output_labels_;       // sorted unique
  std::vector<std::uint32_t> output_of_;         // state -> index into output_labels_
  std::vector<Edge> edges_;                      // sorted unique
  std::vector<StateId> succ_;                    // edge targets, CSR layout
  std::vector<std::size_t> succ_offsets_;        // state -> range in succ_
};

/// A partition of a transition system's states into contiguous block ids
/// 0..block_count-1.
struct StatePartition {
  std::vector<std::uint32_t> block_of;  // state -> block id
  std::uint32_t block_count = 0;
};

/// Throws std::invalid_argument unless `part` is total over `ts`, block ids
/// are contiguous and every block is non-empty.
void validate_partition(const TransitionSystem& ts, const StatePartition& part);

/// A relation between the states of two transition systems.
struct BinaryRelation {
  std::vector<std::pair<StateId, StateId>> pairs;
};

/// Quotient transition system induced by an output-respecting partition:
/// one state per block, the block's shared output, and an edge b -> b'
/// iff some member of b has a successor in b'. Block states are named after
/// their lowest-id member. Throws std::invalid_argument if the partition
/// merges states with different outputs.
TransitionSystem quotient(const TransitionSystem& ts, const StatePartition& part);

/// True iff every induced block edge b -> b' is matched by every member of b
/// (each member has a successor in b'), which makes ts and its quotient
/// bisimilar. Same validation as `quotient`.
bool check_quotient_condition(const TransitionSystem& ts, const StatePartition& part);

/// Coarsest output-respecting partition closed under the quotient condition,
/// computed by splitting blocks on successor-block signatures to a fixpoint.
/// Block ids are numbered by first occurrence in state order.
StatePartition coarsest_bisimulation(const TransitionSystem& ts);

/// Checks that `rel` is a bisimulation between ts1 and ts2: outputs agree on
/// every pair and the two systems mutually simulate each other through the
/// relation. Also requires the relation to cover every state of ts1 (the
/// systems carry no initial-state designation, so all states count).
/// Throws std::invalid_argument on out-of-range state ids.
bool check_bisimulation(const TransitionSystem& ts1, const TransitionSystem& ts2,
                        const BinaryRelation& rel);

/// The relation {(s, block_of[s])} pairing each state with its block.
BinaryRelation partition_graph(const StatePartition& part);

/// Deterministic Graphviz export (nodes in state order, edges sorted).
std::string to_dot(const TransitionSystem& ts);

/// JSON export with fields states, transitions, outputs, output_map.
std::string to_json(const TransitionSystem& ts, int indent = 2);

/// Strict JSON import; rejects unknown fields, dangling transition
/// endpoints and partial output maps.
TransitionSystem ts_from_json(const std::string& text);

}  // namespace habs
