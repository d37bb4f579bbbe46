#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "habs/ts.hpp"

namespace habs {

/// One supervisor mode together with the finite abstraction of its continuous
/// plant and the guard label assigned to each abstract state.
struct ModePlant {
  std::string name;
  TransitionSystem abstraction;
  std::vector<std::uint32_t> guard_of;  // abstract state -> index into labels
};

/// Supervisor h over modes x guard labels, plus per-mode abstracted plants.
/// Guard labels are constant per abstract state by construction, and switches
/// carry the continuous abstract state over unchanged: the target state is
/// matched by name in the target mode unless a rehome table overrides it.
struct HybridModel {
  std::vector<std::string> labels;
  std::vector<ModePlant> modes;
  std::vector<std::vector<std::uint32_t>> h;  // h[mode][label] -> mode
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::map<std::string, std::string>> rehome;
  // Urgent: a state whose label triggers a switch keeps only the switch edge.
  // Non-urgent additionally keeps its continuous edges.
  bool urgent_switching = true;
};

void validate_hybrid(const HybridModel& model);

/// Supervisor graph alone: states are modes with identity outputs and an
/// edge q -> q' whenever some label maps q to q'.
TransitionSystem discrete_transition_system(const HybridModel& model);

struct ComposedState {
  std::uint32_t mode = 0;
  StateId plant_state = 0;
};

struct ComposedAbstraction {
  TransitionSystem ts;
  std::vector<ComposedState> origin;  // composed state id -> source pair
};

/// Output label "<mode>,<guard label>" of a composed state.
std::string composed_output(const std::string& mode, const std::string& label);

/// Product of the supervisor with the per-mode plant abstractions. States are
/// (mode, plant state) pairs named "<mode>.<plant state>"; outputs are the
/// (mode, guard label) pairs the temporal layer predicates on. The guard is
/// read on the pre-switch state. Throws std::invalid_argument when a switch
/// target state cannot be resolved in the destination mode.
ComposedAbstraction compose_abstraction(const HybridModel& model);

}  // namespace habs
