#include "habs/hds.hpp"

#include <set>
#include <stdexcept>

namespace habs {

void validate_hybrid(const HybridModel& model) {
  const auto Q = model.modes.size();
  const auto K = model.labels.size();
  if (Q == 0) throw std::invalid_argument("hybrid model needs at least one mode");
  if (K == 0) throw std::invalid_argument("hybrid model needs at least one guard label");
  {
    std::set<std::string> seen;
    for (const auto& l : model.labels)
      if (l.empty() || !seen.insert(l).second)
        throw std::invalid_argument("guard labels must be unique and non-empty");
    seen.clear();
    for (const auto& m : model.modes)
      if (m.name.empty() || !seen.insert(m.name).second)
        throw std::invalid_argument("mode names must be unique and non-empty");
  }
  if (model.h.size() != Q) throw std::invalid_argument("h must cover every mode");
  for (const auto& row : model.h) {
    if (row.size() != K) throw std::invalid_argument("h must cover every guard label");
    for (auto q : row)
      if (q >= Q) throw std::invalid_argument("h target mode out of range");
  }
  for (const auto& m : model.modes) {
    if (m.guard_of.size() != m.abstraction.num_states())
      throw std::invalid_argument("guard map must cover every abstract state of mode " + m.name);
    for (auto k : m.guard_of)
      if (k >= K) throw std::invalid_argument("guard label index out of range in mode " + m.name);
  }
  for (const auto& [pair, table] : model.rehome) {
    if (pair.first >= Q || pair.second >= Q)
      throw std::invalid_argument("rehome entry references unknown mode");
    for (const auto& [from, to] : table) {
      model.modes[pair.first].abstraction.state_index(from);
      model.modes[pair.second].abstraction.state_index(to);
    }
  }
}

TransitionSystem discrete_transition_system(const HybridModel& model) {
  validate_hybrid(model);
  std::vector<std::string> names;
  for (const auto& m : model.modes) names.push_back(m.name);
  std::vector<Edge> edges;
  for (std::uint32_t q = 0; q < model.modes.size(); ++q)
    for (auto q2 : model.h[q]) edges.push_back({q, q2});
  std::vector<std::string> outputs = names;
  return TransitionSystem(std::move(names), std::move(outputs), std::move(edges));
}

std::string composed_output(const std::string& mode, const std::string& label) {
  return mode + "," + label;
}

ComposedAbstraction compose_abstraction(const HybridModel& model) {
  validate_hybrid(model);
  const auto Q = static_cast<std::uint32_t>(model.modes.size());

  std::vector<std::uint32_t> offset(Q + 1, 0);
  for (std::uint32_t q = 0; q < Q; ++q)
    offset[q + 1] = offset[q] + model.modes[q].abstraction.num_states();

  std::vector<ComposedState> origin;
  std::vector<std::string> names, outputs;
  names.reserve(offset[Q]);
  outputs.reserve(offset[Q]);
  for (std::uint32_t q = 0; q < Q; ++q) {
    const auto& mp = model.modes[q];
    for (StateId y = 0; y < mp.abstraction.num_states(); ++y) {
      names.push_back(mp.name + "." + mp.abstraction.state_name(y));
      outputs.push_back(composed_output(mp.name, model.labels[mp.guard_of[y]]));
      origin.push_back({q, y});
    }
  }

  // Resolves the continuous state carried across a switch q -> q2.
  auto rehome_target = [&](std::uint32_t q, std::uint32_t q2, StateId y) -> StateId {
    const auto& name = model.modes[q].abstraction.state_name(y);
    auto it = model.rehome.find({q, q2});
    if (it != model.rehome.end()) {
      auto entry = it->second.find(name);
      if (entry != it->second.end())
        return model.modes[q2].abstraction.state_index(entry->second);
    }
    try {
      return model.modes[q2].abstraction.state_index(name);
    } catch (const std::out_of_range&) {
      throw std::invalid_argument("incompatible continuous partitions: state " + name +
                                  " of mode " + model.modes[q].name + " has no home in mode " +
                                  model.modes[q2].name);
    }
  };

  std::vector<Edge> edges;
  for (std::uint32_t q = 0; q < Q; ++q) {
    const auto& mp = model.modes[q];
    for (StateId y = 0; y < mp.abstraction.num_states(); ++y) {
      const auto from = static_cast<StateId>(offset[q] + y);
      const auto k = mp.guard_of[y];
      const auto q2 = model.h[q][k];
      const bool switching = q2 != q;
      if (switching)
        edges.push_back({from, static_cast<StateId>(offset[q2] + rehome_target(q, q2, y))});
      if (!switching || !model.urgent_switching)
        for (auto y2 : mp.abstraction.successors(y))
          edges.push_back({from, static_cast<StateId>(offset[q] + y2)});
    }
  }

  return {TransitionSystem(std::move(names), std::move(outputs), std::move(edges)),
          std::move(origin)};
}

}  // namespace habs
