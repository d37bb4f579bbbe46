#include <json.hpp>

#include <set>
#include <stdexcept>

#include "habs/ts.hpp"

namespace habs {

using nlohmann::json;

std::string to_json(const TransitionSystem& ts, int indent) {
  json j;
  j["states"] = ts.state_names();
  json trans = json::array();
  for (const auto& e : ts.edges())
    trans.push_back(json::array({ts.state_name(e.from), ts.state_name(e.to)}));
  j["transitions"] = std::move(trans);
  j["outputs"] = ts.output_labels();
  json omap = json::object();
  for (StateId s = 0; s < ts.num_states(); ++s) omap[ts.state_name(s)] = ts.output(s);
  j["output_map"] = std::move(omap);
  return j.dump(indent);
}

TransitionSystem ts_from_json(const std::string& text) {
  json j = json::parse(text);
  if (!j.is_object()) throw std::invalid_argument("transition system JSON must be an object");
  static const std::set<std::string> allowed = {"states", "transitions", "outputs", "output_map"};
  for (auto& [key, _] : j.items())
    if (!allowed.count(key))
      throw std::invalid_argument("unknown field in transition system JSON: " + key);
  for (const auto& key : allowed)
    if (!j.contains(key))
      throw std::invalid_argument("transition system JSON missing field: " + key);

  std::vector<std::string> names = j["states"].get<std::vector<std::string>>();
  std::vector<std::string> outputs = j["outputs"].get<std::vector<std::string>>();
  std::set<std::string> output_set(outputs.begin(), outputs.end());
  if (output_set.size() != outputs.size())
    throw std::invalid_argument("duplicate entries in outputs");

  std::set<std::string> name_set(names.begin(), names.end());
  if (name_set.size() != names.size()) throw std::invalid_argument("duplicate state names");

  auto index_of = [&](const std::string& n) -> StateId {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == n) return static_cast<StateId>(i);
    throw std::invalid_argument("reference to unknown state: " + n);
  };

  const json& omap = j["output_map"];
  if (!omap.is_object()) throw std::invalid_argument("output_map must be an object");
  std::vector<std::string> state_outputs(names.size());
  std::vector<bool> assigned(names.size(), false);
  for (auto& [state, label] : omap.items()) {
    StateId s = index_of(state);
    if (!label.is_string()) throw std::invalid_argument("output of " + state + " must be a string");
    std::string lab = label.get<std::string>();
    if (!output_set.count(lab))
      throw std::invalid_argument("output_map uses label not in outputs: " + lab);
    state_outputs[s] = std::move(lab);
    assigned[s] = true;
  }
  for (std::size_t i = 0; i < names.size(); ++i)
    if (!assigned[i]) throw std::invalid_argument("output_map missing state: " + names[i]);

  std::vector<Edge> edges;
  for (const auto& t : j["transitions"]) {
    if (!t.is_array() || t.size() != 2)
      throw std::invalid_argument("each transition must be a [from, to] pair");
    edges.push_back({index_of(t[0].get<std::string>()), index_of(t[1].get<std::string>())});
  }
  return TransitionSystem(std::move(names), std::move(state_outputs), std::move(edges));
}

}  // namespace habs
