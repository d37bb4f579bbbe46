#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "habs/assess.hpp"
#include "habs/errors.hpp"

namespace py = pybind11;

namespace {

habs::TransitionSystem make_ts(std::vector<std::string> names, std::vector<std::string> outputs,
                               std::vector<std::pair<habs::StateId, habs::StateId>> edges) {
  std::vector<habs::Edge> es;
  es.reserve(edges.size());
  for (const auto& [a, b] : edges) es.push_back({a, b});
  return habs::TransitionSystem(std::move(names), std::move(outputs), std::move(es));
}

habs::StatePartition make_partition(std::vector<std::uint32_t> block_of) {
  std::uint32_t count = 0;
  for (std::uint32_t b : block_of) count = std::max(count, b + 1);
  return habs::StatePartition{std::move(block_of), count};
}

}  // namespace

PYBIND11_MODULE(_habs, m) {
  m.doc() = "finite abstractions of hybrid systems with LTL bounded model checking";

  py::register_exception<habs::BudgetError>(m, "BudgetError");
  py::register_exception<habs::ParseError>(m, "FormulaError");
  py::register_exception<habs::SingularityError>(m, "SingularityError");

  py::class_<habs::TransitionSystem>(m, "TransitionSystem")
      .def(py::init(&make_ts), py::arg("state_names"), py::arg("state_outputs"), py::arg("edges"))
      .def_property_readonly("num_states", &habs::TransitionSystem::num_states)
      .def_property_readonly("num_edges", &habs::TransitionSystem::num_edges)
      .def("state_name", &habs::TransitionSystem::state_name, py::arg("state"))
      .def("output", &habs::TransitionSystem::output, py::arg("state"),
           py::return_value_policy::copy)
      .def(
          "successors",
          [](const habs::TransitionSystem& ts, habs::StateId s) {
            const auto span = ts.successors(s);
            return std::vector<habs::StateId>(span.begin(), span.end());
          },
          py::arg("state"))
      .def("edges",
           [](const habs::TransitionSystem& ts) {
             std::vector<std::pair<habs::StateId, habs::StateId>> out;
             for (const auto& e : ts.edges()) out.emplace_back(e.from, e.to);
             return out;
           })
      .def("to_dot", [](const habs::TransitionSystem& ts) { return habs::to_dot(ts); })
      .def("to_json", [](const habs::TransitionSystem& ts) { return habs::to_json(ts); });

  m.def(
      "coarsest_bisimulation",
      [](const habs::TransitionSystem& ts) { return habs::coarsest_bisimulation(ts).block_of; },
      py::arg("ts"), "Coarsest output-respecting bisimulation as a state->block list.");

  m.def(
      "quotient",
      [](const habs::TransitionSystem& ts, std::vector<std::uint32_t> block_of) {
        return habs::quotient(ts, make_partition(std::move(block_of)));
      },
      py::arg("ts"), py::arg("block_of"));

  m.def(
      "check_quotient_condition",
      [](const habs::TransitionSystem& ts, std::vector<std::uint32_t> block_of) {
        return habs::check_quotient_condition(ts, make_partition(std::move(block_of)));
      },
      py::arg("ts"), py::arg("block_of"));

  m.def(
      "eval_formula",
      [](const std::string& text, std::vector<std::string> modes, std::vector<std::string> labels,
         const std::vector<std::pair<std::string, std::string>>& steps,
         std::optional<std::uint32_t> loop_back) {
        habs::Alphabet alphabet{std::move(modes), std::move(labels)};
        const habs::LtlPtr phi = habs::parse_ltl(text, alphabet);
        habs::Trace trace;
        trace.loop_back = loop_back;
        for (const auto& [mode, label] : steps) {
          const int mi = alphabet.mode_index(mode);
          const int li = alphabet.label_index(label);
          if (mi < 0 || li < 0)
            throw std::invalid_argument("trace step (" + mode + "," + label +
                                        ") is outside the alphabet");
          trace.steps.push_back(
              {static_cast<std::uint32_t>(mi), static_cast<std::uint32_t>(li)});
        }
        return habs::eval_trace(phi, trace);
      },
      py::arg("formula"), py::arg("modes"), py::arg("labels"), py::arg("steps"),
      py::arg("loop_back") = std::nullopt,
      "Parses an LTL formula over (mode,label) atoms and evaluates it on a trace.");

  m.def(
      "sat_solve",
      [](int num_vars, std::vector<std::vector<int>> clauses, std::uint64_t max_conflicts) {
        habs::CnfFormula cnf{num_vars, std::move(clauses), ""};
        habs::SatOptions opts;
        opts.max_conflicts = max_conflicts;
        const habs::SatResult res = habs::sat_solve(cnf, opts);
        py::dict out;
        out["status"] = res.status == habs::SatStatus::satisfiable      ? "sat"
                        : res.status == habs::SatStatus::unsatisfiable ? "unsat"
                                                                        : "cap-exceeded";
        std::vector<bool> assignment;
        if (res.status == habs::SatStatus::satisfiable)
          assignment.assign(res.assignment.begin() + 1, res.assignment.end());
        out["assignment"] = assignment;  // assignment[i] is the value of variable i+1
        out["conflicts"] = res.conflicts;
        out["decisions"] = res.decisions;
        return out;
      },
      py::arg("num_vars"), py::arg("clauses"), py::arg("max_conflicts") = 0);

  m.def(
      "abstract_model",
      [](const std::string& model_json) {
        const habs::BuiltHybrid built = habs::build_hybrid(habs::parse_model(model_json));
        return habs::to_json(built.composed.ts);
      },
      py::arg("model_json"),
      "Builds the composed abstraction of a model file and returns it as JSON.");

  m.def(
      "assess_model",
      [](const std::string& model_json, const std::string& spec, std::uint32_t bound,
         bool include_timing) {
        const habs::ModelFile mf = habs::parse_model(model_json);
        const habs::AssessmentReport rep =
            habs::assess(mf, spec, bound == 0 ? mf.analysis.bound : bound);
        return habs::report_to_json(rep, include_timing);
      },
      py::arg("model_json"), py::arg("spec"), py::arg("bound") = 0,
      py::arg("include_timing") = false,
      "Runs the full assessment pipeline; returns the report as a JSON string.");

  m.def(
      "simulate_model",
      [](const std::string& model_json, const std::string& plant) {
        const habs::ModelFile mf = habs::parse_model(model_json);
        const auto it = mf.plants.find(plant);
        if (it == mf.plants.end()) throw std::invalid_argument("unknown plant '" + plant + "'");
        const auto* ode = std::get_if<habs::OdePlantSpec>(&it->second);
        if (!ode) throw std::invalid_argument("plant '" + plant + "' is not an ODE plant");
        return habs::trajectory_to_csv(habs::simulate_ode(ode->model));
      },
      py::arg("model_json"), py::arg("plant"),
      "Integrates an ODE plant of a model file; returns the trajectory as CSV.");
}
