#include <algorithm>
#include <chrono>
#include <stdexcept>
#include <variant>

#include "habs/assess.hpp"
#include "habs/errors.hpp"
#include "json.hpp"

namespace habs {

namespace {

/// Wraps a pipeline stage so failures name the stage. Budget and positioned
/// formula errors keep their concrete types (callers dispatch on them).
template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const BudgetError&) {
    throw;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string(name) + " stage: " + e.what());
  }
}

constexpr double geom_tol = 1e-9;

std::vector<std::uint32_t> resolve_guards(const GuardSpec& g, const PlantAbstraction& pa,
                                          const std::vector<std::string>& labels,
                                          const std::string& where) {
  const TransitionSystem& ts = pa.ts;
  const auto label_index = [&](const std::string& label) {
    const auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end())
      throw std::invalid_argument(where + ": label '" + label + "' is not declared");
    return static_cast<std::uint32_t>(it - labels.begin());
  };
  std::vector<std::uint32_t> guard_of(ts.num_states(), 0);

  if (g.kind == GuardKind::boxes) {
    if (pa.centers.empty())
      throw std::invalid_argument(where + ": box guards need a plant with geometry");
    const std::size_t dim = pa.half_widths.size();
    for (const GuardBoxRule& rule : g.boxes)
      if (rule.box.size() != dim)
        throw std::invalid_argument(where + ": guard box for '" + rule.label + "' has " +
                                    std::to_string(rule.box.size()) + " axes, the plant has " +
                                    std::to_string(dim));
    for (StateId s = 0; s < ts.num_states(); ++s) {
      const auto& center = pa.centers[s];
      bool matched = false;
      std::uint32_t label = label_index(g.default_label);
      for (const GuardBoxRule& rule : g.boxes) {
        // Each guard box must be constant on each cell: fully containing it
        // or fully missing it. A box edge inside a cell is a model error.
        bool all_in = true;
        bool any_disjoint = false;
        for (std::size_t a = 0; a < dim; ++a) {
          const double clo = center[a] - pa.half_widths[a];
          const double chi = center[a] + pa.half_widths[a];
          const double blo = rule.box[a].first;
          const double bhi = rule.box[a].second;
          all_in = all_in && blo <= clo + geom_tol && chi <= bhi + geom_tol;
          any_disjoint = any_disjoint || chi <= blo + geom_tol || clo >= bhi - geom_tol;
        }
        if (all_in) {
          if (!matched) {
            matched = true;
            label = label_index(rule.label);
          }
        } else if (!any_disjoint) {
          throw std::invalid_argument(where + ": guard box for '" + rule.label +
                                      "' cuts through cell '" + ts.state_name(s) + "'");
        }
      }
      guard_of[s] = label;
    }
    return guard_of;
  }

  const char* source = g.kind == GuardKind::by_output ? "by_output" : "by_state";
  for (const auto& [key, value] : g.table) {
    bool known = false;
    if (g.kind == GuardKind::by_output) {
      const auto& outs = ts.output_labels();
      known = std::find(outs.begin(), outs.end(), key) != outs.end();
    } else {
      const auto& names = ts.state_names();
      known = std::find(names.begin(), names.end(), key) != names.end();
    }
    if (!known)
      throw std::invalid_argument(where + ": " + source + " key '" + key +
                                  "' matches nothing in the plant abstraction");
    (void)value;
  }
  for (StateId s = 0; s < ts.num_states(); ++s) {
    const std::string& key = g.kind == GuardKind::by_output ? ts.output(s) : ts.state_name(s);
    const auto it = g.table.find(key);
    if (it == g.table.end())
      throw std::invalid_argument(where + ": '" + key + "' has no guard label");
    guard_of[s] = label_index(it->second);
  }
  return guard_of;
}

bool center_in_box(const std::vector<double>& center, const GeomBox& box) {
  for (std::size_t a = 0; a < box.size(); ++a)
    if (!(box[a].first <= center[a] && center[a] < box[a].second)) return false;
  return true;
}

}  // namespace

PlantAbstraction abstract_plant(const PlantSpec& plant, const AnalysisSpec& analysis) {
  if (const auto* lin = std::get_if<LinearPlantSpec>(&plant)) {
    LatticeOptions opts;
    opts.self_loops = analysis.self_loops;
    opts.cell_budget = analysis.cell_budget;
    TransitionSystem ts = build_lattice_abstraction(lin->system, lin->lattice, opts);
    std::vector<double> half;
    for (double e : lin->lattice.epsilon) half.push_back(e / 2.0);
    return {std::move(ts), lattice_cell_centers(lin->lattice), std::move(half)};
  }
  if (const auto* bnf = std::get_if<BnfPlantSpec>(&plant)) {
    TransitionSystem ts = bnf_quotient(bnf->chain);
    std::vector<double> half{bnf->chain.epsilon / 2.0};
    for (std::uint32_t j = 1; j < bnf->chain.n; ++j)
      half.push_back(bnf->chain.orthant_bound / 2.0);
    return {std::move(ts), bnf_state_centers(bnf->chain), std::move(half)};
  }
  if (const auto* flat = std::get_if<FlatAlphabetPlantSpec>(&plant)) {
    TransitionSystem ts = difference_flat_quotient(flat->window, analysis.window_budget);
    return {std::move(ts), {}, {}};
  }
  throw std::invalid_argument("ODE plants cannot be abstracted; use simulate/recover");
}

BuiltHybrid build_hybrid(const ModelFile& mf) {
  std::vector<std::string> mode_names;
  std::vector<PlantAbstraction> abstractions;
  HybridModel model;

  if (mf.hybrid) {
    const HybridSpec& hy = *mf.hybrid;
    model.labels = hy.labels;
    model.urgent_switching = hy.urgent_switching;
    for (const ModeSpec& ms : hy.modes) {
      PlantAbstraction pa = abstract_plant(mf.plants.at(ms.plant), mf.analysis);
      auto guard_of =
          resolve_guards(ms.guards, pa, hy.labels, "hybrid mode '" + ms.name + "' guards");
      model.modes.push_back({ms.name, pa.ts, std::move(guard_of)});
      mode_names.push_back(ms.name);
      abstractions.push_back(std::move(pa));
    }
    const auto mode_index = [&](const std::string& name) {
      return static_cast<std::uint32_t>(
          std::find(mode_names.begin(), mode_names.end(), name) - mode_names.begin());
    };
    const auto label_index = [&](const std::string& name) {
      return static_cast<std::uint32_t>(
          std::find(model.labels.begin(), model.labels.end(), name) - model.labels.begin());
    };
    model.h.resize(model.modes.size());
    for (std::uint32_t m = 0; m < model.modes.size(); ++m)
      model.h[m].assign(model.labels.size(), m);  // default: stay
    for (const auto& row : hy.switches)
      model.h[mode_index(row[0])][label_index(row[1])] = mode_index(row[2]);
    for (const auto& [key, map] : hy.rehome)
      model.rehome[{mode_index(key.first), mode_index(key.second)}] = map;
  } else {
    PlantAbstraction pa = abstract_plant(mf.plants.begin()->second, mf.analysis);
    model.labels = pa.ts.output_labels();
    model.urgent_switching = false;
    std::vector<std::uint32_t> guard_of(pa.ts.num_states());
    for (StateId s = 0; s < pa.ts.num_states(); ++s) guard_of[s] = pa.ts.output_index(s);
    model.modes.push_back({"q0", pa.ts, std::move(guard_of)});
    model.h.assign(1, std::vector<std::uint32_t>(model.labels.size(), 0));
    mode_names.push_back("q0");
    abstractions.push_back(std::move(pa));
  }

  validate_hybrid(model);
  ComposedAbstraction composed = compose_abstraction(model);

  std::vector<std::size_t> offsets(abstractions.size() + 1, 0);
  for (std::size_t m = 0; m < abstractions.size(); ++m)
    offsets[m + 1] = offsets[m] + abstractions[m].ts.num_states();

  bool has_geometry = true;
  for (const auto& pa : abstractions) has_geometry = has_geometry && !pa.centers.empty();
  std::vector<std::vector<double>> composed_centers(composed.ts.num_states());
  for (StateId s = 0; s < composed.ts.num_states(); ++s) {
    const ComposedState& src = composed.origin[s];
    if (!abstractions[src.mode].centers.empty())
      composed_centers[s] = abstractions[src.mode].centers[src.plant_state];
  }

  std::vector<StateId> initials;
  if (mf.hybrid && mf.hybrid->initial) {
    const InitialSpec& init = *mf.hybrid->initial;
    const auto mi = static_cast<std::size_t>(
        std::find(mode_names.begin(), mode_names.end(), init.mode) - mode_names.begin());
    const PlantAbstraction& pa = abstractions[mi];
    if (!init.states.empty()) {
      for (const std::string& name : init.states) {
        try {
          initials.push_back(static_cast<StateId>(offsets[mi] + pa.ts.state_index(name)));
        } catch (const std::out_of_range&) {
          throw std::invalid_argument("initial state '" + name + "' is not a state of mode '" +
                                      init.mode + "'");
        }
      }
    } else {
      if (pa.centers.empty())
        throw std::invalid_argument("an initial box needs a plant with geometry; list states");
      if (init.box.size() != pa.half_widths.size())
        throw std::invalid_argument("initial box has " + std::to_string(init.box.size()) +
                                    " axes, mode '" + init.mode + "' has " +
                                    std::to_string(pa.half_widths.size()));
      for (StateId s = 0; s < pa.ts.num_states(); ++s)
        if (center_in_box(pa.centers[s], init.box))
          initials.push_back(static_cast<StateId>(offsets[mi] + s));
      if (initials.empty()) throw std::invalid_argument("initial box selects no abstract states");
    }
  }

  Alphabet alphabet{mode_names, model.labels};
  return BuiltHybrid{std::move(model),    std::move(composed),         std::move(alphabet),
                     std::move(initials), std::move(composed_centers), has_geometry};
}

AssessmentReport assess(const ModelFile& mf, const std::string& spec_name, std::uint32_t bound) {
  if (bound < 1) throw std::invalid_argument("assess: bound must be at least 1");
  const auto spec_it = mf.specs.find(spec_name);
  if (spec_it == mf.specs.end())
    throw std::invalid_argument("assess: unknown spec '" + spec_name + "'");

  BuiltHybrid built = stage("abstraction", [&] { return build_hybrid(mf); });
  const LtlPtr phi = parse_ltl(spec_it->second, built.alphabet);
  const BmcEncoding enc = stage("encoding", [&] {
    return encode_bmc(built.composed.ts, phi, built.alphabet, bound, built.initial_states);
  });

  SatOptions sat_opts;
  sat_opts.max_conflicts = mf.analysis.max_conflicts;
  const auto t0 = std::chrono::steady_clock::now();
  const SatResult sat = stage("solving", [&] { return sat_solve(enc.cnf, sat_opts); });
  const auto t1 = std::chrono::steady_clock::now();

  AssessmentReport rep;
  rep.bound = bound;
  rep.spec_name = spec_name;
  rep.formula = ltl_to_string(phi, built.alphabet);
  rep.states = built.composed.ts.num_states();
  rep.edges = built.composed.ts.num_edges();
  rep.cnf_vars = static_cast<std::uint64_t>(enc.cnf.num_vars);
  rep.cnf_clauses = enc.cnf.clauses.size();
  rep.solve_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  rep.has_geometry = built.has_geometry;

  if (sat.status == SatStatus::cap_exceeded) {
    rep.verdict = Verdict::timeout;
    return rep;
  }
  if (sat.status == SatStatus::unsatisfiable) {
    rep.verdict = Verdict::not_vulnerable_at_bound;
    return rep;
  }

  rep.verdict = Verdict::vulnerable;
  const Trace trace =
      stage("decoding", [&] { return decode_witness(enc, sat.assignment, built.composed.ts); });
  const auto path = decode_state_path(enc, sat.assignment);
  rep.loop_back = trace.loop_back;
  for (std::size_t i = 0; i < path.size(); ++i) {
    rep.witness.push_back({built.alphabet.modes[trace.steps[i].mode],
                           built.alphabet.labels[trace.steps[i].label],
                           built.composed.ts.state_name(path[i])});
    if (built.has_geometry) rep.concretized.push_back(built.composed_centers[path[i]]);
  }
  return rep;
}

std::vector<std::vector<double>> concretize_witness(const AssessmentReport& report,
                                                    const ModelFile& mf) {
  if (report.witness.empty())
    throw std::invalid_argument("concretize_witness: the report carries no witness");
  const BuiltHybrid built = build_hybrid(mf);
  if (!built.has_geometry) return {};
  std::vector<std::vector<double>> points;
  for (const WitnessStep& step : report.witness)
    points.push_back(built.composed_centers[built.composed.ts.state_index(step.abstract_state)]);
  return points;
}

std::string report_to_json(const AssessmentReport& report, bool include_timing) {
  nlohmann::json j;
  j["bound"] = report.bound;
  j["formula"] = report.formula;
  j["spec"] = report.spec_name;
  nlohmann::json stats;
  stats["cnf_clauses"] = report.cnf_clauses;
  stats["cnf_vars"] = report.cnf_vars;
  stats["edges"] = report.edges;
  stats["states"] = report.states;
  if (include_timing) stats["solve_time_ms"] = report.solve_time_ms;
  j["statistics"] = stats;
  switch (report.verdict) {
    case Verdict::vulnerable:
      j["verdict"] = "vulnerable";
      break;
    case Verdict::not_vulnerable_at_bound:
      j["verdict"] = "not-vulnerable-at-bound";
      break;
    case Verdict::timeout:
      j["verdict"] = "timeout";
      break;
  }
  if (!report.witness.empty()) {
    nlohmann::json w;
    w["loop_back"] = report.loop_back ? nlohmann::json(*report.loop_back) : nlohmann::json();
    nlohmann::json steps = nlohmann::json::array();
    for (const WitnessStep& s : report.witness)
      steps.push_back({{"abstract_state", s.abstract_state}, {"k", s.k}, {"q", s.q}});
    w["steps"] = std::move(steps);
    j["witness"] = std::move(w);
    if (report.has_geometry && !report.concretized.empty()) {
      nlohmann::json cp;
      cp["points"] = report.concretized;
      cp["validated"] = false;
      j["concretized_path"] = std::move(cp);
    }
  }
  return j.dump(2) + "\n";
}

std::string witness_to_csv(const AssessmentReport& report) {
  std::string out = "step,q,k,abstract_state,loop_to\n";
  for (std::size_t i = 0; i < report.witness.size(); ++i) {
    const WitnessStep& s = report.witness[i];
    out += std::to_string(i) + "," + s.q + "," + s.k + "," + s.abstract_state + ",";
    if (report.loop_back && i + 1 == report.witness.size())
      out += std::to_string(*report.loop_back);
    out += "\n";
  }
  return out;
}

}  // namespace habs
