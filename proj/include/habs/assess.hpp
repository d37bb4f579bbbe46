#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "habs/bmc.hpp"
#include "habs/hds.hpp"
#include "habs/model.hpp"
#include "habs/sat.hpp"

namespace habs {

/// A finite abstraction of one plant. `centers` and `half_widths` describe
/// the cell geometry (cell s spans centers[s] +- half_widths per axis) and
/// are empty for plants without one (flat alphabets).
struct PlantAbstraction {
  TransitionSystem ts;
  std::vector<std::vector<double>> centers;
  std::vector<double> half_widths;
};

/// Abstraction dispatch on the plant type; ODE plants are rejected.
PlantAbstraction abstract_plant(const PlantSpec& plant, const AnalysisSpec& analysis);

/// The assembled verification object: supervisor x plant abstractions, the
/// atom alphabet, resolved initial composed states (empty = unconstrained)
/// and per-composed-state geometry for witness concretization.
struct BuiltHybrid {
  HybridModel model;
  ComposedAbstraction composed;
  Alphabet alphabet;
  std::vector<StateId> initial_states;
  std::vector<std::vector<double>> composed_centers;  // empty vector = no geometry
  bool has_geometry = false;
};

/// Builds every referenced plant abstraction, resolves guard labels, applies
/// the supervisor table and composes. A model without a hybrid section wraps
/// its single plant in an implicit mode "q0" whose guard labels are the
/// abstraction's own output labels.
BuiltHybrid build_hybrid(const ModelFile& mf);

enum class Verdict { vulnerable, not_vulnerable_at_bound, timeout };

struct WitnessStep {
  std::string q;               // supervisor mode
  std::string k;               // guard label
  std::string abstract_state;  // composed state name
};

struct AssessmentReport {
  Verdict verdict = Verdict::not_vulnerable_at_bound;
  std::uint32_t bound = 0;
  std::string spec_name;
  std::string formula;  // canonical form of the parsed property
  std::uint32_t states = 0;
  std::uint64_t edges = 0;
  std::uint64_t cnf_vars = 0;
  std::uint64_t cnf_clauses = 0;
  double solve_time_ms = 0.0;
  std::vector<WitnessStep> witness;  // non-empty iff vulnerable
  std::optional<std::uint32_t> loop_back;
  std::vector<std::vector<double>> concretized;  // cell centers along the witness
  bool has_geometry = false;
};

/// The end-to-end pipeline: abstraction, composition, LTL parse, CNF
/// encoding, SAT search, witness decoding and re-validation. Lower-level
/// failures surface with the pipeline stage named (budget and formula-syntax
/// errors keep their own types).
AssessmentReport assess(const ModelFile& mf, const std::string& spec_name, std::uint32_t bound);

/// Best-effort geometric path: the cell/slice center of every witness step.
/// Explicitly non-validated (no claim a continuous trajectory tracks it).
/// Returns an empty list when some mode's plant has no geometry.
std::vector<std::vector<double>> concretize_witness(const AssessmentReport& report,
                                                    const ModelFile& mf);

/// Deterministic report JSON (sorted keys, trailing newline). Timing is the
/// only run-dependent field and is dropped when `include_timing` is false.
std::string report_to_json(const AssessmentReport& report, bool include_timing);

/// "step,q,k,abstract_state,loop_to" rows; loop_to is set on the last row of
/// a lasso witness and empty otherwise.
std::string witness_to_csv(const AssessmentReport& report);

}  // namespace habs
