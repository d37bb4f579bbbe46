#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "habs/flat.hpp"
#include "habs/lattice.hpp"
#include "habs/ode.hpp"

namespace habs {

struct LinearPlantSpec {
  LinearSystem system;
  LatticePartition lattice;
};

struct BnfPlantSpec {
  BnfChain chain;
};

struct FlatAlphabetPlantSpec {
  FlatAlphabetSpec window;
};

/// ODE plants drive `simulate`/`recover` only; they are not abstractable.
struct OdePlantSpec {
  OdeModel model;
};

using PlantSpec = std::variant<LinearPlantSpec, BnfPlantSpec, FlatAlphabetPlantSpec, OdePlantSpec>;

/// Axis-aligned box, one [lo, hi) interval per axis.
using GeomBox = std::vector<std::pair<double, double>>;

struct GuardBoxRule {
  std::string label;
  GeomBox box;
};

enum class GuardKind { boxes, by_output, by_state };

/// How a mode maps abstract plant states to guard labels. Box guards must be
/// constant on every cell (a box cutting through a cell is a model error);
/// the first containing box wins and `default_label` covers the rest.
struct GuardSpec {
  GuardKind kind = GuardKind::by_state;
  std::vector<GuardBoxRule> boxes;
  std::string default_label;
  std::map<std::string, std::string> table;  // by_output / by_state lookup
};

struct ModeSpec {
  std::string name;
  std::string plant;
  GuardSpec guards;
};

/// Initial abstract states of the composed system: explicit plant-state names
/// or the cells whose centers fall inside a box, in one designated mode.
struct InitialSpec {
  std::string mode;
  std::vector<std::string> states;
  GeomBox box;
};

struct HybridSpec {
  std::vector<std::string> labels;
  std::vector<ModeSpec> modes;
  /// Supervisor rows [mode, label, target]; unlisted pairs stay put.
  std::vector<std::array<std::string, 3>> switches;
  std::map<std::pair<std::string, std::string>, std::map<std::string, std::string>> rehome;
  std::optional<InitialSpec> initial;
  bool urgent_switching = true;
};

struct AnalysisSpec {
  std::uint32_t bound = 10;
  std::uint64_t cell_budget = 1000000;
  std::uint64_t window_budget = 1000000;
  std::uint64_t max_conflicts = 0;  // 0 = unlimited
  bool self_loops = true;
};

struct ModelFile {
  std::map<std::string, PlantSpec> plants;
  std::optional<HybridSpec> hybrid;
  std::map<std::string, std::string> specs;  // name -> LTL source text
  AnalysisSpec analysis;
};

/// Strict schema-v1 parse. Unknown fields, missing references, malformed
/// numbers and inconsistent dimensions are all rejected with a message naming
/// the offending location; no partially-parsed model escapes.
ModelFile parse_model(const std::string& json_text);

/// parse_model over a file's contents; errors mention the path.
ModelFile load_model_file(const std::string& path);

}  // namespace habs
