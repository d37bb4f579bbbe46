#include <algorithm>
#include <cctype>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <stdexcept>

#include "habs/model.hpp"
#include "json.hpp"

namespace habs {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw std::invalid_argument("model: " + where + ": " + what);
}

void check_fields(const json& obj, const std::string& where,
                  std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* name : allowed) known = known || item.key() == name;
    if (!known) fail(where, "unknown field '" + item.key() + "'");
  }
}

const json& field(const json& obj, const std::string& where, const char* name) {
  const auto it = obj.find(name);
  if (it == obj.end()) fail(where, "missing field '" + std::string(name) + "'");
  return *it;
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  return v.get<double>();
}

std::uint64_t unsigned_int(const json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
    fail(where, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string text(const json& v, const std::string& where) {
  if (!v.is_string()) fail(where, "expected a string");
  return v.get<std::string>();
}

bool boolean(const json& v, const std::string& where) {
  if (!v.is_boolean()) fail(where, "expected a boolean");
  return v.get<bool>();
}

std::vector<double> number_array(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(number(x, where));
  return out;
}

/// Mode and label names become LTL atom tokens, so they are restricted to
/// the tokenizer's word characters; '*' stays reserved for the wildcard.
bool word_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '+' || c == '-' ||
          c == '.'))
      return false;
  return true;
}

struct MatrixData {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<SparseEntry> entries;
};

MatrixData parse_matrix(const json& v, const std::string& where) {
  MatrixData out;
  if (v.is_array()) {
    if (v.empty()) fail(where, "matrix needs at least one row");
    out.rows = static_cast<std::uint32_t>(v.size());
    for (std::uint32_t i = 0; i < out.rows; ++i) {
      const json& row = v[i];
      if (!row.is_array()) fail(where, "row " + std::to_string(i) + " is not an array");
      if (i == 0)
        out.cols = static_cast<std::uint32_t>(row.size());
      else if (row.size() != out.cols)
        fail(where, "ragged rows");
      for (std::uint32_t j = 0; j < out.cols; ++j) {
        const double val = number(row[j], where);
        if (val != 0.0) out.entries.push_back({i, j, val});
      }
    }
    if (out.cols == 0) fail(where, "matrix needs at least one column");
  } else if (v.is_object()) {
    check_fields(v, where, {"rows", "cols", "entries"});
    out.rows = static_cast<std::uint32_t>(unsigned_int(field(v, where, "rows"), where + ".rows"));
    out.cols = static_cast<std::uint32_t>(unsigned_int(field(v, where, "cols"), where + ".cols"));
    const json& entries = field(v, where, "entries");
    if (!entries.is_array()) fail(where + ".entries", "expected an array of [i, j, value]");
    for (const auto& e : entries) {
      if (!e.is_array() || e.size() != 3) fail(where + ".entries", "expected [i, j, value]");
      out.entries.push_back({static_cast<std::uint32_t>(unsigned_int(e[0], where + ".entries")),
                             static_cast<std::uint32_t>(unsigned_int(e[1], where + ".entries")),
                             number(e[2], where + ".entries")});
    }
  } else {
    fail(where, "expected an array of rows or {rows, cols, entries}");
  }
  return out;
}

PlantSpec parse_plant(const json& v, const std::string& where) {
  if (!v.is_object()) fail(where, "expected an object");
  const std::string type = text(field(v, where, "type"), where + ".type");

  if (type == "linear") {
    check_fields(v, where, {"type", "A", "B", "lower", "upper", "epsilon"});
    MatrixData A = parse_matrix(field(v, where, "A"), where + ".A");
    MatrixData B = parse_matrix(field(v, where, "B"), where + ".B");
    if (A.rows != A.cols) fail(where + ".A", "must be square");
    if (B.rows != A.rows) fail(where + ".B", "row count must match A");
    LatticePartition part;
    part.lower = number_array(field(v, where, "lower"), where + ".lower");
    part.upper = number_array(field(v, where, "upper"), where + ".upper");
    part.epsilon = number_array(field(v, where, "epsilon"), where + ".epsilon");
    if (part.lower.size() != A.rows || part.upper.size() != A.rows ||
        part.epsilon.size() != A.rows)
      fail(where, "lower/upper/epsilon must each have one entry per state dimension");
    LinearSystem sys = LinearSystem::sparse(A.rows, B.cols, A.entries, B.entries);
    validate_lattice(part);
    return LinearPlantSpec{std::move(sys), std::move(part)};
  }

  if (type == "bnf") {
    check_fields(v, where, {"type", "n", "epsilon", "x1_range", "orthant_bound"});
    BnfChain chain;
    chain.n = static_cast<std::uint32_t>(unsigned_int(field(v, where, "n"), where + ".n"));
    chain.epsilon = number(field(v, where, "epsilon"), where + ".epsilon");
    const auto range = number_array(field(v, where, "x1_range"), where + ".x1_range");
    if (range.size() != 2) fail(where + ".x1_range", "expected [lo, hi]");
    chain.x1_lo = range[0];
    chain.x1_hi = range[1];
    chain.orthant_bound = number(field(v, where, "orthant_bound"), where + ".orthant_bound");
    validate_bnf(chain);
    return BnfPlantSpec{chain};
  }

  if (type == "flat_alphabet") {
    check_fields(v, where, {"type", "symbols", "memory"});
    FlatAlphabetSpec window;
    const json& symbols = field(v, where, "symbols");
    if (!symbols.is_array()) fail(where + ".symbols", "expected an array of strings");
    for (const auto& s : symbols) {
      const std::string sym = text(s, where + ".symbols");
      if (!word_name(sym)) fail(where + ".symbols", "symbol '" + sym + "' is not a plain name");
      window.symbols.push_back(sym);
    }
    window.memory =
        static_cast<std::uint32_t>(unsigned_int(field(v, where, "memory"), where + ".memory"));
    validate_flat_alphabet(window);
    return FlatAlphabetPlantSpec{std::move(window)};
  }

  if (type == "ode") {
    check_fields(v, where, {"type", "model", "parameters", "initial_state", "horizon", "step",
                            "eq3_numerator_p0", "eq6_decay_on_cn"});
    OdeModel model;
    const std::string kind = text(field(v, where, "model"), where + ".model");
    if (kind == "social")
      model.kind = OdeKind::social;
    else if (kind == "circadian")
      model.kind = OdeKind::circadian;
    else
      fail(where + ".model", "unknown ODE model '" + kind + "'");
    const json& params = field(v, where, "parameters");
    if (!params.is_object()) fail(where + ".parameters", "expected an object");
    for (const auto& item : params.items())
      model.params[item.key()] = number(item.value(), where + ".parameters." + item.key());
    model.initial_state = number_array(field(v, where, "initial_state"), where + ".initial_state");
    model.horizon = number(field(v, where, "horizon"), where + ".horizon");
    model.step = number(field(v, where, "step"), where + ".step");
    if (v.contains("eq3_numerator_p0"))
      model.eq3_numerator_p0 = boolean(v["eq3_numerator_p0"], where + ".eq3_numerator_p0");
    if (v.contains("eq6_decay_on_cn"))
      model.eq6_decay_on_cn = boolean(v["eq6_decay_on_cn"], where + ".eq6_decay_on_cn");
    validate_ode(model);
    return OdePlantSpec{std::move(model)};
  }

  fail(where + ".type", "unknown plant type '" + type + "'");
}

GeomBox parse_geom_box(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) fail(where, "expected a non-empty array of [lo, hi] pairs");
  GeomBox box;
  for (const auto& axis : v) {
    const auto pair = number_array(axis, where);
    if (pair.size() != 2) fail(where, "each axis needs [lo, hi]");
    if (!(pair[0] < pair[1])) fail(where, "axis bounds must satisfy lo < hi");
    box.emplace_back(pair[0], pair[1]);
  }
  return box;
}

GuardSpec parse_guards(const json& v, const std::string& where,
                       const std::vector<std::string>& labels) {
  if (!v.is_object()) fail(where, "expected an object");
  check_fields(v, where, {"boxes", "default", "by_output", "by_state"});
  const int sources =
      int(v.contains("boxes")) + int(v.contains("by_output")) + int(v.contains("by_state"));
  if (sources != 1) fail(where, "need exactly one of boxes, by_output, by_state");
  if (!v.contains("boxes") && v.contains("default"))
    fail(where, "'default' applies only to box guards");

  const auto check_label = [&](const std::string& label, const std::string& w) {
    if (std::find(labels.begin(), labels.end(), label) == labels.end())
      fail(w, "label '" + label + "' is not declared in hybrid.labels");
  };

  GuardSpec g;
  if (v.contains("boxes")) {
    g.kind = GuardKind::boxes;
    const json& arr = v["boxes"];
    if (!arr.is_array()) fail(where + ".boxes", "expected an array");
    for (const auto& rule : arr) {
      if (!rule.is_object()) fail(where + ".boxes", "expected {label, box} entries");
      check_fields(rule, where + ".boxes", {"label", "box"});
      GuardBoxRule r;
      r.label = text(field(rule, where + ".boxes", "label"), where + ".boxes.label");
      check_label(r.label, where + ".boxes");
      r.box = parse_geom_box(field(rule, where + ".boxes", "box"), where + ".boxes.box");
      g.boxes.push_back(std::move(r));
    }
    g.default_label = text(field(v, where, "default"), where + ".default");
    check_label(g.default_label, where + ".default");
    return g;
  }

  g.kind = v.contains("by_output") ? GuardKind::by_output : GuardKind::by_state;
  const char* key = g.kind == GuardKind::by_output ? "by_output" : "by_state";
  const json& table = v[key];
  if (!table.is_object()) fail(where + "." + key, "expected an object");
  for (const auto& item : table.items()) {
    const std::string label = text(item.value(), where + "." + key + "." + item.key());
    check_label(label, where + "." + key);
    g.table[item.key()] = label;
  }
  if (g.table.empty()) fail(where + "." + key, "guard table is empty");
  return g;
}

HybridSpec parse_hybrid(const json& v, const std::map<std::string, PlantSpec>& plants) {
  const std::string where = "hybrid";
  if (!v.is_object()) fail(where, "expected an object");
  check_fields(v, where, {"labels", "modes", "h", "rehome", "initial", "urgent_switching"});

  HybridSpec hy;
  const json& labels = field(v, where, "labels");
  if (!labels.is_array() || labels.empty()) fail(where + ".labels", "expected a non-empty array");
  for (const auto& l : labels) {
    const std::string label = text(l, where + ".labels");
    if (!word_name(label)) fail(where + ".labels", "label '" + label + "' is not a plain name");
    if (std::find(hy.labels.begin(), hy.labels.end(), label) != hy.labels.end())
      fail(where + ".labels", "duplicate label '" + label + "'");
    hy.labels.push_back(label);
  }

  const json& modes = field(v, where, "modes");
  if (!modes.is_array() || modes.empty()) fail(where + ".modes", "expected a non-empty array");
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const std::string mwhere = where + ".modes[" + std::to_string(i) + "]";
    const json& m = modes[i];
    if (!m.is_object()) fail(mwhere, "expected an object");
    check_fields(m, mwhere, {"name", "plant", "guards"});
    ModeSpec mode;
    mode.name = text(field(m, mwhere, "name"), mwhere + ".name");
    if (!word_name(mode.name)) fail(mwhere + ".name", "mode name is not a plain name");
    for (const auto& other : hy.modes)
      if (other.name == mode.name) fail(mwhere + ".name", "duplicate mode '" + mode.name + "'");
    mode.plant = text(field(m, mwhere, "plant"), mwhere + ".plant");
    const auto plant_it = plants.find(mode.plant);
    if (plant_it == plants.end())
      fail(mwhere + ".plant", "unknown plant '" + mode.plant + "'");
    if (std::holds_alternative<OdePlantSpec>(plant_it->second))
      fail(mwhere + ".plant", "ODE plants cannot be abstracted; use simulate/recover");
    mode.guards = parse_guards(field(m, mwhere, "guards"), mwhere + ".guards", hy.labels);
    hy.modes.push_back(std::move(mode));
  }

  const auto known_mode = [&](const std::string& name) {
    return std::any_of(hy.modes.begin(), hy.modes.end(),
                       [&](const ModeSpec& m) { return m.name == name; });
  };
  const auto known_label = [&](const std::string& name) {
    return std::find(hy.labels.begin(), hy.labels.end(), name) != hy.labels.end();
  };

  if (v.contains("h")) {
    const json& rows = v["h"];
    if (!rows.is_array()) fail(where + ".h", "expected an array of [mode, label, target]");
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& row : rows) {
      if (!row.is_array() || row.size() != 3) fail(where + ".h", "expected [mode, label, target]");
      std::array<std::string, 3> triple{text(row[0], where + ".h"), text(row[1], where + ".h"),
                                        text(row[2], where + ".h")};
      if (!known_mode(triple[0])) fail(where + ".h", "unknown mode '" + triple[0] + "'");
      if (!known_label(triple[1])) fail(where + ".h", "unknown label '" + triple[1] + "'");
      if (!known_mode(triple[2])) fail(where + ".h", "unknown mode '" + triple[2] + "'");
      if (!seen.insert({triple[0], triple[1]}).second)
        fail(where + ".h", "duplicate row for (" + triple[0] + ", " + triple[1] + ")");
      hy.switches.push_back(std::move(triple));
    }
  }

  if (v.contains("rehome")) {
    const json& rh = v["rehome"];
    if (!rh.is_object()) fail(where + ".rehome", "expected an object keyed 'from->to'");
    for (const auto& item : rh.items()) {
      const auto pos = item.key().find("->");
      if (pos == std::string::npos)
        fail(where + ".rehome", "key '" + item.key() + "' is not of the form 'from->to'");
      const std::string from = item.key().substr(0, pos);
      const std::string to = item.key().substr(pos + 2);
      if (!known_mode(from)) fail(where + ".rehome", "unknown mode '" + from + "'");
      if (!known_mode(to)) fail(where + ".rehome", "unknown mode '" + to + "'");
      if (!item.value().is_object())
        fail(where + ".rehome", "value for '" + item.key() + "' must be an object");
      std::map<std::string, std::string> map;
      for (const auto& entry : item.value().items())
        map[entry.key()] = text(entry.value(), where + ".rehome." + item.key());
      hy.rehome[{from, to}] = std::move(map);
    }
  }

  if (v.contains("initial")) {
    const json& init = v["initial"];
    const std::string iwhere = where + ".initial";
    if (!init.is_object()) fail(iwhere, "expected an object");
    check_fields(init, iwhere, {"mode", "states", "box"});
    InitialSpec spec;
    spec.mode = text(field(init, iwhere, "mode"), iwhere + ".mode");
    if (!known_mode(spec.mode)) fail(iwhere + ".mode", "unknown mode '" + spec.mode + "'");
    if (init.contains("states") == init.contains("box"))
      fail(iwhere, "need exactly one of states, box");
    if (init.contains("states")) {
      const json& states = init["states"];
      if (!states.is_array() || states.empty())
        fail(iwhere + ".states", "expected a non-empty array of state names");
      for (const auto& s : states) spec.states.push_back(text(s, iwhere + ".states"));
    } else {
      spec.box = parse_geom_box(init["box"], iwhere + ".box");
    }
    hy.initial = std::move(spec);
  }

  if (v.contains("urgent_switching"))
    hy.urgent_switching = boolean(v["urgent_switching"], where + ".urgent_switching");
  return hy;
}

AnalysisSpec parse_analysis(const json& v) {
  const std::string where = "analysis";
  if (!v.is_object()) fail(where, "expected an object");
  check_fields(v, where, {"bound", "cell_budget", "window_budget", "max_conflicts", "self_loops"});
  AnalysisSpec a;
  if (v.contains("bound")) {
    a.bound = static_cast<std::uint32_t>(unsigned_int(v["bound"], where + ".bound"));
    if (a.bound < 1) fail(where + ".bound", "bound must be at least 1");
  }
  if (v.contains("cell_budget")) {
    a.cell_budget = unsigned_int(v["cell_budget"], where + ".cell_budget");
    if (a.cell_budget < 1) fail(where + ".cell_budget", "budget must be positive");
  }
  if (v.contains("window_budget")) {
    a.window_budget = unsigned_int(v["window_budget"], where + ".window_budget");
    if (a.window_budget < 1) fail(where + ".window_budget", "budget must be positive");
  }
  if (v.contains("max_conflicts"))
    a.max_conflicts = unsigned_int(v["max_conflicts"], where + ".max_conflicts");
  if (v.contains("self_loops")) a.self_loops = boolean(v["self_loops"], where + ".self_loops");
  return a;
}

}  // namespace

ModelFile parse_model(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("model: invalid JSON: ") + e.what());
  }
  if (!root.is_object()) fail("top level", "expected an object");
  check_fields(root, "top level", {"version", "plants", "hybrid", "specs", "analysis"});
  if (unsigned_int(field(root, "top level", "version"), "version") != 1)
    fail("version", "unsupported schema version (expected 1)");

  ModelFile mf;
  const json& plants = field(root, "top level", "plants");
  if (!plants.is_object() || plants.empty())
    fail("plants", "expected a non-empty object of named plants");
  for (const auto& item : plants.items()) {
    if (item.key().empty()) fail("plants", "empty plant name");
    mf.plants.emplace(item.key(), parse_plant(item.value(), "plants." + item.key()));
  }

  if (root.contains("hybrid")) {
    mf.hybrid = parse_hybrid(root["hybrid"], mf.plants);
  } else if (mf.plants.size() != 1) {
    fail("plants", "without a hybrid section the model must declare exactly one plant");
  }

  if (root.contains("specs")) {
    const json& specs = root["specs"];
    if (!specs.is_object()) fail("specs", "expected an object of named formulas");
    for (const auto& item : specs.items()) {
      const std::string formula = text(item.value(), "specs." + item.key());
      if (item.key().empty() || formula.empty())
        fail("specs", "spec names and formulas must be non-empty");
      mf.specs[item.key()] = formula;
    }
  }

  if (root.contains("analysis")) mf.analysis = parse_analysis(root["analysis"]);
  return mf;
}

ModelFile load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("model: cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_model(buffer.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string(e.what()) + " [" + path + "]");
  }
}

}  // namespace habs
