#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "habs/assess.hpp"
#include "habs/errors.hpp"
#include "habs/model.hpp"
#include "json.hpp"

using habs::BuiltHybrid;
using habs::ModelFile;
using habs::StateId;
using habs::Verdict;
using nlohmann::json;

namespace {

// Single linear plant, no hybrid section: a 2x2 grid over the double
// integrator. Cells are c<i0>_<i1> with centers at lower + (i + 0.5) * eps.
json lattice_doc() {
  return json{
      {"version", 1},
      {"plants",
       {{"tank",
         {{"type", "linear"},
          {"A", {{0.0, 1.0}, {0.0, 0.0}}},
          {"B", {{0.0}, {1.0}}},
          {"lower", {0.0, -1.0}},
          {"upper", {2.0, 1.0}},
          {"epsilon", {1.0, 1.0}}}}}},
      {"specs", {{"safe", "G !(q0,c1_1)"}}},
      {"analysis", {{"bound", 3}}}};
}

// Two-mode supervisor over a three-slice integrator: q0 trips to q1 when the
// alarm region is reached, and the trip rehomes the plant state to y0.
json hybrid_doc() {
  return json{
      {"version", 1},
      {"plants",
       {{"chain",
         {{"type", "bnf"},
          {"n", 1},
          {"epsilon", 1.0},
          {"x1_range", {0.0, 3.0}},
          {"orthant_bound", 1.0}}}}},
      {"hybrid",
       {{"labels", {"ok", "alarm"}},
        {"modes",
         {{{"name", "q0"},
           {"plant", "chain"},
           {"guards",
            {{"by_state", {{"y0", "ok"}, {"y1", "ok"}, {"y2", "alarm"}}}}}},
          {{"name", "q1"},
           {"plant", "chain"},
           {"guards", {{"by_output", {{"y0", "ok"}, {"y1", "ok"}, {"y2", "ok"}}}}}}}},
        {"h", {{"q0", "alarm", "q1"}}},
        {"rehome", {{"q0->q1", {{"y2", "y0"}}}}},
        {"initial", {{"mode", "q0"}, {"states", {"y0"}}}},
        {"urgent_switching", true}}},
      {"specs", {{"stays", "G !(q1,*)"}, {"never_alarms", "G !(q0,alarm)"}}},
      {"analysis", {{"bound", 4}}}};
}

ModelFile parse(const json& doc) { return habs::parse_model(doc.dump()); }

void expect_parse_error(const json& doc, const std::string& needle) {
  try {
    habs::parse_model(doc.dump());
    FAIL("expected parse_model to reject: ", needle);
  } catch (const std::invalid_argument& e) {
    INFO("message: ", e.what());
    CHECK(std::string(e.what()).find(needle) != std::string::npos);
  }
}

}  // namespace

TEST_CASE("well-formed documents parse into the expected structure") {
  const ModelFile flat = parse(lattice_doc());
  CHECK(flat.plants.size() == 1);
  CHECK(flat.plants.count("tank") == 1);
  CHECK_FALSE(flat.hybrid.has_value());
  CHECK(flat.specs.at("safe") == "G !(q0,c1_1)");
  CHECK(flat.analysis.bound == 3);
  CHECK(flat.analysis.self_loops);  // defaults survive

  const ModelFile hy = parse(hybrid_doc());
  REQUIRE(hy.hybrid.has_value());
  CHECK(hy.hybrid->labels == std::vector<std::string>{"ok", "alarm"});
  REQUIRE(hy.hybrid->modes.size() == 2);
  CHECK(hy.hybrid->modes[0].name == "q0");
  CHECK(hy.hybrid->modes[0].plant == "chain");
  CHECK(hy.hybrid->modes[0].guards.kind == habs::GuardKind::by_state);
  CHECK(hy.hybrid->modes[1].guards.kind == habs::GuardKind::by_output);
  REQUIRE(hy.hybrid->switches.size() == 1);
  CHECK(hy.hybrid->switches[0] == std::array<std::string, 3>{"q0", "alarm", "q1"});
  CHECK(hy.hybrid->rehome.at({"q0", "q1"}).at("y2") == "y0");
  REQUIRE(hy.hybrid->initial.has_value());
  CHECK(hy.hybrid->initial->mode == "q0");
  CHECK(hy.hybrid->initial->states == std::vector<std::string>{"y0"});
  CHECK(hy.hybrid->urgent_switching);
  CHECK(hy.specs.size() == 2);
}

TEST_CASE("schema violations are rejected with located messages") {
  expect_parse_error(json::object(), "missing field 'version'");

  json doc = lattice_doc();
  doc["version"] = 2;
  expect_parse_error(doc, "unsupported schema version");

  doc = lattice_doc();
  doc["surprise"] = 1;
  expect_parse_error(doc, "unknown field 'surprise'");

  doc = lattice_doc();
  doc["plants"]["tank"]["Q"] = 1;
  expect_parse_error(doc, "unknown field 'Q'");

  doc = lattice_doc();
  doc["plants"]["tank"]["type"] = "quadratic";
  expect_parse_error(doc, "unknown plant type 'quadratic'");

  doc = lattice_doc();
  doc["plants"] = json::object();
  expect_parse_error(doc, "non-empty object of named plants");

  doc = lattice_doc();
  doc["analysis"]["bound"] = 0;
  expect_parse_error(doc, "bound must be at least 1");

  doc = lattice_doc();
  doc["analysis"]["cell_budget"] = 0;
  expect_parse_error(doc, "budget must be positive");

  CHECK_THROWS_WITH_AS(habs::parse_model("{nope"),
                       doctest::Contains("model: invalid JSON"), std::invalid_argument);
  expect_parse_error(json::array(), "expected an object");
}

TEST_CASE("matrix forms: dense rows and sparse triplets") {
  json doc = lattice_doc();
  doc["plants"]["tank"]["A"] = {
      {"rows", 2}, {"cols", 2}, {"entries", {{0, 1, 1.0}}}};
  CHECK_NOTHROW(parse(doc));

  doc["plants"]["tank"]["A"] = {{0.0, 1.0}, {0.0}};
  expect_parse_error(doc, "ragged rows");

  doc["plants"]["tank"]["A"] = {{"rows", 2}, {"cols", 2}, {"entries", {{0, 1}}}};
  expect_parse_error(doc, "expected [i, j, value]");

  doc["plants"]["tank"]["A"] = {{0.0, 1.0, 0.0}, {0.0, 0.0, 0.0}};
  expect_parse_error(doc, "must be square");

  doc = lattice_doc();
  doc["plants"]["tank"]["B"] = {{1.0}};
  expect_parse_error(doc, "row count must match A");

  doc = lattice_doc();
  doc["plants"]["tank"]["epsilon"] = {1.0};
  expect_parse_error(doc, "one entry per state dimension");
}

TEST_CASE("plant count rules without a hybrid section") {
  json doc = lattice_doc();
  doc["plants"]["second"] = doc["plants"]["tank"];
  expect_parse_error(doc, "exactly one plant");
}

TEST_CASE("hybrid section validation") {
  json doc = hybrid_doc();
  doc["hybrid"]["modes"][0]["guards"]["boxes"] = json::array();
  expect_parse_error(doc, "need exactly one of boxes, by_output, by_state");

  doc = hybrid_doc();
  doc["hybrid"]["modes"][0]["guards"]["default"] = "ok";
  expect_parse_error(doc, "'default' applies only to box guards");

  doc = hybrid_doc();
  doc["hybrid"]["modes"][0]["guards"]["by_state"]["y1"] = "panic";
  expect_parse_error(doc, "label 'panic' is not declared");

  doc = hybrid_doc();
  doc["hybrid"]["modes"][1]["plant"] = "ghost";
  expect_parse_error(doc, "unknown plant 'ghost'");

  doc = hybrid_doc();
  doc["hybrid"]["modes"][1]["name"] = "q0";
  expect_parse_error(doc, "duplicate mode 'q0'");

  doc = hybrid_doc();
  doc["hybrid"]["h"].push_back({"q0", "alarm", "q0"});
  expect_parse_error(doc, "duplicate row for (q0, alarm)");

  doc = hybrid_doc();
  doc["hybrid"]["h"][0][1] = "meltdown";
  expect_parse_error(doc, "unknown label 'meltdown'");

  doc = hybrid_doc();
  doc["hybrid"]["rehome"] = {{"q0/q1", {{"y2", "y0"}}}};
  expect_parse_error(doc, "not of the form 'from->to'");

  doc = hybrid_doc();
  doc["hybrid"]["rehome"] = {{"q0->zz", {{"y2", "y0"}}}};
  expect_parse_error(doc, "unknown mode 'zz'");

  doc = hybrid_doc();
  doc["hybrid"]["initial"] = {{"mode", "q0"}};
  expect_parse_error(doc, "need exactly one of states, box");

  doc = hybrid_doc();
  doc["hybrid"]["initial"] = {
      {"mode", "q0"}, {"states", {"y0"}}, {"box", {{0.0, 1.0}}}};
  expect_parse_error(doc, "need exactly one of states, box");
}

TEST_CASE("ODE plants are confined to simulation") {
  json doc = hybrid_doc();
  doc["plants"]["clock"] = {
      {"type", "ode"},
      {"model", "social"},
      {"parameters",
       {{"Lambda", 0.02}, {"beta", 0.8}, {"delta1", 0.1}, {"delta2", 0.25}, {"delta3", 0.05}}},
      {"initial_state", {0.79, 0.2, 0.01}},
      {"horizon", 1.0},
      {"step", 0.01}};
  CHECK_NOTHROW(parse(doc));  // an unreferenced ODE plant is fine

  doc["hybrid"]["modes"][1]["plant"] = "clock";
  expect_parse_error(doc, "ODE plants cannot be abstracted");

  habs::OdePlantSpec ode;
  ode.model.kind = habs::OdeKind::social;
  CHECK_THROWS_AS(habs::abstract_plant(habs::PlantSpec{ode}, habs::AnalysisSpec{}),
                  std::invalid_argument);
}

TEST_CASE("file loading reports the path") {
  try {
    habs::load_model_file("/nonexistent/model.json");
    FAIL("expected load_model_file to throw");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("cannot open") != std::string::npos);
  }

  const std::string path = "bad_model_fixture.json";
  {
    std::ofstream out(path);
    out << "{\"version\": 7}";
  }
  try {
    habs::load_model_file(path);
    FAIL("expected load_model_file to throw");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("unsupported schema version") != std::string::npos);
    CHECK(msg.find(path) != std::string::npos);
  }
  std::remove(path.c_str());
}

TEST_CASE("single-plant fallback wraps the plant in mode q0") {
  const BuiltHybrid built = habs::build_hybrid(parse(lattice_doc()));

  CHECK(built.alphabet.modes == std::vector<std::string>{"q0"});
  // Labels are the abstraction's own outputs: the cell names.
  CHECK(built.alphabet.labels ==
        std::vector<std::string>{"c0_0", "c0_1", "c1_0", "c1_1"});
  CHECK(built.initial_states.empty());
  REQUIRE(built.has_geometry);

  const habs::TransitionSystem& ts = built.composed.ts;
  REQUIRE(ts.num_states() == 4);
  const StateId cell = ts.state_index("q0.c1_1");
  CHECK(ts.output(cell) == "q0,c1_1");

  // Geometry: centers at lower + (i + 0.5) * eps per axis.
  const auto& center = built.composed_centers[ts.state_index("q0.c0_1")];
  REQUIRE(center.size() == 2);
  CHECK(center[0] == doctest::Approx(0.5));
  CHECK(center[1] == doctest::Approx(0.5));
  const auto& corner = built.composed_centers[ts.state_index("q0.c1_0")];
  CHECK(corner[0] == doctest::Approx(1.5));
  CHECK(corner[1] == doctest::Approx(-0.5));
}

TEST_CASE("hybrid build composes guards, switches and rehoming") {
  const BuiltHybrid built = habs::build_hybrid(parse(hybrid_doc()));
  const habs::TransitionSystem& ts = built.composed.ts;

  CHECK(built.alphabet.modes == std::vector<std::string>{"q0", "q1"});
  CHECK(built.alphabet.labels == std::vector<std::string>{"ok", "alarm"});
  REQUIRE(ts.num_states() == 6);

  CHECK(ts.output(ts.state_index("q0.y0")) == "q0,ok");
  CHECK(ts.output(ts.state_index("q0.y2")) == "q0,alarm");
  CHECK(ts.output(ts.state_index("q1.y2")) == "q1,ok");

  // Urgent trip: the alarm state keeps only the switch edge, rehomed to y0.
  const StateId trip = ts.state_index("q0.y2");
  const auto succ = ts.successors(trip);
  REQUIRE(succ.size() == 1);
  CHECK(succ[0] == ts.state_index("q1.y0"));

  // Initial resolution.
  REQUIRE(built.initial_states.size() == 1);
  CHECK(built.initial_states[0] == ts.state_index("q0.y0"));

  // Slice geometry carries through composition.
  REQUIRE(built.has_geometry);
  CHECK(built.composed_centers[ts.state_index("q0.y1")][0] == doctest::Approx(1.5));
}

TEST_CASE("initial state resolution failures") {
  json doc = hybrid_doc();
  doc["hybrid"]["initial"] = {{"mode", "q0"}, {"states", {"y9"}}};
  CHECK_THROWS_WITH_AS(habs::build_hybrid(parse(doc)),
                       doctest::Contains("initial state 'y9'"), std::invalid_argument);

  doc = hybrid_doc();
  doc["hybrid"]["initial"] = {{"mode", "q0"}, {"box", {{10.0, 11.0}}}};
  CHECK_THROWS_WITH_AS(habs::build_hybrid(parse(doc)),
                       doctest::Contains("selects no abstract states"), std::invalid_argument);

  // A box over the first two slices picks exactly those cells.
  doc = hybrid_doc();
  doc["hybrid"]["initial"] = {{"mode", "q0"}, {"box", {{0.0, 2.0}}}};
  const BuiltHybrid built = habs::build_hybrid(parse(doc));
  REQUIRE(built.initial_states.size() == 2);
  const auto& ts = built.composed.ts;
  CHECK(std::find(built.initial_states.begin(), built.initial_states.end(),
                  ts.state_index("q0.y0")) != built.initial_states.end());
  CHECK(std::find(built.initial_states.begin(), built.initial_states.end(),
                  ts.state_index("q0.y1")) != built.initial_states.end());
}

TEST_CASE("box guards must be constant on every cell") {
  json doc = lattice_doc();
  doc["hybrid"] = {
      {"labels", {"lo", "hi"}},
      {"modes",
       {{{"name", "m"},
         {"plant", "tank"},
         {"guards",
          {{"boxes", {{{"label", "hi"}, {"box", {{1.0, 2.0}, {-1.0, 1.0}}}}}},
           {"default", "lo"}}}}}},
      {"h", json::array()}};
  const BuiltHybrid built = habs::build_hybrid(parse(doc));
  const auto& ts = built.composed.ts;
  CHECK(ts.output(ts.state_index("m.c0_0")) == "m,lo");
  CHECK(ts.output(ts.state_index("m.c1_0")) == "m,hi");
  CHECK(ts.output(ts.state_index("m.c1_1")) == "m,hi");

  // Shift the box so its edge lands inside the second column of cells.
  doc["hybrid"]["modes"][0]["guards"]["boxes"][0]["box"] = {{1.0, 1.5}, {-1.0, 1.0}};
  CHECK_THROWS_WITH_AS(habs::build_hybrid(parse(doc)),
                       doctest::Contains("cuts through cell"), std::invalid_argument);
}

TEST_CASE("budget errors carry the exceeded budget") {
  json doc = lattice_doc();
  doc["analysis"]["cell_budget"] = 2;  // the grid needs 4 cells
  CHECK_THROWS_AS(habs::build_hybrid(parse(doc)), habs::BudgetError);

  json win{{"version", 1},
           {"plants",
            {{"w", {{"type", "flat_alphabet"}, {"symbols", {"a", "b"}}, {"memory", 3}}}}},
           {"specs", {{"s", "G (q0,a)"}}},
           {"analysis", {{"window_budget", 4}}}};
  CHECK_THROWS_AS(habs::build_hybrid(parse(win)), habs::BudgetError);
  win["analysis"]["window_budget"] = 8;
  CHECK_NOTHROW(habs::build_hybrid(parse(win)));
}

TEST_CASE("assessment pipeline end to end") {
  const ModelFile mf = parse(hybrid_doc());

  habs::AssessmentReport bad = habs::assess(mf, "stays", 4);
  CHECK(bad.verdict == Verdict::vulnerable);
  CHECK(bad.bound == 4);
  CHECK(bad.spec_name == "stays");
  REQUIRE(bad.witness.size() == 5);
  CHECK(bad.witness.front().q == "q0");
  CHECK(std::any_of(bad.witness.begin(), bad.witness.end(),
                    [](const habs::WitnessStep& s) { return s.q == "q1"; }));
  CHECK(bad.states == 6);
  CHECK(bad.cnf_vars > 0);
  CHECK(bad.cnf_clauses > 0);

  // The witness replays in the composed abstraction.
  const BuiltHybrid built = habs::build_hybrid(mf);
  for (std::size_t i = 0; i + 1 < bad.witness.size(); ++i)
    CHECK(built.composed.ts.has_edge(
        built.composed.ts.state_index(bad.witness[i].abstract_state),
        built.composed.ts.state_index(bad.witness[i + 1].abstract_state)));

  // A bound too small to reach the trip is clean.
  habs::AssessmentReport ok = habs::assess(mf, "stays", 1);
  CHECK(ok.verdict == Verdict::not_vulnerable_at_bound);
  CHECK(ok.witness.empty());

  CHECK_THROWS_WITH_AS(habs::assess(mf, "ghost", 3), doctest::Contains("unknown spec"),
                       std::invalid_argument);
  CHECK_THROWS_AS(habs::assess(mf, "stays", 0), std::invalid_argument);
}

TEST_CASE("reports are deterministic and carry the documented fields") {
  const ModelFile mf = parse(hybrid_doc());
  const habs::AssessmentReport first = habs::assess(mf, "stays", 4);
  const habs::AssessmentReport second = habs::assess(mf, "stays", 4);

  const std::string text = habs::report_to_json(first, false);
  CHECK(text == habs::report_to_json(second, false));
  CHECK(text.back() == '\n');

  const json j = json::parse(text);
  CHECK(j.at("verdict") == "vulnerable");
  CHECK(j.at("bound") == 4);
  CHECK(j.at("spec") == "stays");
  CHECK(j.at("formula").get<std::string>().find("q1") != std::string::npos);
  CHECK(j.at("statistics").contains("cnf_vars"));
  CHECK(j.at("statistics").contains("states"));
  CHECK_FALSE(j.at("statistics").contains("solve_time_ms"));
  CHECK(json::parse(habs::report_to_json(first, true))
            .at("statistics")
            .contains("solve_time_ms"));
  REQUIRE(j.contains("witness"));
  CHECK(j.at("witness").at("steps").size() == 5);
  for (const auto& step : j.at("witness").at("steps")) {
    CHECK(step.contains("abstract_state"));
    CHECK(step.contains("q"));
    CHECK(step.contains("k"));
  }
  // Geometry is present for slice plants, flagged as non-validated.
  REQUIRE(j.contains("concretized_path"));
  CHECK(j.at("concretized_path").at("validated") == false);
  CHECK(j.at("concretized_path").at("points").size() == 5);
}

TEST_CASE("witness csv and concretization") {
  const ModelFile mf = parse(hybrid_doc());
  const habs::AssessmentReport report = habs::assess(mf, "stays", 4);

  const std::string csv = habs::witness_to_csv(report);
  REQUIRE(csv.rfind("step,q,k,abstract_state,loop_to\n", 0) == 0);
  const std::size_t rows = std::count(csv.begin(), csv.end(), '\n');
  CHECK(rows == report.witness.size() + 1);
  CHECK(csv.find("0,q0,") != std::string::npos);

  const auto points = habs::concretize_witness(report, mf);
  REQUIRE(points.size() == report.witness.size());
  const BuiltHybrid built = habs::build_hybrid(mf);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const StateId s = built.composed.ts.state_index(report.witness[i].abstract_state);
    CHECK(points[i] == built.composed_centers[s]);
  }

  const habs::AssessmentReport clean = habs::assess(mf, "stays", 1);
  CHECK_THROWS_WITH_AS(habs::concretize_witness(clean, mf),
                       doctest::Contains("carries no witness"), std::invalid_argument);
}
