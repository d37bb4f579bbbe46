#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "habs/assess.hpp"
#include "habs/errors.hpp"
#include "habs/recovery.hpp"

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

std::uint64_t parse_env_u64(const char* text, const char* name) {
  char* end = nullptr;
  const unsigned long long value = std::strtoull(text, &end, 10);
  if (end == text || *end != '\0')
    throw std::invalid_argument(std::string(name) + " must be a non-negative integer, got '" +
                                text + "'");
  return value;
}

void apply_env_overrides(habs::AnalysisSpec& analysis) {
  if (const char* s = std::getenv("HABS_CELL_BUDGET"))
    analysis.cell_budget = parse_env_u64(s, "HABS_CELL_BUDGET");
  if (const char* s = std::getenv("HABS_WINDOW_BUDGET"))
    analysis.window_budget = parse_env_u64(s, "HABS_WINDOW_BUDGET");
  if (const char* s = std::getenv("HABS_SAT_MAX_CONFLICTS"))
    analysis.max_conflicts = parse_env_u64(s, "HABS_SAT_MAX_CONFLICTS");
}

habs::ModelFile load(const std::string& path) {
  habs::ModelFile mf = habs::load_model_file(path);
  apply_env_overrides(mf.analysis);
  return mf;
}

const char* verdict_name(habs::Verdict v) {
  switch (v) {
    case habs::Verdict::vulnerable:
      return "vulnerable";
    case habs::Verdict::not_vulnerable_at_bound:
      return "not-vulnerable-at-bound";
    default:
      return "timeout";
  }
}

int verdict_exit_code(habs::Verdict v) {
  switch (v) {
    case habs::Verdict::vulnerable:
      return 1;
    case habs::Verdict::not_vulnerable_at_bound:
      return 0;
    default:
      return 3;
  }
}

int run_abstract(const std::string& model_path, const std::string& dot_path,
                 const std::string& json_path) {
  const habs::ModelFile mf = load(model_path);
  const habs::BuiltHybrid built = habs::build_hybrid(mf);
  if (!dot_path.empty()) write_file(dot_path, habs::to_dot(built.composed.ts));
  if (!json_path.empty()) write_file(json_path, habs::to_json(built.composed.ts));
  std::cout << "abstraction: " << built.composed.ts.num_states() << " states, "
            << built.composed.ts.num_edges() << " edges, " << built.model.modes.size()
            << " mode(s), " << built.model.labels.size() << " guard label(s)\n";
  return 0;
}

int run_check(const std::string& model_path, const std::string& spec_name, std::uint32_t bound,
              const std::string& dimacs_path) {
  const habs::ModelFile mf = load(model_path);
  const auto it = mf.specs.find(spec_name);
  if (it == mf.specs.end()) throw std::invalid_argument("unknown spec '" + spec_name + "'");
  if (bound == 0) bound = mf.analysis.bound;

  const habs::BuiltHybrid built = habs::build_hybrid(mf);
  const habs::LtlPtr phi = habs::parse_ltl(it->second, built.alphabet);
  const habs::BmcEncoding enc =
      habs::encode_bmc(built.composed.ts, phi, built.alphabet, bound, built.initial_states);
  if (!dimacs_path.empty()) write_file(dimacs_path, habs::dimacs_export(enc.cnf));

  habs::SatOptions opts;
  opts.max_conflicts = mf.analysis.max_conflicts;
  const habs::SatResult sat = habs::sat_solve(enc.cnf, opts);
  std::cout << "encoding: " << enc.cnf.num_vars << " vars, " << enc.cnf.clauses.size()
            << " clauses (bound " << bound << ")\n";
  if (sat.status == habs::SatStatus::cap_exceeded) {
    std::cout << "timeout: conflict cap exceeded after " << sat.conflicts << " conflicts\n";
    return 3;
  }
  if (sat.status == habs::SatStatus::unsatisfiable) {
    std::cout << "not-vulnerable-at-bound\n";
    return 0;
  }
  const habs::Trace trace = habs::decode_witness(enc, sat.assignment, built.composed.ts);
  const auto path = habs::decode_state_path(enc, sat.assignment);
  std::cout << "vulnerable; witness:";
  for (habs::StateId q : path) std::cout << " " << built.composed.ts.state_name(q);
  if (trace.loop_back) std::cout << " (loops to step " << *trace.loop_back << ")";
  std::cout << "\n";
  return 1;
}

int run_assess(const std::string& model_path, const std::string& spec_name, std::uint32_t bound,
               std::uint32_t bound_max, const std::string& report_path,
               const std::string& trace_path, bool no_timing) {
  const habs::ModelFile mf = load(model_path);
  if (bound == 0) bound = mf.analysis.bound;
  if (bound_max != 0 && bound_max < bound)
    throw std::invalid_argument("--bound-max must be at least --bound");

  habs::AssessmentReport rep = habs::assess(mf, spec_name, bound);
  for (std::uint32_t k = bound + 1;
       rep.verdict == habs::Verdict::not_vulnerable_at_bound && k <= bound_max; ++k)
    rep = habs::assess(mf, spec_name, k);

  const std::string report_json = habs::report_to_json(rep, !no_timing);
  if (report_path.empty()) {
    std::cout << report_json;
  } else {
    write_file(report_path, report_json);
    std::cout << verdict_name(rep.verdict) << " (bound " << rep.bound << "); report written to "
              << report_path << "\n";
  }
  if (!trace_path.empty()) write_file(trace_path, habs::witness_to_csv(rep));
  return verdict_exit_code(rep.verdict);
}

const habs::OdeModel& ode_plant(const habs::ModelFile& mf, const std::string& name) {
  const auto it = mf.plants.find(name);
  if (it == mf.plants.end()) throw std::invalid_argument("unknown plant '" + name + "'");
  const auto* ode = std::get_if<habs::OdePlantSpec>(&it->second);
  if (!ode) throw std::invalid_argument("plant '" + name + "' is not an ODE plant");
  return ode->model;
}

int run_simulate(const std::string& model_path, const std::string& plant_name,
                 const std::string& csv_path) {
  const habs::ModelFile mf = load(model_path);
  const habs::Trajectory traj = habs::simulate_ode(ode_plant(mf, plant_name));
  const std::string csv = habs::trajectory_to_csv(traj);
  if (csv_path.empty())
    std::cout << csv;
  else {
    write_file(csv_path, csv);
    std::cout << "wrote " << traj.times.size() << " samples to " << csv_path << "\n";
  }
  return 0;
}

std::vector<double> column_of(const habs::Trajectory& traj, const std::string& name) {
  for (std::size_t c = 0; c < traj.columns.size(); ++c)
    if (traj.columns[c] == name) {
      std::vector<double> out;
      for (const auto& row : traj.rows) out.push_back(row[c]);
      return out;
    }
  throw std::invalid_argument("input trajectory has no '" + name + "' column");
}

std::string series_csv(const habs::Trajectory& traj,
                       const std::vector<std::pair<std::string, const habs::Series*>>& series) {
  std::size_t lo = 0, hi = traj.times.size() - 1;
  for (const auto& [name, s] : series) {
    lo = std::max(lo, s->first);
    hi = std::min(hi, s->last());
  }
  std::ostringstream out;
  out << std::setprecision(17);
  out << "time";
  for (const auto& [name, s] : series) out << "," << name;
  out << "\n";
  for (std::size_t t = lo; t <= hi; ++t) {
    out << traj.times[t];
    for (const auto& [name, s] : series) out << "," << s->v[t - s->first];
    out << "\n";
  }
  return out.str();
}

int run_recover(const std::string& model_path, const std::string& plant_name,
                const std::string& input_path, const std::string& csv_path) {
  const habs::ModelFile mf = load(model_path);
  const habs::OdeModel& model = ode_plant(mf, plant_name);

  std::ifstream in(input_path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open '" + input_path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const habs::Trajectory traj = habs::trajectory_from_csv(buffer.str());

  std::string csv;
  if (model.kind == habs::OdeKind::social) {
    const habs::SocialRecovery rec =
        habs::recover_social(column_of(traj, "E"), traj.dt, model.params);
    csv = series_csv(traj, {{"M", &rec.M}, {"P", &rec.P}, {"Lambda", &rec.Lambda}});
  } else {
    const habs::CircadianRecovery rec =
        habs::recover_circadian(column_of(traj, "CN"), traj.dt, model);
    csv = series_csv(traj, {{"C", &rec.C},
                            {"P2", &rec.P2},
                            {"P1", &rec.P1},
                            {"P0", &rec.P0},
                            {"MP", &rec.MP},
                            {"vsp", &rec.vsp}});
  }
  if (csv_path.empty())
    std::cout << csv;
  else {
    write_file(csv_path, csv);
    std::cout << "wrote recovered series to " << csv_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lattice/flat abstraction, LTL bounded model checking and flatness recovery "
               "for hybrid dynamical systems"};
  app.require_subcommand(1);

  std::string model_path, spec_name, plant_name, input_path;
  std::string dot_path, json_path, dimacs_path, report_path, trace_path, csv_path;
  std::uint32_t bound = 0, bound_max = 0;
  bool no_timing = false;

  CLI::App* cmd_abstract = app.add_subcommand("abstract", "build and export the abstraction");
  cmd_abstract->add_option("model", model_path, "model JSON file")->required();
  cmd_abstract->add_option("--dot", dot_path, "write Graphviz DOT here");
  cmd_abstract->add_option("--json", json_path, "write transition-system JSON here");

  CLI::App* cmd_check = app.add_subcommand("check", "encode one spec and run the SAT search");
  cmd_check->add_option("model", model_path, "model JSON file")->required();
  cmd_check->add_option("--spec", spec_name, "spec name from the model's specs section")
      ->required();
  cmd_check->add_option("--bound", bound, "unrolling bound k (default: analysis.bound)");
  cmd_check->add_option("--dimacs", dimacs_path, "write the CNF in DIMACS format here");

  CLI::App* cmd_assess = app.add_subcommand("assess", "full vulnerability assessment pipeline");
  cmd_assess->add_option("model", model_path, "model JSON file")->required();
  cmd_assess->add_option("--spec", spec_name, "spec name from the model's specs section")
      ->required();
  cmd_assess->add_option("--bound", bound, "unrolling bound k (default: analysis.bound)");
  cmd_assess->add_option("--bound-max", bound_max,
                         "iterative deepening: retry up to this bound while not vulnerable");
  cmd_assess->add_option("--report", report_path, "write the report JSON here (default: stdout)");
  cmd_assess->add_option("--trace", trace_path, "write the witness CSV here");
  cmd_assess->add_flag("--no-timing", no_timing, "omit solve time from the report");

  CLI::App* cmd_simulate = app.add_subcommand("simulate", "integrate an ODE plant");
  cmd_simulate->add_option("model", model_path, "model JSON file")->required();
  cmd_simulate->add_option("--plant", plant_name, "ODE plant name")->required();
  cmd_simulate->add_option("--csv", csv_path, "write the trajectory CSV here (default: stdout)");

  CLI::App* cmd_recover = app.add_subcommand(
      "recover", "recover hidden states and input from a flat-output trajectory");
  cmd_recover->add_option("model", model_path, "model JSON file")->required();
  cmd_recover->add_option("--plant", plant_name, "ODE plant name")->required();
  cmd_recover->add_option("--input", input_path, "trajectory CSV with the flat output column")
      ->required();
  cmd_recover->add_option("--csv", csv_path, "write the recovered CSV here (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(cmd_abstract)) return run_abstract(model_path, dot_path, json_path);
    if (app.got_subcommand(cmd_check)) return run_check(model_path, spec_name, bound, dimacs_path);
    if (app.got_subcommand(cmd_assess))
      return run_assess(model_path, spec_name, bound, bound_max, report_path, trace_path,
                        no_timing);
    if (app.got_subcommand(cmd_simulate)) return run_simulate(model_path, plant_name, csv_path);
    if (app.got_subcommand(cmd_recover))
      return run_recover(model_path, plant_name, input_path, csv_path);
  } catch (const habs::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
