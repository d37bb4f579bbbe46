#include "habs/ode.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

namespace habs {

const std::vector<std::string>& ode_state_names(OdeKind kind) {
  static const std::vector<std::string> social = {"P", "M", "E"};
  static const std::vector<std::string> circadian = {"MP", "P0", "P1", "P2", "C", "CN"};
  return kind == OdeKind::social ? social : circadian;
}

std::vector<std::string> ode_param_names(const OdeModel& model) {
  if (model.kind == OdeKind::social) return {"Lambda", "beta", "delta1", "delta2", "delta3"};
  std::vector<std::string> names = {"vsp", "vmp", "Kmp", "KIP", "n",   "kd",  "ksp", "V1P",
                                    "K1P", "V2P", "K2P", "V3P", "K3P", "V4P", "K4P", "k3",
                                    "k4",  "vdp", "Kdp", "k1",  "k2",  "kdc"};
  if (model.eq6_decay_on_cn) names.push_back("kdn");
  return names;
}

void validate_ode(const OdeModel& model) {
  auto required = ode_param_names(model);
  std::set<std::string> allowed(required.begin(), required.end());
  for (const auto& [name, value] : model.params) {
    if (!allowed.count(name)) throw std::invalid_argument("unknown parameter: " + name);
    if (!std::isfinite(value) || value < 0)
      throw std::invalid_argument("parameter " + name + " must be finite and non-negative");
  }
  for (const auto& name : required)
    if (!model.params.count(name)) throw std::invalid_argument("missing parameter: " + name);
  if (model.kind == OdeKind::social && model.eq3_numerator_p0)
    throw std::invalid_argument("eq3 switch applies to the circadian model only");
  if (model.kind == OdeKind::social && model.eq6_decay_on_cn)
    throw std::invalid_argument("eq6 switch applies to the circadian model only");

  const auto& names = ode_state_names(model.kind);
  if (model.initial_state.size() != names.size())
    throw std::invalid_argument("initial state must have " + std::to_string(names.size()) +
                                " entries");
  for (double v : model.initial_state)
    if (!std::isfinite(v)) throw std::invalid_argument("initial state must be finite");
  if (!(model.step > 0) || !std::isfinite(model.step) || !(model.horizon > model.step))
    throw std::invalid_argument("need 0 < step < horizon");
}

namespace {

double mm(double V, double K, double x) { return V * x / (K + x); }

}  // namespace

std::vector<double> ode_rhs(const OdeModel& model, const std::vector<double>& x) {
  const auto& p = model.params;
  auto P = [&](const char* name) { return p.at(name); };

  if (model.kind == OdeKind::social) {
    const double Lam = P("Lambda"), beta = P("beta");
    const double d1 = P("delta1"), d2 = P("delta2"), d3 = P("delta3");
    const double Pp = x[0], M = x[1], E = x[2];
    return {Lam - beta * Pp * M + d1 * E,
            beta * Pp * M - d2 * M * E - d3 * M,
            d2 * M * E + d3 * M - d1 * E};
  }

  const double MP = x[0], P0 = x[1], P1 = x[2], P2 = x[3], C = x[4], CN = x[5];
  const double kd = P("kd"), k3 = P("k3"), k4 = P("k4"), k1 = P("k1"), k2 = P("k2");
  const double kdc = P("kdc");
  const double kipn = std::pow(P("KIP"), P("n"));
  const double cnn = std::pow(CN, P("n"));
  const double eq3_num = model.eq3_numerator_p0 ? P0 : P1;
  const double cn_decay = model.eq6_decay_on_cn ? P("kdn") * CN : kdc * C;
  return {
      P("vsp") * kipn / (kipn + cnn) - mm(P("vmp"), P("Kmp"), MP) - kd * MP,
      P("ksp") * MP - mm(P("V1P"), P("K1P"), P0) + mm(P("V2P"), P("K2P"), P1) - kd * P0,
      mm(P("V1P"), P("K1P"), P0) - mm(P("V2P"), P("K2P"), P1) -
          P("V3P") * eq3_num / (P("K3P") + P1) + mm(P("V4P"), P("K4P"), P2) - kd * P1,
      P("V3P") * eq3_num / (P("K3P") + P1) - mm(P("V4P"), P("K4P"), P2) - k3 * P2 * P2 + k4 * C -
          mm(P("vdp"), P("Kdp"), P2) - kd * P2,
      k3 * P2 * P2 - k4 * C - k1 * C + k2 * CN - kdc * C,
      k1 * C - k2 * CN - cn_decay,
  };
}

Trajectory simulate_ode(const OdeModel& model) {
  validate_ode(model);
  const auto n = model.initial_state.size();
  const double h = model.step;
  const auto steps = static_cast<std::size_t>(std::llround(model.horizon / h));

  Trajectory traj;
  traj.columns = ode_state_names(model.kind);
  traj.dt = h;
  traj.times.reserve(steps + 1);
  traj.rows.reserve(steps + 1);

  std::vector<double> x = model.initial_state;
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  for (std::size_t step = 0;; ++step) {
    for (double v : x)
      if (!std::isfinite(v)) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6g", step * h);
        throw std::runtime_error(std::string("state became non-finite at t=") + buf);
      }
    traj.times.push_back(step * h);
    traj.rows.push_back(x);
    if (step == steps) break;

    k1 = ode_rhs(model, x);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    k2 = ode_rhs(model, tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    k3 = ode_rhs(model, tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
    k4 = ode_rhs(model, tmp);
    for (std::size_t i = 0; i < n; ++i)
      x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return traj;
}

std::string trajectory_to_csv(const Trajectory& traj) {
  std::ostringstream os;
  os.precision(17);
  os << "time";
  for (const auto& c : traj.columns) os << ',' << c;
  os << '\n';
  for (std::size_t r = 0; r < traj.rows.size(); ++r) {
    os << traj.times[r];
    for (double v : traj.rows[r]) os << ',' << v;
    os << '\n';
  }
  return os.str();
}

Trajectory trajectory_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("empty trajectory CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  Trajectory traj;
  {
    std::istringstream header(line);
    std::string field;
    bool first = true;
    while (std::getline(header, field, ',')) {
      if (first) {
        if (field != "time") throw std::invalid_argument("first CSV column must be 'time'");
        first = false;
      } else {
        traj.columns.push_back(field);
      }
    }
    if (first || traj.columns.empty())
      throw std::invalid_argument("trajectory CSV needs time plus at least one column");
  }

  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::vector<double> values;
    while (std::getline(row, field, ',')) {
      std::size_t used = 0;
      double v;
      try {
        v = std::stod(field, &used);
      } catch (const std::exception&) {
        throw std::invalid_argument("bad number on CSV line " + std::to_string(line_no));
      }
      if (used != field.size())
        throw std::invalid_argument("bad number on CSV line " + std::to_string(line_no));
      values.push_back(v);
    }
    if (values.size() != traj.columns.size() + 1)
      throw std::invalid_argument("wrong field count on CSV line " + std::to_string(line_no));
    traj.times.push_back(values[0]);
    traj.rows.push_back({values.begin() + 1, values.end()});
  }
  if (traj.times.size() < 2) throw std::invalid_argument("trajectory needs at least two samples");

  traj.dt = traj.times[1] - traj.times[0];
  if (!(traj.dt > 0)) throw std::invalid_argument("time column must increase");
  for (std::size_t r = 1; r < traj.times.size(); ++r) {
    double dt = traj.times[r] - traj.times[r - 1];
    if (std::abs(dt - traj.dt) > 1e-9 * std::max(1.0, std::abs(traj.dt)))
      throw std::invalid_argument("time grid must be uniform");
  }
  return traj;
}

}  // namespace habs
