#pragma once

#include <map>
#include <string>
#include <vector>

namespace habs {

enum class OdeKind { social, circadian };

/// Named ODE plant. The social model states are P, M, E with constant inflow
/// Lambda; the circadian model states are MP, P0, P1, P2, C, CN with a
/// constant transcription input vsp. The two circadian switches select the
/// documented alternative readings of equations 3 and 6; both default off.
struct OdeModel {
  OdeKind kind = OdeKind::social;
  std::map<std::string, double> params;
  std::vector<double> initial_state;
  double horizon = 1.0;
  double step = 0.01;
  bool eq3_numerator_p0 = false;  // circadian eq 3: V3P term numerator P0 instead of P1
  bool eq6_decay_on_cn = false;   // circadian eq 6: final decay -kdn*CN instead of -kdc*C
};

const std::vector<std::string>& ode_state_names(OdeKind kind);

/// Required parameter names for the model (kdn joins the circadian set only
/// when eq6_decay_on_cn is set).
std::vector<std::string> ode_param_names(const OdeModel& model);

/// Throws std::invalid_argument on missing/unknown/non-finite/negative
/// parameters or a malformed initial state.
void validate_ode(const OdeModel& model);

std::vector<double> ode_rhs(const OdeModel& model, const std::vector<double>& x);

struct Trajectory {
  std::vector<std::string> columns;  // state names, excluding time
  double dt = 0.0;
  std::vector<double> times;
  std::vector<std::vector<double>> rows;  // one state vector per time
};

/// Classic fixed-step 4th-order Runge-Kutta over [0, horizon]. Throws
/// std::runtime_error with a time stamp if the state leaves the finite range.
Trajectory simulate_ode(const OdeModel& model);

/// Header "time,<col>,..."; one row per sample; '\n' endings.
std::string trajectory_to_csv(const Trajectory& traj);

/// Parses the CSV format above; requires a uniform time grid.
Trajectory trajectory_from_csv(const std::string& text);

}  // namespace habs
