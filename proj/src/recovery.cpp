#include "habs/recovery.hpp"

#include <cmath>
#include <stdexcept>

#include "habs/errors.hpp"

namespace habs {

Series derivative4(const Series& f, double dt) {
  if (f.v.size() < 5) throw std::invalid_argument("need at least 5 samples per derivative");
  if (!(dt > 0)) throw std::invalid_argument("dt must be positive");
  Series d;
  d.first = f.first + 2;
  d.v.resize(f.v.size() - 4);
  for (std::size_t t = 2; t + 2 < f.v.size(); ++t)
    d.v[t - 2] = (-f.v[t + 2] + 8.0 * f.v[t + 1] - 8.0 * f.v[t - 1] + f.v[t - 2]) / (12.0 * dt);
  return d;
}

namespace {

// Sample of a wider-or-equal series at absolute grid index t.
double at(const Series& s, std::size_t t) { return s.v[t - s.first]; }

void check_denom(double denom, double tol, const char* equation) {
  if (std::abs(denom) < tol)
    throw SingularityError(equation, "denominator magnitude " + std::to_string(std::abs(denom)) +
                                         " below tolerance");
}

}  // namespace

SocialRecovery recover_social(const std::vector<double>& E, double dt,
                              const std::map<std::string, double>& params, double denom_tol) {
  OdeModel probe;
  probe.kind = OdeKind::social;
  probe.params = params;
  probe.initial_state = {0, 0, 0};
  probe.horizon = 1;
  probe.step = 0.5;
  validate_ode(probe);
  const double beta = params.at("beta");
  const double d1 = params.at("delta1"), d2 = params.at("delta2"), d3 = params.at("delta3");

  Series e{0, E};
  auto de = derivative4(e, dt);

  SocialRecovery out;
  out.M.first = de.first;
  out.M.v.resize(de.v.size());
  for (std::size_t t = de.first; t <= de.last(); ++t) {
    const double denom = d2 * at(e, t) + d3;
    check_denom(denom, denom_tol, "equation 3");
    out.M.v[t - out.M.first] = (at(de, t) + d1 * at(e, t)) / denom;
  }

  auto dm = derivative4(out.M, dt);
  out.P.first = dm.first;
  out.P.v.resize(dm.v.size());
  for (std::size_t t = dm.first; t <= dm.last(); ++t) {
    const double m = at(out.M, t);
    const double denom = beta * m;
    check_denom(denom, denom_tol, "equation 2");
    out.P.v[t - out.P.first] = (at(dm, t) + d2 * m * at(e, t) + d3 * m) / denom;
  }

  auto dp = derivative4(out.P, dt);
  out.Lambda.first = dp.first;
  out.Lambda.v.resize(dp.v.size());
  for (std::size_t t = dp.first; t <= dp.last(); ++t)
    out.Lambda.v[t - out.Lambda.first] =
        at(dp, t) + beta * at(out.P, t) * at(out.M, t) - d1 * at(e, t);
  return out;
}

CircadianRecovery recover_circadian(const std::vector<double>& CN, double dt,
                                    const OdeModel& model, double denom_tol) {
  if (model.kind != OdeKind::circadian)
    throw std::invalid_argument("recover_circadian needs a circadian model");
  if (model.eq3_numerator_p0)
    throw std::invalid_argument(
        "the eq3 P0-numerator variant has no closed-form chain inversion; "
        "recovery supports the default reading only");
  validate_ode(model);
  const auto& p = model.params;
  auto P = [&](const char* name) { return p.at(name); };
  const double kd = P("kd"), k1 = P("k1"), k2 = P("k2"), k3 = P("k3"), k4 = P("k4");
  const double kdc = P("kdc");

  Series cn{0, CN};
  auto dcn = derivative4(cn, dt);

  CircadianRecovery out;

  // Equation 6: dCN = k1*C - k2*CN - kdc*C (or -kdn*CN under the switch).
  out.C.first = dcn.first;
  out.C.v.resize(dcn.v.size());
  if (model.eq6_decay_on_cn) {
    const double kdn = P("kdn");
    check_denom(k1, denom_tol, "equation 6");
    for (std::size_t t = dcn.first; t <= dcn.last(); ++t)
      out.C.v[t - out.C.first] = (at(dcn, t) + (k2 + kdn) * at(cn, t)) / k1;
  } else {
    check_denom(k1 - kdc, denom_tol, "equation 6");
    for (std::size_t t = dcn.first; t <= dcn.last(); ++t)
      out.C.v[t - out.C.first] = (at(dcn, t) + k2 * at(cn, t)) / (k1 - kdc);
  }

  // Equation 5: dC = k3*P2^2 - (k4 + k1 + kdc)*C + k2*CN.
  auto dc = derivative4(out.C, dt);
  check_denom(k3, denom_tol, "equation 5");
  out.P2.first = dc.first;
  out.P2.v.resize(dc.v.size());
  for (std::size_t t = dc.first; t <= dc.last(); ++t) {
    const double radicand = (at(dc, t) + (k4 + k1 + kdc) * at(out.C, t) - k2 * at(cn, t)) / k3;
    if (radicand < 0) throw SingularityError("equation 5", "negative radicand");
    out.P2.v[t - out.P2.first] = std::sqrt(radicand);
  }

  auto residual_invert = [&](const Series& R, double V, double K,
                             const char* equation) -> Series {
    Series s;
    s.first = R.first;
    s.v.resize(R.v.size());
    for (std::size_t i = 0; i < R.v.size(); ++i) {
      const double r = R.v[i];
      if (!(r > denom_tol) || !(r < V - denom_tol))
        throw SingularityError(equation, "saturation residual outside (0, V)");
      s.v[i] = r * K / (V - r);
    }
    return s;
  };
  auto mm = [&](double V, double K, double x, const char* equation) {
    check_denom(K + x, denom_tol, equation);
    return V * x / (K + x);
  };

  // Equation 4 residual: V3P*P1/(K3P+P1) isolated from dP2.
  auto dp2 = derivative4(out.P2, dt);
  Series r4;
  r4.first = dp2.first;
  r4.v.resize(dp2.v.size());
  for (std::size_t t = dp2.first; t <= dp2.last(); ++t) {
    const double p2 = at(out.P2, t);
    r4.v[t - r4.first] = at(dp2, t) + mm(P("V4P"), P("K4P"), p2, "equation 4") + k3 * p2 * p2 -
                         k4 * at(out.C, t) + mm(P("vdp"), P("Kdp"), p2, "equation 4") + kd * p2;
  }
  out.P1 = residual_invert(r4, P("V3P"), P("K3P"), "equation 4");

  // Equation 3 residual: V1P*P0/(K1P+P0) isolated from dP1.
  auto dp1 = derivative4(out.P1, dt);
  Series r3;
  r3.first = dp1.first;
  r3.v.resize(dp1.v.size());
  for (std::size_t t = dp1.first; t <= dp1.last(); ++t) {
    const double p1 = at(out.P1, t);
    r3.v[t - r3.first] = at(dp1, t) + mm(P("V2P"), P("K2P"), p1, "equation 3") +
                         mm(P("V3P"), P("K3P"), p1, "equation 3") -
                         mm(P("V4P"), P("K4P"), at(out.P2, t), "equation 3") + kd * p1;
  }
  out.P0 = residual_invert(r3, P("V1P"), P("K1P"), "equation 3");

  // Equation 2: dP0 = ksp*MP - V1P*P0/(K1P+P0) + V2P*P1/(K2P+P1) - kd*P0.
  auto dp0 = derivative4(out.P0, dt);
  check_denom(P("ksp"), denom_tol, "equation 2");
  out.MP.first = dp0.first;
  out.MP.v.resize(dp0.v.size());
  for (std::size_t t = dp0.first; t <= dp0.last(); ++t) {
    const double p0 = at(out.P0, t);
    out.MP.v[t - out.MP.first] =
        (at(dp0, t) + mm(P("V1P"), P("K1P"), p0, "equation 2") -
         mm(P("V2P"), P("K2P"), at(out.P1, t), "equation 2") + kd * p0) /
        P("ksp");
  }

  // Equation 1: vsp = (dMP + vmp*MP/(Kmp+MP) + kd*MP) * (KIP^n + CN^n)/KIP^n.
  auto dmp = derivative4(out.MP, dt);
  const double kipn = std::pow(P("KIP"), P("n"));
  check_denom(kipn, denom_tol, "equation 1");
  out.vsp.first = dmp.first;
  out.vsp.v.resize(dmp.v.size());
  for (std::size_t t = dmp.first; t <= dmp.last(); ++t) {
    const double mp = at(out.MP, t);
    out.vsp.v[t - out.vsp.first] =
        (at(dmp, t) + mm(P("vmp"), P("Kmp"), mp, "equation 1") + kd * mp) *
        (kipn + std::pow(at(cn, t), P("n"))) / kipn;
  }
  return out;
}

}  // namespace habs
