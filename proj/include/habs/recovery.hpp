#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "habs/ode.hpp"

namespace habs {

/// A time series aligned to a sample grid: v[t] belongs to grid index
/// first + t. Derivative estimation trims two samples per side, so recovered
/// quantities carry growing offsets.
struct Series {
  std::size_t first = 0;
  std::vector<double> v;
  std::size_t last() const { return first + v.size() - 1; }  // inclusive
};

/// 4th-order central difference of f on a uniform grid with spacing dt.
Series derivative4(const Series& f, double dt);

struct SocialRecovery {
  Series M, P, Lambda;
};

/// Inverts the social model along its flat output E:
/// M from the E equation, P from the M equation, Lambda from the P equation.
/// Throws SingularityError when an inversion denominator falls below
/// denom_tol in magnitude.
SocialRecovery recover_social(const std::vector<double>& E, double dt,
                              const std::map<std::string, double>& params,
                              double denom_tol = 1e-9);

struct CircadianRecovery {
  Series C, P2, P1, P0, MP, vsp;
};

/// Inverts the circadian model up the chain from its flat output CN:
/// C from equation 6, P2 as the nonnegative root of the equation-5 quadratic,
/// P1 and P0 from the Michaelis-Menten residuals of equations 4 and 3, MP
/// from equation 2, and the input vsp from equation 1. Honors the model's
/// eq6 decay switch; the eq3 P0-numerator variant has no closed-form chain
/// inversion and is rejected. Throws SingularityError naming the equation
/// when a guard fails (residual outside its admissible interval, negative
/// radicand, or a denominator below denom_tol).
CircadianRecovery recover_circadian(const std::vector<double>& CN, double dt,
                                    const OdeModel& model, double denom_tol = 1e-9);

}  // namespace habs
