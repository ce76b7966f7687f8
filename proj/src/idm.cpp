#include "gridlock/idm.hpp"

#include <cmath>
#include <string>

#include "gridlock/errors.hpp"

namespace gridlock {

void IdmParams::validate() const {
  auto positive = [](double value, const char* name) {
    if (!(value > 0.0)) {
      throw DomainError(std::string("IDM parameter ") + name + " must be > 0");
    }
  };
  positive(v0, "v0");
  positive(s0, "s0");
  positive(T, "T");
  positive(a, "a");
  positive(b, "b");
  positive(d, "d");
}

IdmCoefficients IdmParams::coefficients() const {
  return IdmCoefficients{a, s0, T, 1.0 / v0, 1.0 / (2.0 * std::sqrt(a * b))};
}

double idm_acceleration(double v, double dv, double gap, const IdmParams& params) {
  params.validate();
  if (!(gap > 0.0)) throw DomainError("idm_acceleration: gap must be > 0");
  if (!(v >= 0.0)) throw DomainError("idm_acceleration: v must be >= 0");
  return idm_acceleration_unchecked(v, dv, gap, params.coefficients());
}

double equilibrium_speed(double spacing_m, const IdmParams& params) {
  params.validate();
  if (!(spacing_m > 0.0)) throw DomainError("equilibrium_speed: spacing must be > 0");
  const double gap = spacing_m - params.d;
  if (gap <= params.s0) return 0.0;

  // f(v) = 1 - (v/v0)^4 - ((s0 + v*T)/gap)^2 is strictly decreasing.
  auto f = [&](double v) {
    const double vr = v / params.v0;
    const double sr = (params.s0 + v * params.T) / gap;
    return 1.0 - vr * vr * vr * vr - sr * sr;
  };
  if (f(0.0) <= 0.0) return 0.0;
  double lo = 0.0;
  double hi = params.v0;
  for (int i = 0; i < 200 && hi - lo > 1e-13 * params.v0; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace gridlock
