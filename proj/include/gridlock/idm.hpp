#pragma once

namespace gridlock {

/// Constants folded out of the car-following parameters so the inner loops
/// touch only multiplications. Built once per simulation.
struct IdmCoefficients {
  double a;              // max acceleration, m/s^2
  double s0;             // jam gap, m
  double T;              // time headway, s
  double inv_v0;         // 1 / desired speed
  double inv_2_sqrt_ab;  // 1 / (2*sqrt(a*b))
};

/// Car-following model constants. Defaults reproduce highway traffic with a
/// 120 km/h desired speed.
struct IdmParams {
  double v0 = 120.0 / 3.6;  // desired speed, m/s
  double s0 = 2.0;          // minimum jam gap, m
  double T = 1.6;           // time headway, s
  double a = 0.73;          // max acceleration, m/s^2
  double b = 1.67;          // comfortable deceleration, m/s^2
  double d = 7.0;           // effective vehicle length, m

  /// Throws DomainError unless every field is strictly positive.
  void validate() const;

  IdmCoefficients coefficients() const;
};

/// Single-vehicle acceleration: a * [1 - (v/v0)^4 - (s*/gap)^2] with the
/// dynamic desired gap s* = max(s0, s0 + v*T + v*dv / (2*sqrt(a*b))).
/// `dv` is the approach rate to the leader (own speed minus leader speed),
/// `gap` the bumper-to-bumper distance. The s0 floor keeps s* meaningful
/// when dv is strongly negative.
inline double idm_acceleration_unchecked(double v, double dv, double gap,
                                         const IdmCoefficients& k) {
  double s_star = k.s0 + v * k.T + (v * dv) * k.inv_2_sqrt_ab;
  if (s_star < k.s0) s_star = k.s0;
  const double vr = v * k.inv_v0;
  const double vr2 = vr * vr;
  const double vr4 = vr2 * vr2;
  const double sr = s_star / gap;
  return k.a * (1.0 - vr4 - sr * sr);
}

/// Checked variant; throws DomainError for gap <= 0 or v < 0.
double idm_acceleration(double v, double dv, double gap, const IdmParams& params);

/// Steady-state speed for vehicles at equal center-to-center `spacing_m`
/// with zero approach rate; 0 when the bumper gap is at or below s0.
/// Solved by bisection, never exceeds v0.
double equilibrium_speed(double spacing_m, const IdmParams& params);

}  // namespace gridlock
