#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "gridlock/idm.hpp"
#include "gridlock/rng.hpp"

namespace gridlock {

enum class VehicleStatus : std::uint8_t { kActive = 0, kCompromised = 1 };

/// Copy-out view of one vehicle; the simulator stores lanes as
/// structure-of-arrays internally.
struct Vehicle {
  int id;
  int lane;
  double x;       // position along the ring, m, in [0, L)
  double v;       // m/s, >= 0
  VehicleStatus status;
};

/// Lane-change decision constants. r_threshold is the per-step attempt
/// probability; b_safe caps the deceleration a change may impose on the new
/// follower.
struct MobilParams {
  double politeness = 1.0;
  double r_threshold = 0.5;
  double b_safe = 4.0;  // m/s^2

  void validate() const;
};

struct RoadConfig {
  double length_m = 1000.0;
  int lanes = 3;
  double dt = 0.1;            // s
  int settle_steps = 1000;    // steps simulated before the hack
  std::uint64_t seed = 0;

  // Experiment defaults; echoed into every run manifest.
  double posthack_horizon_s = 1000.0;
  double flux_window_s = 200.0;
  double zero_flux_threshold = 10.0;  // veh/hr/lane

  void validate() const;
};

/// Vehicles of one lane ordered by increasing x. Parallel arrays feed the
/// batch acceleration kernel directly.
struct LaneVehicles {
  std::vector<double> x;
  std::vector<double> v;
  std::vector<int> id;
  std::vector<std::uint8_t> compromised;

  std::size_t size() const { return x.size(); }
};

struct RoadState {
  RoadConfig config;
  std::vector<LaneVehicles> lanes;
  double t = 0.0;

  std::size_t vehicle_count() const;
  std::size_t compromised_count() const;
  double total_speed() const;

  /// All vehicles ordered (lane, x); convenience for tests and dumps.
  std::vector<Vehicle> all_vehicles() const;
  std::optional<Vehicle> find_vehicle(int id) const;
};

struct FluxMeasurement {
  double rho;       // total density, veh/km/lane
  double rho_h;     // compromised density, veh/km/lane
  double phi;       // flux, veh/hr/lane
  double window_s;  // averaging interval
  bool zero_flux;
};

/// Equally spaced vehicles per lane (n = round(rho*L/1000)) with uniform
/// jitter of at most 10% of the spacing, started at the equilibrium speed
/// for that spacing. Throws CapacityError when spacing <= d + s0.
RoadState initialize_road(const RoadConfig& config, double rho_per_km_lane,
                          const IdmParams& idm, Rng& rng);

/// MOBIL: true iff the gate draw passes, the p-weighted acceleration
/// incentive is strictly positive, and the safety criterion holds (new
/// follower decelerates at most b_safe, both new gaps positive).
/// Compromised vehicles never change lanes.
bool mobil_decide(const RoadState& state, int vehicle_id, int target_lane,
                  const MobilParams& mobil, const IdmParams& idm, Rng& rng);

/// One dt advance: lane-change phase (edge lanes toward the center, middle
/// lanes pick a side by a random draw), then a synchronous Euler update of
/// every active vehicle with velocities clamped at zero and positions
/// wrapped modulo L. Throws StabilityError if any bumper gap closes.
void step(RoadState& state, const IdmParams& idm, const MobilParams& mobil, Rng& rng);

/// Marks round(fraction * N) vehicles (ties to even) chosen uniformly
/// without replacement as compromised and stops them in place.
void inject_hack(RoadState& state, double fraction, Rng& rng);

/// Flux over a window of per-step speed sums: phi = 3600 * mean(sum v) /
/// (L * lanes), which equals rho * <v> identically. Throws DomainError on an
/// empty window.
FluxMeasurement measure_flux(std::span<const double> total_speed_per_step,
                             const RoadConfig& config, double rho, double rho_h);

using StepObserver = std::function<void(const RoadState&)>;

/// Full protocol: initialize at density rho, settle for settle_steps, hack
/// `fraction` of the vehicles, run the post-hack horizon and measure the
/// final window. Deterministic given (config, seed); `seed` overrides
/// config.seed. The observer, when given, sees the state after
/// initialization and after every step.
FluxMeasurement run_flux_experiment(double rho, double fraction, const RoadConfig& config,
                                    const IdmParams& idm, const MobilParams& mobil,
                                    std::uint64_t seed,
                                    const StepObserver* observer = nullptr);

/// Checks the state invariants (ordering, positive cyclic gaps, v >= 0,
/// stopped compromised vehicles); throws StabilityError or DomainError
/// naming the offending vehicles. Used by tests after every step.
void validate_state(const RoadState& state, const IdmParams& idm);

/// Order-sensitive digest of (t, per-lane id/x/v/status); bit-exact
/// trajectory comparisons for the determinism tests.
std::uint64_t state_digest(const RoadState& state);

}  // namespace gridlock
