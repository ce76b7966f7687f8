#include "gridlock/road_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <string>

#include "gridlock/errors.hpp"
#include "gridlock/kernels/idm_batch.hpp"

namespace gridlock {

namespace {

// Center-to-center distance from `from` forward (in driving direction) to
// `to` on a ring of length L. Returns 0 for coincident positions.
double forward_center_distance(double from, double to, double length) {
  double dist = to - from;
  if (dist < 0.0) dist += length;
  return dist;
}

struct LaneChangeContext {
  const IdmCoefficients& k;
  double length;
  double d;
};

// MOBIL decision for vehicle index `i` of lane `lane` moving into
// `target_lane`. Draws the attempt gate exactly once. The caller guarantees
// the vehicle is active and the target lane is adjacent.
bool decide_lane_change(const RoadState& state, int lane, std::size_t i, int target_lane,
                        const MobilParams& mobil, const LaneChangeContext& ctx, Rng& rng) {
  if (!(rng.next_double() < mobil.r_threshold)) return false;

  const LaneVehicles& cur = state.lanes[static_cast<std::size_t>(lane)];
  const LaneVehicles& tgt = state.lanes[static_cast<std::size_t>(target_lane)];
  const std::size_t n = cur.size();
  const std::size_t m = tgt.size();
  const double L = ctx.length;
  const double d = ctx.d;
  const double xi = cur.x[i];
  const double vi = cur.v[i];

  // Neighbors in the target lane around the insertion point.
  std::size_t lead_idx = 0;
  std::size_t foll_idx = 0;
  double new_lead_gap = L - d;
  double new_lead_dv = 0.0;
  double new_foll_gap = L - d;
  if (m > 0) {
    const auto it = std::upper_bound(tgt.x.begin(), tgt.x.end(), xi);
    const std::size_t pos = static_cast<std::size_t>(it - tgt.x.begin());
    lead_idx = pos % m;
    foll_idx = (pos + m - 1) % m;
    new_lead_gap = forward_center_distance(xi, tgt.x[lead_idx], L) - d;
    new_lead_dv = vi - tgt.v[lead_idx];
    new_foll_gap = forward_center_distance(tgt.x[foll_idx], xi, L) - d;
  }
  if (!(new_lead_gap > 0.0) || !(new_foll_gap > 0.0)) return false;

  // Safety: the new follower must not be forced to brake harder than b_safe.
  // A compromised follower is parked, so only the gap matters for it.
  double delta_new_follower = 0.0;
  if (m > 0 && tgt.compromised[foll_idx] == 0) {
    const double v_nf = tgt.v[foll_idx];
    const double after = idm_acceleration_unchecked(v_nf, v_nf - vi, new_foll_gap, ctx.k);
    if (after < -mobil.b_safe) return false;
    double before;
    if (m == 1) {
      before = idm_acceleration_unchecked(v_nf, 0.0, L - d, ctx.k);
    } else {
      const double gap = forward_center_distance(tgt.x[foll_idx], tgt.x[lead_idx], L) - d;
      before = idm_acceleration_unchecked(v_nf, v_nf - tgt.v[lead_idx], gap, ctx.k);
    }
    delta_new_follower = after - before;
  }

  // Incentive for the changing vehicle.
  double accel_before;
  if (n == 1) {
    accel_before = idm_acceleration_unchecked(vi, 0.0, L - d, ctx.k);
  } else {
    const std::size_t li = (i + 1) % n;
    const double gap = forward_center_distance(xi, cur.x[li], L) - d;
    accel_before = idm_acceleration_unchecked(vi, vi - cur.v[li], gap, ctx.k);
  }
  const double accel_after = idm_acceleration_unchecked(vi, new_lead_dv, new_lead_gap, ctx.k);
  const double delta_self = accel_after - accel_before;

  // Old follower gains room when the vehicle leaves.
  double delta_old_follower = 0.0;
  if (n >= 2) {
    const std::size_t of = (i + n - 1) % n;
    if (cur.compromised[of] == 0) {
      const double v_of = cur.v[of];
      const double gap_before = forward_center_distance(cur.x[of], xi, L) - d;
      const double before = idm_acceleration_unchecked(v_of, v_of - vi, gap_before, ctx.k);
      double after;
      if (n == 2) {
        after = idm_acceleration_unchecked(v_of, 0.0, L - d, ctx.k);
      } else {
        const std::size_t li = (i + 1) % n;
        const double gap_after = forward_center_distance(cur.x[of], cur.x[li], L) - d;
        after = idm_acceleration_unchecked(v_of, v_of - cur.v[li], gap_after, ctx.k);
      }
      delta_old_follower = after - before;
    }
  }

  const double incentive =
      delta_self + mobil.politeness * (delta_old_follower + delta_new_follower);
  return incentive > 0.0;
}

void apply_lane_change(RoadState& state, int lane, std::size_t i, int target_lane) {
  LaneVehicles& cur = state.lanes[static_cast<std::size_t>(lane)];
  LaneVehicles& tgt = state.lanes[static_cast<std::size_t>(target_lane)];
  const double x = cur.x[i];
  const double v = cur.v[i];
  const int id = cur.id[i];
  const std::uint8_t comp = cur.compromised[i];

  cur.x.erase(cur.x.begin() + static_cast<std::ptrdiff_t>(i));
  cur.v.erase(cur.v.begin() + static_cast<std::ptrdiff_t>(i));
  cur.id.erase(cur.id.begin() + static_cast<std::ptrdiff_t>(i));
  cur.compromised.erase(cur.compromised.begin() + static_cast<std::ptrdiff_t>(i));

  const auto it = std::upper_bound(tgt.x.begin(), tgt.x.end(), x);
  const std::size_t pos = static_cast<std::size_t>(it - tgt.x.begin());
  tgt.x.insert(tgt.x.begin() + static_cast<std::ptrdiff_t>(pos), x);
  tgt.v.insert(tgt.v.begin() + static_cast<std::ptrdiff_t>(pos), v);
  tgt.id.insert(tgt.id.begin() + static_cast<std::ptrdiff_t>(pos), id);
  tgt.compromised.insert(tgt.compromised.begin() + static_cast<std::ptrdiff_t>(pos), comp);
}

}  // namespace

void MobilParams::validate() const {
  if (!(politeness >= 0.0)) throw DomainError("MOBIL politeness must be >= 0");
  if (!(r_threshold >= 0.0 && r_threshold <= 1.0)) {
    throw DomainError("MOBIL r_threshold must be in [0,1]");
  }
  if (!(b_safe > 0.0)) throw DomainError("MOBIL b_safe must be > 0");
}

void RoadConfig::validate() const {
  if (!(length_m > 0.0)) throw DomainError("road length must be > 0");
  if (lanes < 1) throw DomainError("lane count must be >= 1");
  if (!(dt > 0.0)) throw DomainError("dt must be > 0");
  if (settle_steps < 0) throw DomainError("settle_steps must be >= 0");
  if (!(posthack_horizon_s > 0.0)) throw DomainError("post-hack horizon must be > 0");
  if (!(flux_window_s > 0.0)) throw DomainError("flux window must be > 0");
  if (!(zero_flux_threshold >= 0.0)) throw DomainError("zero-flux threshold must be >= 0");
}

std::size_t RoadState::vehicle_count() const {
  std::size_t n = 0;
  for (const auto& lane : lanes) n += lane.size();
  return n;
}

std::size_t RoadState::compromised_count() const {
  std::size_t n = 0;
  for (const auto& lane : lanes) {
    for (std::uint8_t c : lane.compromised) n += c;
  }
  return n;
}

double RoadState::total_speed() const {
  double sum = 0.0;
  for (const auto& lane : lanes) {
    for (double v : lane.v) sum += v;
  }
  return sum;
}

std::vector<Vehicle> RoadState::all_vehicles() const {
  std::vector<Vehicle> out;
  out.reserve(vehicle_count());
  for (std::size_t lane = 0; lane < lanes.size(); ++lane) {
    const auto& arr = lanes[lane];
    for (std::size_t i = 0; i < arr.size(); ++i) {
      out.push_back(Vehicle{arr.id[i], static_cast<int>(lane), arr.x[i], arr.v[i],
                            arr.compromised[i] != 0 ? VehicleStatus::kCompromised
                                                    : VehicleStatus::kActive});
    }
  }
  return out;
}

std::optional<Vehicle> RoadState::find_vehicle(int id) const {
  for (std::size_t lane = 0; lane < lanes.size(); ++lane) {
    const auto& arr = lanes[lane];
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (arr.id[i] == id) {
        return Vehicle{arr.id[i], static_cast<int>(lane), arr.x[i], arr.v[i],
                       arr.compromised[i] != 0 ? VehicleStatus::kCompromised
                                               : VehicleStatus::kActive};
      }
    }
  }
  return std::nullopt;
}

RoadState initialize_road(const RoadConfig& config, double rho_per_km_lane,
                          const IdmParams& idm, Rng& rng) {
  config.validate();
  idm.validate();
  if (!(rho_per_km_lane >= 0.0)) throw DomainError("density must be >= 0");

  RoadState state;
  state.config = config;
  state.lanes.resize(static_cast<std::size_t>(config.lanes));
  state.t = 0.0;

  const long per_lane = std::lround(rho_per_km_lane * config.length_m / 1000.0);
  if (per_lane == 0) return state;

  const double spacing = config.length_m / static_cast<double>(per_lane);
  if (spacing <= idm.d + idm.s0) {
    throw CapacityError("density " + std::to_string(rho_per_km_lane) +
                        " veh/km/lane gives spacing " + std::to_string(spacing) +
                        " m <= d + s0 = " + std::to_string(idm.d + idm.s0) + " m");
  }
  const double v_init = std::min(idm.v0, equilibrium_speed(spacing, idm));

  int next_id = 0;
  for (auto& lane : state.lanes) {
    lane.x.resize(static_cast<std::size_t>(per_lane));
    lane.v.assign(static_cast<std::size_t>(per_lane), v_init);
    lane.id.resize(static_cast<std::size_t>(per_lane));
    lane.compromised.assign(static_cast<std::size_t>(per_lane), 0);
    for (long i = 0; i < per_lane; ++i) {
      const double jitter = rng.next_double() * 0.1 * spacing;
      lane.x[static_cast<std::size_t>(i)] = static_cast<double>(i) * spacing + jitter;
      lane.id[static_cast<std::size_t>(i)] = next_id++;
    }
  }
  return state;
}

bool mobil_decide(const RoadState& state, int vehicle_id, int target_lane,
                  const MobilParams& mobil, const IdmParams& idm, Rng& rng) {
  mobil.validate();
  idm.validate();
  if (target_lane < 0 || target_lane >= state.config.lanes) {
    throw DomainError("target lane out of range");
  }
  for (std::size_t lane = 0; lane < state.lanes.size(); ++lane) {
    const auto& arr = state.lanes[lane];
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (arr.id[i] != vehicle_id) continue;
      if (std::abs(static_cast<int>(lane) - target_lane) != 1) {
        throw DomainError("target lane must be adjacent to the vehicle's lane");
      }
      if (arr.compromised[i] != 0) return false;
      const auto k = idm.coefficients();
      const LaneChangeContext ctx{k, state.config.length_m, idm.d};
      return decide_lane_change(state, static_cast<int>(lane), i, target_lane, mobil, ctx, rng);
    }
  }
  throw DomainError("vehicle id " + std::to_string(vehicle_id) + " not found");
}

void step(RoadState& state, const IdmParams& idm, const MobilParams& mobil, Rng& rng) {
  const double L = state.config.length_m;
  const double d = idm.d;
  const double dt = state.config.dt;
  const auto k = idm.coefficients();
  const int nlanes = static_cast<int>(state.lanes.size());

  // Lane-change phase. Decisions are applied immediately, in deterministic
  // order (lanes ascending, vehicles by position at phase start); each
  // vehicle is considered exactly once per step.
  if (nlanes >= 2) {
    const LaneChangeContext ctx{k, L, d};
    std::vector<std::vector<double>> snap_x(static_cast<std::size_t>(nlanes));
    std::vector<std::vector<std::uint8_t>> snap_comp(static_cast<std::size_t>(nlanes));
    for (int lane = 0; lane < nlanes; ++lane) {
      snap_x[static_cast<std::size_t>(lane)] = state.lanes[static_cast<std::size_t>(lane)].x;
      snap_comp[static_cast<std::size_t>(lane)] =
          state.lanes[static_cast<std::size_t>(lane)].compromised;
    }
    for (int lane = 0; lane < nlanes; ++lane) {
      const auto& xs = snap_x[static_cast<std::size_t>(lane)];
      const auto& comps = snap_comp[static_cast<std::size_t>(lane)];
      for (std::size_t sidx = 0; sidx < xs.size(); ++sidx) {
        if (comps[sidx] != 0) continue;  // parked vehicles neither draw nor move
        auto& cur = state.lanes[static_cast<std::size_t>(lane)];
        const auto it = std::lower_bound(cur.x.begin(), cur.x.end(), xs[sidx]);
        if (it == cur.x.end() || *it != xs[sidx]) {
          throw Error("internal: lane-change snapshot lost a vehicle");
        }
        const std::size_t i = static_cast<std::size_t>(it - cur.x.begin());
        int target;
        if (lane == 0) {
          target = 1;
        } else if (lane == nlanes - 1) {
          target = lane - 1;
        } else {
          target = rng.next_double() < 0.5 ? lane - 1 : lane + 1;
        }
        if (decide_lane_change(state, lane, i, target, mobil, ctx, rng)) {
          apply_lane_change(state, lane, i, target);
        }
      }
    }
  }

  // Car-following phase: synchronous Euler update from the post-change state.
  const auto kernel = kernels::active_idm_batch();
  std::vector<double> gap;
  std::vector<double> dv;
  std::vector<double> accel;
  for (auto& lane : state.lanes) {
    const std::size_t n = lane.size();
    if (n == 0) continue;
    gap.resize(n);
    dv.resize(n);
    accel.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (n == 1) {
        gap[i] = L - d;
        dv[i] = 0.0;
      } else {
        const std::size_t li = (i + 1) % n;
        gap[i] = forward_center_distance(lane.x[i], lane.x[li], L) - d;
        dv[i] = lane.v[i] - lane.v[li];
      }
    }
    kernel(lane.v.data(), dv.data(), gap.data(), accel.data(), n, k);

    // Detect collisions against the pre-update neighbor relation; on a ring
    // the post-update ordering alone cannot distinguish a wrap from an
    // overtake.
    if (n >= 2) {
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t li = (i + 1) % n;
        const double travel_i = lane.compromised[i] != 0 ? 0.0 : lane.v[i] * dt;
        const double travel_li = lane.compromised[li] != 0 ? 0.0 : lane.v[li] * dt;
        const double new_center = (gap[i] + d) + travel_li - travel_i;
        if (!(new_center > d)) {
          throw StabilityError("gap underflow between vehicles " + std::to_string(lane.id[i]) +
                               " and " + std::to_string(lane.id[li]) + " at t=" +
                               std::to_string(state.t + dt) + " s; reduce dt");
        }
      }
    }

    for (std::size_t i = 0; i < n; ++i) {
      if (lane.compromised[i] != 0) continue;
      double x_new = lane.x[i] + lane.v[i] * dt;
      if (x_new >= L) x_new = std::fmod(x_new, L);
      double v_new = lane.v[i] + accel[i] * dt;
      if (v_new < 0.0) v_new = 0.0;
      lane.x[i] = x_new;
      lane.v[i] = v_new;
    }
  }

  // Restore the rotation order broken by ring wrap-around.
  for (auto& arr : state.lanes) {
    const std::size_t n = arr.size();
    if (n < 2) continue;
    const auto min_it = std::min_element(arr.x.begin(), arr.x.end());
    const auto offset = min_it - arr.x.begin();
    if (offset != 0) {
      std::rotate(arr.x.begin(), arr.x.begin() + offset, arr.x.end());
      std::rotate(arr.v.begin(), arr.v.begin() + offset, arr.v.end());
      std::rotate(arr.id.begin(), arr.id.begin() + offset, arr.id.end());
      std::rotate(arr.compromised.begin(), arr.compromised.begin() + offset,
                  arr.compromised.end());
    }
  }

  state.t += dt;
}

void inject_hack(RoadState& state, double fraction, Rng& rng) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw DomainError("hack fraction must be in [0,1]");
  }
  const std::size_t total = state.vehicle_count();
  const auto count =
      static_cast<std::size_t>(std::nearbyint(fraction * static_cast<double>(total)));
  if (count == 0) return;

  std::vector<std::pair<std::uint32_t, std::uint32_t>> refs;
  refs.reserve(total);
  for (std::size_t lane = 0; lane < state.lanes.size(); ++lane) {
    for (std::size_t i = 0; i < state.lanes[lane].size(); ++i) {
      refs.emplace_back(static_cast<std::uint32_t>(lane), static_cast<std::uint32_t>(i));
    }
  }
  for (std::size_t pick = 0; pick < count; ++pick) {
    const std::size_t j = pick + static_cast<std::size_t>(rng.next_below(refs.size() - pick));
    std::swap(refs[pick], refs[j]);
    auto& lane = state.lanes[refs[pick].first];
    lane.compromised[refs[pick].second] = 1;
    lane.v[refs[pick].second] = 0.0;
  }
}

FluxMeasurement measure_flux(std::span<const double> total_speed_per_step,
                             const RoadConfig& config, double rho, double rho_h) {
  if (total_speed_per_step.empty()) throw DomainError("measure_flux: empty window");
  double sum = 0.0;
  for (double s : total_speed_per_step) sum += s;
  const double mean = sum / static_cast<double>(total_speed_per_step.size());
  const double phi = 3600.0 * mean / (config.length_m * config.lanes);
  FluxMeasurement out;
  out.rho = rho;
  out.rho_h = rho_h;
  out.phi = phi;
  out.window_s = static_cast<double>(total_speed_per_step.size()) * config.dt;
  out.zero_flux = phi < config.zero_flux_threshold;
  return out;
}

FluxMeasurement run_flux_experiment(double rho, double fraction, const RoadConfig& config,
                                    const IdmParams& idm, const MobilParams& mobil,
                                    std::uint64_t seed, const StepObserver* observer) {
  RoadConfig cfg = config;
  cfg.seed = seed;
  cfg.validate();
  mobil.validate();

  const long horizon_steps = std::lround(cfg.posthack_horizon_s / cfg.dt);
  const long window_steps = std::lround(cfg.flux_window_s / cfg.dt);
  if (window_steps < 1 || window_steps > horizon_steps) {
    throw DomainError("flux window must fit inside the post-hack horizon");
  }

  Rng rng(seed);
  RoadState state = initialize_road(cfg, rho, idm, rng);
  if (observer != nullptr) (*observer)(state);

  for (int i = 0; i < cfg.settle_steps; ++i) {
    step(state, idm, mobil, rng);
    if (observer != nullptr) (*observer)(state);
  }

  inject_hack(state, fraction, rng);

  std::vector<double> sums;
  sums.reserve(static_cast<std::size_t>(horizon_steps));
  for (long i = 0; i < horizon_steps; ++i) {
    step(state, idm, mobil, rng);
    sums.push_back(state.total_speed());
    if (observer != nullptr) (*observer)(state);
  }

  const double lane_km = cfg.length_m / 1000.0;
  const double rho_actual =
      static_cast<double>(state.vehicle_count()) / (lane_km * cfg.lanes);
  const double rho_h_actual =
      static_cast<double>(state.compromised_count()) / (lane_km * cfg.lanes);
  const std::span<const double> window(sums.data() + (horizon_steps - window_steps),
                                       static_cast<std::size_t>(window_steps));
  return measure_flux(window, cfg, rho_actual, rho_h_actual);
}

void validate_state(const RoadState& state, const IdmParams& idm) {
  const double L = state.config.length_m;
  if (state.lanes.size() != static_cast<std::size_t>(state.config.lanes)) {
    throw DomainError("state has wrong lane count");
  }
  for (std::size_t lane = 0; lane < state.lanes.size(); ++lane) {
    const auto& arr = state.lanes[lane];
    const std::size_t n = arr.size();
    if (arr.v.size() != n || arr.id.size() != n || arr.compromised.size() != n) {
      throw DomainError("lane arrays out of sync");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!(arr.x[i] >= 0.0 && arr.x[i] < L)) {
        throw DomainError("vehicle " + std::to_string(arr.id[i]) + " position out of range");
      }
      if (!(arr.v[i] >= 0.0)) {
        throw DomainError("vehicle " + std::to_string(arr.id[i]) + " has negative speed");
      }
      if (arr.compromised[i] != 0 && arr.v[i] != 0.0) {
        throw DomainError("compromised vehicle " + std::to_string(arr.id[i]) + " is moving");
      }
      if (i + 1 < n && !(arr.x[i] < arr.x[i + 1])) {
        throw StabilityError("lane " + std::to_string(lane) + " not sorted at vehicle " +
                             std::to_string(arr.id[i]));
      }
      if (n >= 2) {
        const std::size_t li = (i + 1) % n;
        const double center = forward_center_distance(arr.x[i], arr.x[li], L);
        if (!(center > idm.d)) {
          throw StabilityError("nonpositive gap between vehicles " + std::to_string(arr.id[i]) +
                               " and " + std::to_string(arr.id[li]));
        }
      }
    }
  }
}

std::uint64_t state_digest(const RoadState& state) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  auto feed = [&h](const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= bytes[i];
      h *= 0x100000001B3ull;
    }
  };
  feed(&state.t, sizeof(state.t));
  for (const auto& lane : state.lanes) {
    const std::size_t n = lane.size();
    feed(&n, sizeof(n));
    if (n > 0) {
      feed(lane.x.data(), n * sizeof(double));
      feed(lane.v.data(), n * sizeof(double));
      feed(lane.id.data(), n * sizeof(int));
      feed(lane.compromised.data(), n * sizeof(std::uint8_t));
    }
  }
  return h;
}

}  // namespace gridlock
