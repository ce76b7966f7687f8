#pragma once

#include <cstdint>
#include <vector>

namespace gridlock {

/// Behavior of the closed-form probability on one-lane roads, where the
/// multi-lane formula degenerates. AlwaysBlocked (default): any disabled
/// vehicle blocks a single lane. Poisson: 1 - exp(-L*rho_H), for
/// sensitivity analysis only.
enum class SingleLaneMode { kAlwaysBlocked, kPoisson };

struct PercolationQuery {
  int lanes = 2;
  double rho_h = 0.0;      // disabled vehicles per km per lane
  double length_km = 1.0;  // road length
  double s_m = 14.0;       // blocking distance, twice the effective vehicle length
  SingleLaneMode single_lane_mode = SingleLaneMode::kAlwaysBlocked;

  void validate() const;
};

/// Probability that two vehicles placed uniformly on adjacent lanes of a
/// road of `length_m` sit within `s_m` of each other:
/// (2/L^2)(L*s - s^2/2) = (s/L)(2 - s/L).
double pair_block_prob(double s_m, double length_m);

/// Closed-form road blockage probability,
///   P = 1 - [1 - (s/L)^(l-1) (2 - s/L)^(l-1)]^((L*rho_H)^l),
/// with the exponent real-valued. Single-lane roads follow the query's
/// SingleLaneMode.
double percolation_prob(const PercolationQuery& query);

/// A static picture of vehicles on a multi-lane road; positions in meters.
struct RoadSnapshot {
  double length_m = 0.0;
  std::vector<std::vector<double>> lane_positions;      // per lane, any order
  std::vector<std::vector<std::uint8_t>> lane_hacked;   // parallel to positions

  int lanes() const { return static_cast<int>(lane_positions.size()); }
  std::size_t vehicle_count() const;
  void validate() const;
};

/// True iff a chain of hacked vehicles, one per lane, spans all lanes with
/// every adjacent-lane separation strictly below `s_m`. Lane-by-lane
/// reachability sweep over sorted positions. On a one-lane road any hacked
/// vehicle blocks.
bool is_blocked_configuration(const RoadSnapshot& snapshot, double s_m);

struct ProbabilityEstimate {
  double value;
  double std_error;  // binomial
  long long trials;
};

/// Geometric oracle for percolation_prob: each trial drops `n_per_lane`
/// hacked vehicles uniformly per lane and tests is_blocked_configuration.
/// Per-trial RNG streams are derived from (seed, trial index), so the result
/// is identical for any `workers` partitioning.
ProbabilityEstimate mc_percolation_estimate(int lanes, int n_per_lane, double length_m,
                                            double s_m, long long trials, std::uint64_t seed,
                                            int workers = 1);

/// Empirical-snapshot analyzer: ignores the snapshot's own hacked flags and
/// repeatedly hacks round(fraction*N) of its vehicles uniformly at random,
/// returning the fraction of trials that block the road.
ProbabilityEstimate empirical_snapshot_blockage(const RoadSnapshot& snapshot, double fraction,
                                                double s_m, long long trials,
                                                std::uint64_t seed, int workers = 1);

}  // namespace gridlock
