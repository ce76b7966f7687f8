#include "gridlock/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>
#include <utility>

#include "gridlock/errors.hpp"
#include "gridlock/rng.hpp"

namespace gridlock {

namespace {

// Blocked-count accumulation for `trials` Bernoulli trials indexed
// [0, trials), split into `workers` contiguous chunks. Counts are integers,
// so the total is independent of the partitioning.
template <typename TrialFn>
ProbabilityEstimate run_trials(long long trials, int workers, const TrialFn& trial) {
  if (trials < 1) throw DomainError("trials must be >= 1");
  if (workers < 1) workers = 1;
  if (static_cast<long long>(workers) > trials) workers = static_cast<int>(trials);

  std::vector<long long> counts(static_cast<std::size_t>(workers), 0);
  auto run_chunk = [&](int w) {
    const long long begin = trials * w / workers;
    const long long end = trials * (w + 1) / workers;
    long long blocked = 0;
    for (long long t = begin; t < end; ++t) {
      if (trial(t)) ++blocked;
    }
    counts[static_cast<std::size_t>(w)] = blocked;
  };

  if (workers == 1) {
    run_chunk(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(run_chunk, w);
    for (auto& th : pool) th.join();
  }

  long long blocked = 0;
  for (long long c : counts) blocked += c;
  const double p = static_cast<double>(blocked) / static_cast<double>(trials);
  const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
  return ProbabilityEstimate{p, se, trials};
}

// Reachability sweep over sorted per-lane hacked positions. `reach` holds the
// lane-(alpha) positions that terminate a chain from lane 0.
bool blocked_sweep(const std::vector<std::vector<double>>& hacked_sorted, double s_m) {
  if (hacked_sorted.empty()) return false;
  std::vector<double> reach = hacked_sorted[0];
  std::vector<double> next;
  for (std::size_t lane = 1; lane < hacked_sorted.size(); ++lane) {
    if (reach.empty()) return false;
    const auto& ys = hacked_sorted[lane];
    next.clear();
    std::size_t i = 0;
    for (double y : ys) {
      while (i < reach.size() && reach[i] <= y - s_m) ++i;
      if (i < reach.size() && reach[i] < y + s_m) next.push_back(y);
    }
    reach.swap(next);
  }
  return !reach.empty();
}

}  // namespace

void PercolationQuery::validate() const {
  if (lanes < 1) throw DomainError("lane count must be >= 1");
  if (!(rho_h >= 0.0)) throw DomainError("rho_H must be >= 0");
  if (!(length_km > 0.0)) throw DomainError("road length must be > 0");
  if (!(s_m > 0.0 && s_m <= 1000.0 * length_km)) {
    throw DomainError("blocking distance s must satisfy 0 < s <= L");
  }
}

double pair_block_prob(double s_m, double length_m) {
  if (!(length_m > 0.0)) throw DomainError("road length must be > 0");
  if (!(s_m >= 0.0 && s_m <= length_m)) {
    throw DomainError("blocking distance s must satisfy 0 <= s <= L");
  }
  const double r = s_m / length_m;
  return r * (2.0 - r);
}

double percolation_prob(const PercolationQuery& query) {
  query.validate();
  const double n = query.length_km * query.rho_h;  // vehicles per lane
  if (n <= 0.0) return 0.0;

  if (query.lanes == 1) {
    switch (query.single_lane_mode) {
      case SingleLaneMode::kAlwaysBlocked:
        return 1.0;
      case SingleLaneMode::kPoisson:
        return -std::expm1(-n);
    }
  }

  const double pair = pair_block_prob(query.s_m, 1000.0 * query.length_km);
  double tuple_blocks = 1.0;
  for (int i = 1; i < query.lanes; ++i) tuple_blocks *= pair;
  if (tuple_blocks >= 1.0) return 1.0;

  double exponent = 1.0;
  for (int i = 0; i < query.lanes; ++i) exponent *= n;
  return -std::expm1(exponent * std::log1p(-tuple_blocks));
}

std::size_t RoadSnapshot::vehicle_count() const {
  std::size_t n = 0;
  for (const auto& lane : lane_positions) n += lane.size();
  return n;
}

void RoadSnapshot::validate() const {
  if (!(length_m > 0.0)) throw DomainError("snapshot road length must be > 0");
  if (lane_positions.size() != lane_hacked.size()) {
    throw DomainError("snapshot lane arrays out of sync");
  }
  for (std::size_t lane = 0; lane < lane_positions.size(); ++lane) {
    if (lane_positions[lane].size() != lane_hacked[lane].size()) {
      throw DomainError("snapshot lane " + std::to_string(lane) + " arrays out of sync");
    }
    for (double x : lane_positions[lane]) {
      if (!(x >= 0.0 && x < length_m)) {
        throw DomainError("snapshot position " + std::to_string(x) + " outside [0, L)");
      }
    }
  }
}

bool is_blocked_configuration(const RoadSnapshot& snapshot, double s_m) {
  snapshot.validate();
  if (snapshot.lanes() == 0) return false;
  std::vector<std::vector<double>> hacked(snapshot.lane_positions.size());
  for (std::size_t lane = 0; lane < snapshot.lane_positions.size(); ++lane) {
    const auto& xs = snapshot.lane_positions[lane];
    const auto& flags = snapshot.lane_hacked[lane];
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (flags[i] != 0) hacked[lane].push_back(xs[i]);
    }
    std::sort(hacked[lane].begin(), hacked[lane].end());
  }
  return blocked_sweep(hacked, s_m);
}

ProbabilityEstimate mc_percolation_estimate(int lanes, int n_per_lane, double length_m,
                                            double s_m, long long trials, std::uint64_t seed,
                                            int workers) {
  if (lanes < 1) throw DomainError("lane count must be >= 1");
  if (n_per_lane < 0) throw DomainError("n_per_lane must be >= 0");
  if (!(length_m > 0.0)) throw DomainError("road length must be > 0");
  if (!(s_m > 0.0)) throw DomainError("blocking distance must be > 0");

  auto trial = [&](long long index) {
    if (n_per_lane == 0) return false;
    Rng rng = Rng::derived(seed, static_cast<std::uint64_t>(index));
    std::vector<std::vector<double>> hacked(static_cast<std::size_t>(lanes));
    for (auto& lane : hacked) {
      lane.resize(static_cast<std::size_t>(n_per_lane));
      for (auto& x : lane) x = rng.next_double() * length_m;
      std::sort(lane.begin(), lane.end());
    }
    return blocked_sweep(hacked, s_m);
  };
  return run_trials(trials, workers, trial);
}

ProbabilityEstimate empirical_snapshot_blockage(const RoadSnapshot& snapshot, double fraction,
                                                double s_m, long long trials,
                                                std::uint64_t seed, int workers) {
  snapshot.validate();
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw DomainError("hack fraction must be in [0,1]");
  }
  const std::size_t total = snapshot.vehicle_count();
  if (total == 0) throw DomainError("snapshot has no vehicles");

  // Pre-sorted lanes; a subset selected by ascending global index stays
  // sorted within each lane, so trials need no per-trial sort.
  std::vector<std::vector<double>> sorted(snapshot.lane_positions.size());
  for (std::size_t lane = 0; lane < sorted.size(); ++lane) {
    sorted[lane] = snapshot.lane_positions[lane];
    std::sort(sorted[lane].begin(), sorted[lane].end());
  }
  const auto count =
      static_cast<std::size_t>(std::nearbyint(fraction * static_cast<double>(total)));

  std::vector<std::pair<std::uint32_t, std::uint32_t>> refs;
  refs.reserve(total);
  for (std::size_t lane = 0; lane < sorted.size(); ++lane) {
    for (std::size_t i = 0; i < sorted[lane].size(); ++i) {
      refs.emplace_back(static_cast<std::uint32_t>(lane), static_cast<std::uint32_t>(i));
    }
  }

  auto trial = [&](long long index) {
    if (count == 0) return false;
    Rng rng = Rng::derived(seed, static_cast<std::uint64_t>(index));
    auto picks = refs;
    std::vector<std::vector<double>> hacked(sorted.size());
    for (std::size_t p = 0; p < count; ++p) {
      const std::size_t j = p + static_cast<std::size_t>(rng.next_below(picks.size() - p));
      std::swap(picks[p], picks[j]);
    }
    // Gather in (lane, index) order to keep per-lane positions sorted.
    std::sort(picks.begin(), picks.begin() + static_cast<std::ptrdiff_t>(count));
    for (std::size_t p = 0; p < count; ++p) {
      hacked[picks[p].first].push_back(sorted[picks[p].first][picks[p].second]);
    }
    return blocked_sweep(hacked, s_m);
  };
  return run_trials(trials, workers, trial);
}

}  // namespace gridlock
