#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "gridlock/percolation.hpp"
#include "gridlock/rng.hpp"

namespace gridlock {

struct CityNode {
  std::string ext_id;  // id from the input file
  double x = 0.0;
  double y = 0.0;
  bool has_coords = false;
};

struct CityEdge {
  int u = 0;  // node indices into CityGraph::nodes
  int v = 0;
  double length_m = 0.0;
  int lanes = 1;
};

/// Street network. Parallel edges and self-loops are permitted; self-loops
/// never affect connectivity. Directed inputs keep their flag but
/// connectivity is always computed on the undirected skeleton.
struct CityGraph {
  std::vector<CityNode> nodes;
  std::vector<CityEdge> edges;
  bool directed = false;
  int defaulted_lanes = 0;  // edges whose lane count had to fall back to 1

  std::map<std::string, int> build_id_index() const;
  double total_lane_m() const;
  double total_lane_km() const { return total_lane_m() / 1000.0; }

  /// Structural checks: positive lengths, lanes >= 1, endpoints in range.
  void validate() const;
};

struct LanesDistribution {
  std::vector<int> values;      // e.g. {1, 2, 3}
  std::vector<double> weights;  // same size, nonnegative, not all zero

  void validate() const;
  int sample(Rng& rng) const;
};

/// Rectangular lattice of rows*cols intersections with 4-neighbor streets.
/// Edge lengths are drawn uniformly from [edge_len_min_m, edge_len_max_m]
/// and lane counts from the given distribution, deterministically from seed.
/// Node coordinates are laid out on the lattice using the mean edge length.
CityGraph generate_grid(int rows, int cols, double edge_len_min_m, double edge_len_max_m,
                        const LanesDistribution& lanes, std::uint64_t seed);

/// Blockage probability of one street: percolation_prob with l = edge.lanes,
/// L = edge.length, and the given disabled-vehicle density.
double edge_block_prob(const CityEdge& edge, double rho_h, double s_m, SingleLaneMode mode);

struct PruneOutcome {
  std::vector<std::uint32_t> blocked_edges;  // indices into CityGraph::edges
  std::vector<int> component_sizes;          // node counts, descending
  std::uint64_t seed = 0;
};

/// Marks every edge blocked independently with its edge_block_prob and
/// returns the component structure of the surviving graph.
PruneOutcome prune_network(const CityGraph& graph, double rho_h, double s_m,
                           SingleLaneMode mode, std::uint64_t seed);

/// Connected-component node counts (descending) of the graph minus the
/// blocked edges; `edge_blocked` is indexed like CityGraph::edges.
std::vector<int> component_sizes(const CityGraph& graph,
                                 const std::vector<std::uint8_t>& edge_blocked);

/// Second-largest component size, 0 when fewer than two components exist.
int second_largest(const std::vector<int>& sizes);

struct SweepResult {
  std::vector<double> rho_grid;
  std::vector<double> mean_largest;
  std::vector<double> std_largest;
  std::vector<double> mean_second;
  std::vector<double> std_second;
  double rho_critical = 0.0;
};

/// Replicated prunes over a density grid. rho_critical is the grid argmax of
/// the mean second-largest component after 3-point moving-average smoothing
/// (raw argmax is noisy near criticality). Replicate streams are derived
/// from (seed, point*replicates + rep); results do not depend on `workers`.
SweepResult sweep_density(const CityGraph& graph, std::span<const double> rho_grid,
                          int replicates, double s_m, SingleLaneMode mode,
                          std::uint64_t seed, int workers = 1);

/// category -> set of node indices.
using ServiceMap = std::map<std::string, std::set<int>>;

/// Per category, the fraction of nodes sharing a connected component with at
/// least one service node. A service node always reaches itself. An empty
/// category yields 0 with a warning.
std::map<std::string, double> service_accessibility(const CityGraph& graph,
                                                    const std::vector<std::uint8_t>& edge_blocked,
                                                    const ServiceMap& services);

struct HeatmapCell {
  double n_total;
  double fraction;
  double rho_h;      // n_total * fraction / total lane-km
  double frag_prob;
  double std_error;
};

/// Fragmentation probability over an (N_total, fraction) grid; a replicate
/// counts as fragmented when second-largest >= frag_ratio * largest.
/// Throws DomainError when any N_total exceeds network_capacity.
std::vector<HeatmapCell> fragmentation_heatmap(const CityGraph& graph,
                                               std::span<const double> n_total_grid,
                                               std::span<const double> fraction_grid,
                                               int replicates, double s_m, SingleLaneMode mode,
                                               double frag_ratio, double d_m,
                                               std::uint64_t seed, int workers = 1);

/// Bumper-to-bumper vehicle capacity: floor(sum(length*lanes) / d).
long long network_capacity(const CityGraph& graph, double d_m);

/// Probability shift from extending the road into an intersection of length
/// l0: (dP_p/dL) * l0, with the partial derivative evaluated analytically
/// from the closed-form blockage probability.
double intersection_correction(double length_m, int lanes, double rho_h, double s_m,
                               double l0_m, SingleLaneMode mode = SingleLaneMode::kAlwaysBlocked);

}  // namespace gridlock
