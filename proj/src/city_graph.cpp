#include "gridlock/city_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gridlock/errors.hpp"
#include "gridlock/log.hpp"
#include "gridlock/parallel.hpp"

namespace gridlock {

namespace {

// Weighted quick-union with path halving, as small as the job allows.
class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(static_cast<std::size_t>(n)), size_(static_cast<std::size_t>(n), 1) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  int find(int x) {
    while (parent_[static_cast<std::size_t>(x)] != x) {
      parent_[static_cast<std::size_t>(x)] =
          parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(x)])];
      x = parent_[static_cast<std::size_t>(x)];
    }
    return x;
  }

  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[static_cast<std::size_t>(a)] < size_[static_cast<std::size_t>(b)]) std::swap(a, b);
    parent_[static_cast<std::size_t>(b)] = a;
    size_[static_cast<std::size_t>(a)] += size_[static_cast<std::size_t>(b)];
  }

  int component_size(int x) { return size_[static_cast<std::size_t>(find(x))]; }

 private:
  std::vector<int> parent_;
  std::vector<int> size_;
};

UnionFind components_of(const CityGraph& graph, const std::vector<std::uint8_t>& edge_blocked) {
  UnionFind uf(static_cast<int>(graph.nodes.size()));
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    if (e < edge_blocked.size() && edge_blocked[e] != 0) continue;
    const auto& edge = graph.edges[e];
    if (edge.u == edge.v) continue;  // self-loops never affect connectivity
    uf.unite(edge.u, edge.v);
  }
  return uf;
}

std::vector<int> sizes_from(UnionFind& uf, int node_count) {
  std::vector<int> root_size(static_cast<std::size_t>(node_count), 0);
  for (int v = 0; v < node_count; ++v) root_size[static_cast<std::size_t>(uf.find(v))]++;
  std::vector<int> sizes;
  for (int s : root_size) {
    if (s > 0) sizes.push_back(s);
  }
  std::sort(sizes.begin(), sizes.end(), std::greater<int>());
  return sizes;
}

double mean_of(const std::vector<double>& xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

double sample_std(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

std::map<std::string, int> CityGraph::build_id_index() const {
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    index.emplace(nodes[i].ext_id, static_cast<int>(i));
  }
  return index;
}

double CityGraph::total_lane_m() const {
  double sum = 0.0;
  for (const auto& edge : edges) sum += edge.length_m * edge.lanes;
  return sum;
}

void CityGraph::validate() const {
  const int n = static_cast<int>(nodes.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto& edge = edges[e];
    if (edge.u < 0 || edge.u >= n || edge.v < 0 || edge.v >= n) {
      throw LoadError("edge " + std::to_string(e) + " references a node out of range");
    }
    if (!(edge.length_m > 0.0)) {
      throw LoadError("edge " + std::to_string(e) + " has non-positive length");
    }
    if (edge.lanes < 1) {
      throw LoadError("edge " + std::to_string(e) + " has lane count < 1");
    }
  }
}

void LanesDistribution::validate() const {
  if (values.empty() || values.size() != weights.size()) {
    throw DomainError("lanes distribution needs matching values and weights");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < 1) throw DomainError("lane counts must be >= 1");
    if (!(weights[i] >= 0.0)) throw DomainError("lane weights must be >= 0");
    total += weights[i];
  }
  if (!(total > 0.0)) throw DomainError("lane weights must not all be zero");
}

int LanesDistribution::sample(Rng& rng) const {
  double total = 0.0;
  for (double w : weights) total += w;
  double u = rng.next_double() * total;
  for (std::size_t i = 0; i < values.size(); ++i) {
    u -= weights[i];
    if (u < 0.0) return values[i];
  }
  return values.back();
}

CityGraph generate_grid(int rows, int cols, double edge_len_min_m, double edge_len_max_m,
                        const LanesDistribution& lanes, std::uint64_t seed) {
  if (rows < 2 || cols < 2) throw DomainError("grid needs rows >= 2 and cols >= 2");
  if (!(edge_len_min_m > 0.0) || !(edge_len_max_m >= edge_len_min_m)) {
    throw DomainError("edge length range must satisfy 0 < min <= max");
  }
  lanes.validate();

  CityGraph graph;
  graph.nodes.resize(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
  const double spacing = 0.5 * (edge_len_min_m + edge_len_max_m);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      auto& node = graph.nodes[static_cast<std::size_t>(r * cols + c)];
      node.ext_id = std::to_string(r * cols + c);
      node.x = c * spacing;
      node.y = r * spacing;
      node.has_coords = true;
    }
  }

  Rng rng(seed);
  auto add_edge = [&](int u, int v) {
    CityEdge edge;
    edge.u = u;
    edge.v = v;
    edge.length_m = edge_len_min_m == edge_len_max_m
                        ? edge_len_min_m
                        : rng.next_in(edge_len_min_m, edge_len_max_m);
    edge.lanes = lanes.sample(rng);
    graph.edges.push_back(edge);
  };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int here = r * cols + c;
      if (c + 1 < cols) add_edge(here, here + 1);
      if (r + 1 < rows) add_edge(here, here + cols);
    }
  }
  graph.validate();
  return graph;
}

double edge_block_prob(const CityEdge& edge, double rho_h, double s_m, SingleLaneMode mode) {
  PercolationQuery query;
  query.lanes = edge.lanes;
  query.rho_h = rho_h;
  query.length_km = edge.length_m / 1000.0;
  // Streets shorter than the blocking distance saturate: any pair of
  // disabled vehicles on adjacent lanes blocks them.
  query.s_m = std::min(s_m, edge.length_m);
  query.single_lane_mode = mode;
  return percolation_prob(query);
}

PruneOutcome prune_network(const CityGraph& graph, double rho_h, double s_m,
                           SingleLaneMode mode, std::uint64_t seed) {
  graph.validate();
  if (!(rho_h >= 0.0)) throw DomainError("rho_H must be >= 0");

  Rng rng(seed);
  PruneOutcome out;
  out.seed = seed;
  std::vector<std::uint8_t> blocked(graph.edges.size(), 0);
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const double p = edge_block_prob(graph.edges[e], rho_h, s_m, mode);
    if (rng.next_double() < p) {
      blocked[e] = 1;
      out.blocked_edges.push_back(static_cast<std::uint32_t>(e));
    }
  }
  out.component_sizes = component_sizes(graph, blocked);
  return out;
}

std::vector<int> component_sizes(const CityGraph& graph,
                                 const std::vector<std::uint8_t>& edge_blocked) {
  UnionFind uf = components_of(graph, edge_blocked);
  return sizes_from(uf, static_cast<int>(graph.nodes.size()));
}

int second_largest(const std::vector<int>& sizes) {
  return sizes.size() >= 2 ? sizes[1] : 0;
}

SweepResult sweep_density(const CityGraph& graph, std::span<const double> rho_grid,
                          int replicates, double s_m, SingleLaneMode mode,
                          std::uint64_t seed, int workers) {
  graph.validate();
  if (rho_grid.empty()) throw DomainError("density grid must not be empty");
  if (replicates < 1) throw DomainError("replicates must be >= 1");

  const std::size_t points = rho_grid.size();
  const long long total = static_cast<long long>(points) * replicates;
  std::vector<double> largest(static_cast<std::size_t>(total));
  std::vector<double> second(static_cast<std::size_t>(total));
  run_indexed(total, workers, [&](long long gi) {
    const std::size_t point = static_cast<std::size_t>(gi) / static_cast<std::size_t>(replicates);
    const auto outcome = prune_network(graph, rho_grid[point], s_m, mode,
                                       Rng::derive_seed(seed, static_cast<std::uint64_t>(gi)));
    largest[static_cast<std::size_t>(gi)] =
        outcome.component_sizes.empty() ? 0.0 : outcome.component_sizes[0];
    second[static_cast<std::size_t>(gi)] = second_largest(outcome.component_sizes);
  });

  SweepResult result;
  result.rho_grid.assign(rho_grid.begin(), rho_grid.end());
  for (std::size_t p = 0; p < points; ++p) {
    std::vector<double> lrep(largest.begin() + static_cast<std::ptrdiff_t>(p * static_cast<std::size_t>(replicates)),
                             largest.begin() + static_cast<std::ptrdiff_t>((p + 1) * static_cast<std::size_t>(replicates)));
    std::vector<double> srep(second.begin() + static_cast<std::ptrdiff_t>(p * static_cast<std::size_t>(replicates)),
                             second.begin() + static_cast<std::ptrdiff_t>((p + 1) * static_cast<std::size_t>(replicates)));
    const double lm = mean_of(lrep);
    const double sm = mean_of(srep);
    result.mean_largest.push_back(lm);
    result.std_largest.push_back(sample_std(lrep, lm));
    result.mean_second.push_back(sm);
    result.std_second.push_back(sample_std(srep, sm));
  }

  // Critical density: argmax of the smoothed mean second-largest curve.
  std::vector<double> smoothed(points);
  for (std::size_t i = 0; i < points; ++i) {
    double sum = 0.0;
    int cnt = 0;
    for (std::size_t j = (i == 0 ? 0 : i - 1); j <= std::min(points - 1, i + 1); ++j) {
      sum += result.mean_second[j];
      ++cnt;
    }
    smoothed[i] = sum / cnt;
  }
  const auto best = std::max_element(smoothed.begin(), smoothed.end()) - smoothed.begin();
  result.rho_critical = result.rho_grid[static_cast<std::size_t>(best)];
  return result;
}

std::map<std::string, double> service_accessibility(const CityGraph& graph,
                                                    const std::vector<std::uint8_t>& edge_blocked,
                                                    const ServiceMap& services) {
  graph.validate();
  const int n = static_cast<int>(graph.nodes.size());
  UnionFind uf = components_of(graph, edge_blocked);

  std::map<std::string, double> access;
  std::vector<std::uint8_t> root_has(static_cast<std::size_t>(n));
  for (const auto& [category, node_set] : services) {
    if (node_set.empty()) {
      log_warn("service category '" + category + "' has no locations");
      access[category] = 0.0;
      continue;
    }
    std::fill(root_has.begin(), root_has.end(), 0);
    for (int node : node_set) {
      if (node < 0 || node >= n) throw DomainError("service node index out of range");
      root_has[static_cast<std::size_t>(uf.find(node))] = 1;
    }
    long long reached = 0;
    for (int v = 0; v < n; ++v) {
      reached += root_has[static_cast<std::size_t>(uf.find(v))];
    }
    access[category] = static_cast<double>(reached) / static_cast<double>(n);
  }
  return access;
}

std::vector<HeatmapCell> fragmentation_heatmap(const CityGraph& graph,
                                               std::span<const double> n_total_grid,
                                               std::span<const double> fraction_grid,
                                               int replicates, double s_m, SingleLaneMode mode,
                                               double frag_ratio, double d_m,
                                               std::uint64_t seed, int workers) {
  graph.validate();
  if (n_total_grid.empty() || fraction_grid.empty()) {
    throw DomainError("heatmap grids must not be empty");
  }
  if (replicates < 1) throw DomainError("replicates must be >= 1");
  if (!(frag_ratio > 0.0 && frag_ratio <= 1.0)) {
    throw DomainError("fragmentation ratio must be in (0,1]");
  }
  const double capacity = static_cast<double>(network_capacity(graph, d_m));
  for (double n_total : n_total_grid) {
    if (!(n_total >= 0.0)) throw DomainError("N_total must be >= 0");
    if (n_total > capacity) {
      throw DomainError("N_total " + std::to_string(n_total) + " exceeds network capacity " +
                        std::to_string(capacity));
    }
  }
  for (double f : fraction_grid) {
    if (!(f >= 0.0 && f <= 1.0)) throw DomainError("fraction must be in [0,1]");
  }

  const double lane_km = graph.total_lane_km();
  const std::size_t cells = n_total_grid.size() * fraction_grid.size();
  std::vector<long long> frag_counts(cells, 0);

  const long long total = static_cast<long long>(cells) * replicates;
  std::vector<std::uint8_t> fragmented(static_cast<std::size_t>(total), 0);
  run_indexed(total, workers, [&](long long gi) {
    const std::size_t cell = static_cast<std::size_t>(gi) / static_cast<std::size_t>(replicates);
    const std::size_t ni = cell / fraction_grid.size();
    const std::size_t fi = cell % fraction_grid.size();
    const double rho_h = n_total_grid[ni] * fraction_grid[fi] / lane_km;
    const auto outcome = prune_network(graph, rho_h, s_m, mode,
                                       Rng::derive_seed(seed, static_cast<std::uint64_t>(gi)));
    const int largest = outcome.component_sizes.empty() ? 0 : outcome.component_sizes[0];
    const int second = second_largest(outcome.component_sizes);
    fragmented[static_cast<std::size_t>(gi)] =
        static_cast<std::uint8_t>(largest > 0 && second >= frag_ratio * largest ? 1 : 0);
  });
  for (long long gi = 0; gi < total; ++gi) {
    frag_counts[static_cast<std::size_t>(gi) / static_cast<std::size_t>(replicates)] +=
        fragmented[static_cast<std::size_t>(gi)];
  }

  std::vector<HeatmapCell> out;
  out.reserve(cells);
  for (std::size_t ni = 0; ni < n_total_grid.size(); ++ni) {
    for (std::size_t fi = 0; fi < fraction_grid.size(); ++fi) {
      const std::size_t cell = ni * fraction_grid.size() + fi;
      const double p = static_cast<double>(frag_counts[cell]) / replicates;
      HeatmapCell c;
      c.n_total = n_total_grid[ni];
      c.fraction = fraction_grid[fi];
      c.rho_h = n_total_grid[ni] * fraction_grid[fi] / lane_km;
      c.frag_prob = p;
      c.std_error = std::sqrt(p * (1.0 - p) / replicates);
      out.push_back(c);
    }
  }
  return out;
}

long long network_capacity(const CityGraph& graph, double d_m) {
  if (!(d_m > 0.0)) throw DomainError("effective vehicle length must be > 0");
  return static_cast<long long>(std::floor(graph.total_lane_m() / d_m));
}

double intersection_correction(double length_m, int lanes, double rho_h, double s_m,
                               double l0_m, SingleLaneMode mode) {
  if (!(length_m > 0.0)) throw DomainError("road length must be > 0");
  if (lanes < 1) throw DomainError("lane count must be >= 1");
  if (!(rho_h >= 0.0)) throw DomainError("rho_H must be >= 0");
  if (!(s_m > 0.0 && s_m <= length_m)) throw DomainError("s must satisfy 0 < s <= L");
  if (!(l0_m >= 0.0)) throw DomainError("intersection length must be >= 0");
  if (l0_m == 0.0 || rho_h == 0.0) return 0.0;

  const double rho_m = rho_h / 1000.0;  // vehicles per meter per lane
  if (lanes == 1) {
    // AlwaysBlocked pins P at 1, so lengthening the road changes nothing.
    if (mode == SingleLaneMode::kAlwaysBlocked) return 0.0;
    return rho_m * std::exp(-rho_m * length_m) * l0_m;
  }

  const double pair = pair_block_prob(s_m, length_m);
  double q = 1.0;
  for (int i = 1; i < lanes; ++i) q *= pair;
  const double A = 1.0 - q;
  if (!(A > 0.0)) return 0.0;  // saturated at P = 1

  const double n = rho_m * length_m;  // vehicles per lane
  double exponent = 1.0;
  for (int i = 0; i < lanes; ++i) exponent *= n;
  double exponent_dL = lanes * rho_m;  // d/dL of n^lanes
  for (int i = 1; i < lanes; ++i) exponent_dL *= n;

  // d/dL of pair = (s/L)(2 - s/L)
  const double pair_dL =
      -2.0 * s_m / (length_m * length_m) + 2.0 * s_m * s_m / (length_m * length_m * length_m);
  double q_dL = static_cast<double>(lanes - 1) * pair_dL;
  for (int i = 2; i < lanes; ++i) q_dL *= pair;

  const double logA = std::log1p(-q);
  const double p_clear = std::exp(exponent * logA);  // [1 - q]^(n^lanes)
  const double dP_dL = -p_clear * (exponent_dL * logA - exponent * q_dL / A);
  return dP_dL * l0_m;
}

}  // namespace gridlock
