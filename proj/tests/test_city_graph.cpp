#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <doctest.h>

#include "gridlock/city_graph.hpp"
#include "gridlock/errors.hpp"
#include "gridlock/percolation.hpp"

using namespace gridlock;

namespace {

LanesDistribution mixed_lanes() {
  return LanesDistribution{{1, 2, 3}, {0.25, 0.5, 0.25}};
}

LanesDistribution fixed_lanes(int lanes) { return LanesDistribution{{lanes}, {1.0}}; }

CityGraph path_graph(int n, double length = 100.0, int lanes = 2) {
  CityGraph graph;
  for (int i = 0; i < n; ++i) {
    CityNode node;
    node.ext_id = std::to_string(i);
    graph.nodes.push_back(node);
  }
  for (int i = 0; i + 1 < n; ++i) {
    graph.edges.push_back(CityEdge{i, i + 1, length, lanes});
  }
  return graph;
}

}  // namespace

TEST_CASE("generate_grid") {
  SUBCASE("2x2 lattice has 4 nodes and 4 edges") {
    const auto graph = generate_grid(2, 2, 100.0, 100.0, fixed_lanes(2), 1);
    CHECK(graph.nodes.size() == 4);
    CHECK(graph.edges.size() == 4);
    for (const auto& edge : graph.edges) CHECK(edge.length_m == 100.0);
  }
  SUBCASE("50x50 lattice has 2500 nodes and 4900 edges") {
    const auto graph = generate_grid(50, 50, 80.0, 200.0, mixed_lanes(), 7);
    CHECK(graph.nodes.size() == 2500);
    CHECK(graph.edges.size() == 4900);
    for (const auto& edge : graph.edges) {
      CHECK(edge.length_m >= 80.0);
      CHECK(edge.length_m <= 200.0);
      CHECK(edge.lanes >= 1);
      CHECK(edge.lanes <= 3);
    }
  }
  SUBCASE("identical seeds give identical graphs") {
    const auto a = generate_grid(10, 12, 80.0, 200.0, mixed_lanes(), 99);
    const auto b = generate_grid(10, 12, 80.0, 200.0, mixed_lanes(), 99);
    REQUIRE(a.edges.size() == b.edges.size());
    for (std::size_t e = 0; e < a.edges.size(); ++e) {
      CHECK(a.edges[e].length_m == b.edges[e].length_m);
      CHECK(a.edges[e].lanes == b.edges[e].lanes);
    }
  }
  SUBCASE("degenerate sizes are rejected") {
    CHECK_THROWS_AS(generate_grid(1, 5, 100.0, 100.0, fixed_lanes(1), 1), DomainError);
    CHECK_THROWS_AS(generate_grid(5, 1, 100.0, 100.0, fixed_lanes(1), 1), DomainError);
  }
}

TEST_CASE("edge_block_prob") {
  const CityEdge two_lane{0, 1, 100.0, 2};
  CHECK(edge_block_prob(two_lane, 0.0, 14.0, SingleLaneMode::kAlwaysBlocked) == 0.0);

  const CityEdge one_lane{0, 1, 100.0, 1};
  CHECK(edge_block_prob(one_lane, 3.0, 14.0, SingleLaneMode::kAlwaysBlocked) == 1.0);

  const double p = edge_block_prob(two_lane, 13.0, 14.0, SingleLaneMode::kAlwaysBlocked);
  CHECK(p == doctest::Approx(0.399).epsilon(2e-3));
  CHECK(p == doctest::Approx(0.39937311886677007).epsilon(1e-12));

  // Streets shorter than the blocking distance saturate instead of failing.
  const CityEdge stub{0, 1, 10.0, 2};
  const double p_stub = edge_block_prob(stub, 50.0, 14.0, SingleLaneMode::kAlwaysBlocked);
  CHECK(p_stub > 0.0);
  CHECK(p_stub <= 1.0);
}

TEST_CASE("prune_network") {
  const auto graph = generate_grid(5, 5, 100.0, 100.0, fixed_lanes(2), 3);
  SUBCASE("rho 0 blocks nothing") {
    const auto outcome = prune_network(graph, 0.0, 14.0, SingleLaneMode::kAlwaysBlocked, 11);
    CHECK(outcome.blocked_edges.empty());
    REQUIRE(outcome.component_sizes.size() == 1);
    CHECK(outcome.component_sizes[0] == 25);
  }
  SUBCASE("huge rho blocks everything") {
    const auto outcome = prune_network(graph, 1e6, 14.0, SingleLaneMode::kAlwaysBlocked, 11);
    CHECK(outcome.blocked_edges.size() == graph.edges.size());
    CHECK(outcome.component_sizes.size() == 25);
    for (int s : outcome.component_sizes) CHECK(s == 1);
  }
  SUBCASE("fixed seed reproduces the blocked set") {
    const auto a = prune_network(graph, 12.0, 14.0, SingleLaneMode::kAlwaysBlocked, 2024);
    const auto b = prune_network(graph, 12.0, 14.0, SingleLaneMode::kAlwaysBlocked, 2024);
    CHECK(a.blocked_edges == b.blocked_edges);
    CHECK(a.component_sizes == b.component_sizes);
  }
}

TEST_CASE("component_sizes") {
  const auto path = path_graph(6);
  SUBCASE("nothing blocked: one component") {
    const auto sizes = component_sizes(path, std::vector<std::uint8_t>(5, 0));
    CHECK(sizes == std::vector<int>{6});
    CHECK(second_largest(sizes) == 0);
  }
  SUBCASE("cutting the middle edge splits the path in half") {
    std::vector<std::uint8_t> blocked(5, 0);
    blocked[2] = 1;
    const auto sizes = component_sizes(path, blocked);
    CHECK(sizes == std::vector<int>{3, 3});
  }
  SUBCASE("self-loops never connect anything") {
    CityGraph graph = path_graph(3);
    graph.edges.push_back(CityEdge{0, 0, 50.0, 1});
    std::vector<std::uint8_t> blocked(graph.edges.size(), 0);
    blocked[0] = 1;
    blocked[1] = 1;
    const auto sizes = component_sizes(graph, blocked);
    CHECK(sizes == std::vector<int>{1, 1, 1});
  }
  SUBCASE("sizes always sum to the node count") {
    const auto graph = generate_grid(8, 8, 100.0, 150.0, mixed_lanes(), 5);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const auto outcome = prune_network(graph, 10.0, 14.0, SingleLaneMode::kAlwaysBlocked, seed);
      const long long total = std::accumulate(outcome.component_sizes.begin(),
                                              outcome.component_sizes.end(), 0LL);
      CHECK(total == 64);
      CHECK(std::is_sorted(outcome.component_sizes.rbegin(), outcome.component_sizes.rend()));
      CHECK(second_largest(outcome.component_sizes) <=
            (outcome.component_sizes.empty() ? 0 : outcome.component_sizes[0]));
    }
  }
}

TEST_CASE("sweep_density") {
  const auto graph = generate_grid(12, 12, 100.0, 150.0, mixed_lanes(), 17);
  const std::vector<double> grid = {0.0, 4.0, 8.0, 12.0, 16.0, 20.0, 24.0};

  SUBCASE("rho 0 point: intact city") {
    const auto result = sweep_density(graph, grid, 5, 14.0, SingleLaneMode::kAlwaysBlocked, 3);
    CHECK(result.mean_largest[0] == 144.0);
    CHECK(result.std_largest[0] == 0.0);
    CHECK(result.mean_second[0] == 0.0);
  }
  SUBCASE("deterministic and worker-count independent") {
    const auto a = sweep_density(graph, grid, 6, 14.0, SingleLaneMode::kAlwaysBlocked, 5, 1);
    const auto b = sweep_density(graph, grid, 6, 14.0, SingleLaneMode::kAlwaysBlocked, 5, 3);
    CHECK(a.mean_largest == b.mean_largest);
    CHECK(a.mean_second == b.mean_second);
    CHECK(a.rho_critical == b.rho_critical);
  }
  SUBCASE("critical density lies on the grid") {
    const auto result = sweep_density(graph, grid, 10, 14.0, SingleLaneMode::kAlwaysBlocked, 3);
    CHECK(std::find(grid.begin(), grid.end(), result.rho_critical) != grid.end());
  }
  SUBCASE("mean largest component is nonincreasing in rho_H (2 sigma)") {
    const auto result = sweep_density(graph, grid, 50, 14.0, SingleLaneMode::kAlwaysBlocked, 21);
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
      const double se = std::sqrt((result.std_largest[i] * result.std_largest[i] +
                                   result.std_largest[i + 1] * result.std_largest[i + 1]) /
                                  50.0);
      CHECK(result.mean_largest[i + 1] <= result.mean_largest[i] + 2.0 * se + 1e-12);
    }
  }
  SUBCASE("empty grid is rejected") {
    CHECK_THROWS_AS(sweep_density(graph, {}, 5, 14.0, SingleLaneMode::kAlwaysBlocked, 3),
                    DomainError);
  }
}

TEST_CASE("service_accessibility") {
  const auto graph = path_graph(10);
  ServiceMap services;
  services["hospital"] = {2, 7};
  services["coffee"] = {0};
  services["landmark"] = {};

  SUBCASE("intact network: every nonempty category fully accessible") {
    const auto access =
        service_accessibility(graph, std::vector<std::uint8_t>(graph.edges.size(), 0), services);
    CHECK(access.at("hospital") == 1.0);
    CHECK(access.at("coffee") == 1.0);
    CHECK(access.at("landmark") == 0.0);
  }
  SUBCASE("fully blocked network: exactly the service nodes keep access") {
    const auto access =
        service_accessibility(graph, std::vector<std::uint8_t>(graph.edges.size(), 1), services);
    CHECK(access.at("hospital") == 2.0 / 10.0);
    CHECK(access.at("coffee") == 1.0 / 10.0);
    CHECK(access.at("landmark") == 0.0);
  }
  SUBCASE("blocking more edges never improves access") {
    Rng rng(4);
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<std::uint8_t> blocked(graph.edges.size(), 0);
      for (auto& b : blocked) b = rng.next_double() < 0.3 ? 1 : 0;
      std::vector<std::uint8_t> more = blocked;
      for (auto& b : more) {
        if (b == 0 && rng.next_double() < 0.3) b = 1;
      }
      const auto base = service_accessibility(graph, blocked, services);
      const auto worse = service_accessibility(graph, more, services);
      for (const auto& [category, value] : base) {
        CHECK(worse.at(category) <= value + 1e-12);
      }
    }
  }
  SUBCASE("out-of-range service node is rejected") {
    ServiceMap bad;
    bad["x"] = {99};
    CHECK_THROWS_AS(
        service_accessibility(graph, std::vector<std::uint8_t>(graph.edges.size(), 0), bad),
        DomainError);
  }
}

TEST_CASE("network_capacity") {
  SUBCASE("700 m of single lane fits 100 vehicles at d = 7") {
    CityGraph graph = path_graph(2, 700.0, 1);
    CHECK(network_capacity(graph, 7.0) == 100);
  }
  SUBCASE("empty graph holds nothing") {
    CityGraph graph;
    CHECK(network_capacity(graph, 7.0) == 0);
  }
  SUBCASE("mixed lanes") {
    CityGraph graph;
    graph.nodes.resize(3);
    graph.nodes[0].ext_id = "0";
    graph.nodes[1].ext_id = "1";
    graph.nodes[2].ext_id = "2";
    graph.edges.push_back(CityEdge{0, 1, 100.0, 2});
    graph.edges.push_back(CityEdge{1, 2, 50.0, 3});
    CHECK(network_capacity(graph, 7.0) == 50);
  }
  SUBCASE("invalid d") {
    CHECK_THROWS_AS(network_capacity(path_graph(2), 0.0), DomainError);
  }
}

TEST_CASE("fragmentation_heatmap") {
  const auto graph = generate_grid(10, 10, 100.0, 100.0, fixed_lanes(2), 23);
  const double lane_km = graph.total_lane_km();

  SUBCASE("fraction-zero cells never fragment") {
    const std::vector<double> n_grid = {1000.0, 2000.0};
    const std::vector<double> f_grid = {0.0};
    const auto cells = fragmentation_heatmap(graph, n_grid, f_grid, 20, 14.0,
                                             SingleLaneMode::kAlwaysBlocked, 0.5, 7.0, 5);
    for (const auto& cell : cells) {
      CHECK(cell.frag_prob == 0.0);
      CHECK(cell.rho_h == 0.0);
    }
  }
  SUBCASE("cells sharing the derived density agree within 3 sigma") {
    const std::vector<double> n_grid = {1000.0, 2000.0};
    const std::vector<double> f_grid = {0.2, 0.4};
    const auto cells = fragmentation_heatmap(graph, n_grid, f_grid, 60, 14.0,
                                             SingleLaneMode::kAlwaysBlocked, 0.5, 7.0, 5);
    // (1000, 0.4) and (2000, 0.2) share N*f = 400.
    const auto& a = cells[1];
    const auto& b = cells[2];
    CHECK(a.rho_h == doctest::Approx(b.rho_h).epsilon(1e-12));
    const double sigma =
        std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
    CHECK(std::abs(a.frag_prob - b.frag_prob) <= 3.0 * sigma + 1e-12);
  }
  SUBCASE("far above critical the network always fragments") {
    // rho_H = N*f/lane-km far beyond the lattice's critical density.
    const double n_total = std::floor(lane_km * 40.0);
    const std::vector<double> n_grid = {n_total};
    const std::vector<double> f_grid = {1.0};
    const auto cells = fragmentation_heatmap(graph, n_grid, f_grid, 30, 14.0,
                                             SingleLaneMode::kAlwaysBlocked, 0.5, 7.0, 5);
    CHECK(cells[0].frag_prob >= 0.9);
  }
  SUBCASE("over-capacity totals are rejected") {
    const double capacity = static_cast<double>(network_capacity(graph, 7.0));
    const std::vector<double> n_grid = {capacity + 1.0};
    const std::vector<double> f_grid = {0.1};
    CHECK_THROWS_AS(fragmentation_heatmap(graph, n_grid, f_grid, 5, 14.0,
                                          SingleLaneMode::kAlwaysBlocked, 0.5, 7.0, 5),
                    DomainError);
  }
}

TEST_CASE("intersection_correction") {
  SUBCASE("zero intersection length changes nothing") {
    CHECK(intersection_correction(1000.0, 2, 15.0, 14.0, 0.0) == 0.0);
  }
  SUBCASE("reference point: 1 km two-lane road, 20 m intersection") {
    const double delta = intersection_correction(1000.0, 2, 15.0, 14.0, 20.0);
    CHECK(std::abs(delta - 2e-4) <= 0.25 * 2e-4);
    CHECK(delta == doctest::Approx(2.2128566844038938e-4).epsilon(1e-9));
  }
  SUBCASE("analytic derivative agrees with a central finite difference") {
    for (int lanes : {2, 3}) {
      for (double rho : {5.0, 15.0, 25.0}) {
        const double l0 = 20.0;
        const double h = 1.0;
        auto p_of = [&](double length_m) {
          return percolation_prob(
              PercolationQuery{lanes, rho, length_m / 1000.0, 14.0,
                               SingleLaneMode::kAlwaysBlocked});
        };
        const double fd = (p_of(1000.0 + h) - p_of(1000.0 - h)) / (2.0 * h) * l0;
        const double analytic = intersection_correction(1000.0, lanes, rho, 14.0, l0);
        CHECK(analytic == doctest::Approx(fd).epsilon(1e-4));
      }
    }
  }
  SUBCASE("single lane") {
    CHECK(intersection_correction(1000.0, 1, 15.0, 14.0, 20.0) == 0.0);
    const double poisson =
        intersection_correction(1000.0, 1, 2.0, 14.0, 20.0, SingleLaneMode::kPoisson);
    CHECK(poisson == doctest::Approx(0.002 * std::exp(-2.0) * 20.0).epsilon(1e-12));
  }
}

TEST_CASE("graph validation") {
  CityGraph graph = path_graph(3);
  graph.edges.push_back(CityEdge{0, 9, 100.0, 1});
  CHECK_THROWS_AS(graph.validate(), LoadError);
  graph.edges.back() = CityEdge{0, 1, -5.0, 1};
  CHECK_THROWS_AS(graph.validate(), LoadError);
  graph.edges.back() = CityEdge{0, 1, 5.0, 0};
  CHECK_THROWS_AS(graph.validate(), LoadError);
}
