#pragma once

#include <string>

#include "gridlock/city_graph.hpp"
#include "gridlock/percolation.hpp"

namespace gridlock {

/// Loads a street network from a GraphML file (edge attributes `length` in
/// meters and `lanes`, optional node attributes `x`,`y`) or a CSV edge list
/// with header `u,v,length_m,lanes` (the lanes column may be absent).
/// Missing or unusable lane attributes default to 1 and are counted in
/// CityGraph::defaulted_lanes with one warning. Malformed records throw
/// LoadError naming the record.
CityGraph load_graph(const std::string& path);

CityGraph load_graph_csv(const std::string& path);
CityGraph load_graph_graphml(const std::string& path);

/// CSV edge list, header `u,v,length_m,lanes`.
std::string graph_to_csv(const CityGraph& graph);

/// GraphML with length/lanes edge attributes and x/y node attributes.
std::string graph_to_graphml(const CityGraph& graph);

/// Services CSV: header `category,node_id` (ids must exist in the graph) or
/// `category,x,y` (each location maps to the nearest node by planar
/// Euclidean distance; the graph must carry coordinates). Returns node
/// indices per category.
ServiceMap load_services(const std::string& path, const CityGraph& graph);

/// Road snapshot CSV: header `vehicle_id,lane,x_m` with optional `hacked`
/// column in {0,1}; columns may appear in any order. Lane indices must lie
/// in [0, lanes); when `lanes` is 0 the lane count is inferred as
/// max(lane)+1. Positions must lie in [0, length_m).
RoadSnapshot load_snapshot(const std::string& path, double length_m, int lanes = 0);

}  // namespace gridlock
