#include "gridlock/graph_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include "gridlock/csv.hpp"
#include "gridlock/errors.hpp"
#include "gridlock/log.hpp"

namespace gridlock {

namespace {

bool parse_double(const std::string& text, double& out) {
  try {
    std::size_t used = 0;
    out = std::stod(text, &used);
    while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
    return used == text.size();
  } catch (const std::exception&) {
    return false;
  }
}

// Lane attributes in map exports are messy ("2", "2;3", "['2','3']"); take
// the first integer found, or report failure.
bool parse_lanes(const std::string& text, int& out) {
  std::size_t i = 0;
  while (i < text.size() && !std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
  if (i == text.size()) return false;
  long value = 0;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
    value = value * 10 + (text[i] - '0');
    if (value > 1000) return false;
    ++i;
  }
  out = static_cast<int>(value);
  return value >= 1;
}

std::string read_whole_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Minimal XML scanner, just enough for GraphML as produced by common tools.

std::string decode_entities(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '&') {
      out += text[i];
      continue;
    }
    const auto end = text.find(';', i);
    if (end == std::string::npos) {
      out += text[i];
      continue;
    }
    const std::string name = text.substr(i + 1, end - i - 1);
    if (name == "amp") out += '&';
    else if (name == "lt") out += '<';
    else if (name == "gt") out += '>';
    else if (name == "quot") out += '"';
    else if (name == "apos") out += '\'';
    else out += text.substr(i, end - i + 1);
    i = end;
  }
  return out;
}

std::string encode_entities(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct XmlTag {
  std::string name;
  std::map<std::string, std::string> attrs;
  bool self_closing = false;
  bool closing = false;
  std::size_t content_begin = 0;  // offset just past '>'
};

class XmlScanner {
 public:
  XmlScanner(const std::string& text, std::string path)
      : text_(text), path_(std::move(path)) {}

  // Next element tag; skips comments, declarations and processing
  // instructions. Returns false at end of input.
  bool next(XmlTag& tag) {
    while (true) {
      const auto lt = text_.find('<', pos_);
      if (lt == std::string::npos) return false;
      if (text_.compare(lt, 4, "<!--") == 0) {
        const auto end = text_.find("-->", lt);
        if (end == std::string::npos) fail("unterminated comment");
        pos_ = end + 3;
        continue;
      }
      if (text_.compare(lt, 2, "<?") == 0 || text_.compare(lt, 2, "<!") == 0) {
        const auto end = text_.find('>', lt);
        if (end == std::string::npos) fail("unterminated declaration");
        pos_ = end + 1;
        continue;
      }
      return parse_tag(lt, tag);
    }
  }

  // Text content from `from` to the next '<'.
  std::string text_until_tag(std::size_t from) const {
    const auto lt = text_.find('<', from);
    return decode_entities(text_.substr(from, lt == std::string::npos ? std::string::npos
                                                                      : lt - from));
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw LoadError(path_ + ": malformed XML: " + what);
  }

  bool parse_tag(std::size_t lt, XmlTag& tag) {
    std::size_t i = lt + 1;
    tag = XmlTag{};
    if (i < text_.size() && text_[i] == '/') {
      tag.closing = true;
      ++i;
    }
    const std::size_t name_begin = i;
    while (i < text_.size() && text_[i] != '>' && text_[i] != '/' &&
           !std::isspace(static_cast<unsigned char>(text_[i]))) {
      ++i;
    }
    tag.name = text_.substr(name_begin, i - name_begin);
    if (tag.name.empty()) fail("empty tag name");

    while (true) {
      while (i < text_.size() && std::isspace(static_cast<unsigned char>(text_[i]))) ++i;
      if (i >= text_.size()) fail("unterminated tag " + tag.name);
      if (text_[i] == '>') {
        ++i;
        break;
      }
      if (text_[i] == '/') {
        tag.self_closing = true;
        ++i;
        continue;
      }
      const std::size_t key_begin = i;
      while (i < text_.size() && text_[i] != '=' &&
             !std::isspace(static_cast<unsigned char>(text_[i]))) {
        ++i;
      }
      const std::string key = text_.substr(key_begin, i - key_begin);
      while (i < text_.size() && std::isspace(static_cast<unsigned char>(text_[i]))) ++i;
      if (i >= text_.size() || text_[i] != '=') fail("attribute without value in " + tag.name);
      ++i;
      while (i < text_.size() && std::isspace(static_cast<unsigned char>(text_[i]))) ++i;
      if (i >= text_.size() || (text_[i] != '"' && text_[i] != '\'')) {
        fail("unquoted attribute value in " + tag.name);
      }
      const char quote = text_[i++];
      const auto end = text_.find(quote, i);
      if (end == std::string::npos) fail("unterminated attribute in " + tag.name);
      tag.attrs[key] = decode_entities(text_.substr(i, end - i));
      i = end + 1;
    }
    tag.content_begin = i;
    pos_ = i;
    return true;
  }

  const std::string& text_;
  std::string path_;
  std::size_t pos_ = 0;
};

struct GraphBuilder {
  CityGraph graph;
  std::map<std::string, int> index;
  std::string path;

  int node_index(const std::string& ext_id, bool create) {
    const auto it = index.find(ext_id);
    if (it != index.end()) return it->second;
    if (!create) {
      throw LoadError(path + ": edge references unknown node '" + ext_id + "'");
    }
    const int idx = static_cast<int>(graph.nodes.size());
    CityNode node;
    node.ext_id = ext_id;
    graph.nodes.push_back(node);
    index.emplace(ext_id, idx);
    return idx;
  }
};

}  // namespace

CityGraph load_graph_csv(const std::string& path) {
  const auto parsed = csv::read_file(path);
  const auto& header = parsed.header;
  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  };
  const auto col_u = column("u");
  const auto col_v = column("v");
  const auto col_len = column("length_m");
  const auto col_lanes = column("lanes");
  if (!col_u || !col_v || !col_len) {
    throw LoadError(path + ": edge list header must contain u,v,length_m[,lanes]");
  }

  GraphBuilder builder;
  builder.path = path;
  bool lanes_warned = false;
  for (std::size_t r = 0; r < parsed.rows.size(); ++r) {
    const auto& row = parsed.rows[r];
    const std::string record = path + " row " + std::to_string(r + 2);
    CityEdge edge;
    edge.u = builder.node_index(row[*col_u], true);
    edge.v = builder.node_index(row[*col_v], true);
    if (!parse_double(row[*col_len], edge.length_m) || !(edge.length_m > 0.0)) {
      throw LoadError(record + ": bad length '" + row[*col_len] + "'");
    }
    if (col_lanes) {
      if (!parse_lanes(row[*col_lanes], edge.lanes)) {
        edge.lanes = 1;
        ++builder.graph.defaulted_lanes;
      }
    } else {
      edge.lanes = 1;
      ++builder.graph.defaulted_lanes;
      if (!lanes_warned) {
        log_warn(path + ": no lanes column; defaulting all lane counts to 1");
        lanes_warned = true;
      }
    }
    builder.graph.edges.push_back(edge);
  }
  if (builder.graph.defaulted_lanes > 0 && col_lanes) {
    log_warn(path + ": " + std::to_string(builder.graph.defaulted_lanes) +
             " edges with unusable lane values defaulted to 1");
  }
  builder.graph.validate();
  return builder.graph;
}

CityGraph load_graph_graphml(const std::string& path) {
  const std::string text = read_whole_file(path);
  XmlScanner scanner(text, path);

  // key id -> attribute name, per domain
  std::map<std::string, std::string> node_keys;
  std::map<std::string, std::string> edge_keys;

  GraphBuilder builder;
  builder.path = path;
  CityGraph& graph = builder.graph;

  enum class Scope { kNone, kNode, kEdge };
  Scope scope = Scope::kNone;
  int scope_node = -1;
  CityEdge edge;
  bool edge_has_length = false;
  bool edge_has_lanes = false;
  bool saw_node_element = false;
  std::size_t edge_count = 0;

  auto finish_edge = [&]() {
    if (scope != Scope::kEdge) return;
    ++edge_count;
    if (!edge_has_length) {
      throw LoadError(path + ": edge " + std::to_string(edge_count) + " has no length attribute");
    }
    if (!(edge.length_m > 0.0)) {
      throw LoadError(path + ": edge " + std::to_string(edge_count) + " has non-positive length");
    }
    if (!edge_has_lanes) {
      edge.lanes = 1;
      ++graph.defaulted_lanes;
    }
    graph.edges.push_back(edge);
    scope = Scope::kNone;
  };

  XmlTag tag;
  while (scanner.next(tag)) {
    if (tag.closing) {
      if (tag.name == "edge") finish_edge();
      if (tag.name == "node") scope = Scope::kNone;
      continue;
    }
    if (tag.name == "graph") {
      const auto it = tag.attrs.find("edgedefault");
      graph.directed = it != tag.attrs.end() && it->second == "directed";
    } else if (tag.name == "key") {
      const auto id = tag.attrs.find("id");
      const auto name = tag.attrs.find("attr.name");
      const auto domain = tag.attrs.find("for");
      if (id != tag.attrs.end() && name != tag.attrs.end() && domain != tag.attrs.end()) {
        if (domain->second == "node") node_keys[id->second] = name->second;
        if (domain->second == "edge") edge_keys[id->second] = name->second;
      }
    } else if (tag.name == "node") {
      const auto id = tag.attrs.find("id");
      if (id == tag.attrs.end()) throw LoadError(path + ": node without id");
      saw_node_element = true;
      scope_node = builder.node_index(id->second, true);
      scope = tag.self_closing ? Scope::kNone : Scope::kNode;
    } else if (tag.name == "edge") {
      const auto src = tag.attrs.find("source");
      const auto dst = tag.attrs.find("target");
      if (src == tag.attrs.end() || dst == tag.attrs.end()) {
        throw LoadError(path + ": edge without source/target");
      }
      // Unknown endpoints are an error only when the file declares nodes.
      edge = CityEdge{};
      edge.u = builder.node_index(src->second, !saw_node_element);
      edge.v = builder.node_index(dst->second, !saw_node_element);
      edge_has_length = false;
      edge_has_lanes = false;
      if (tag.self_closing) {
        scope = Scope::kEdge;
        finish_edge();
      } else {
        scope = Scope::kEdge;
      }
    } else if (tag.name == "data") {
      const auto key = tag.attrs.find("key");
      if (key == tag.attrs.end() || tag.self_closing) continue;
      const std::string value = scanner.text_until_tag(tag.content_begin);
      if (scope == Scope::kNode) {
        const auto it = node_keys.find(key->second);
        if (it == node_keys.end()) continue;
        auto& node = graph.nodes[static_cast<std::size_t>(scope_node)];
        double coord = 0.0;
        if (it->second == "x" && parse_double(value, coord)) {
          node.x = coord;
          node.has_coords = true;
        } else if (it->second == "y" && parse_double(value, coord)) {
          node.y = coord;
          node.has_coords = true;
        }
      } else if (scope == Scope::kEdge) {
        const auto it = edge_keys.find(key->second);
        if (it == edge_keys.end()) continue;
        if (it->second == "length") {
          if (!parse_double(value, edge.length_m)) {
            throw LoadError(path + ": edge " + std::to_string(edge_count + 1) +
                            " has unparsable length '" + value + "'");
          }
          edge_has_length = true;
        } else if (it->second == "lanes") {
          if (parse_lanes(value, edge.lanes)) {
            edge_has_lanes = true;
          } else {
            edge.lanes = 1;
            edge_has_lanes = true;
            ++graph.defaulted_lanes;
          }
        }
      }
    }
  }
  if (graph.defaulted_lanes > 0) {
    log_warn(path + ": " + std::to_string(graph.defaulted_lanes) +
             " edges without usable lane counts defaulted to 1");
  }
  graph.validate();
  return graph;
}

CityGraph load_graph(const std::string& path) {
  const auto dot = path.rfind('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  if (ext == ".graphml" || ext == ".xml") return load_graph_graphml(path);
  if (ext == ".csv") return load_graph_csv(path);
  const std::string text = read_whole_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '<') return load_graph_graphml(path);
  return load_graph_csv(path);
}

std::string graph_to_csv(const CityGraph& graph) {
  csv::Table table({"u", "v", "length_m", "lanes"});
  for (const auto& edge : graph.edges) {
    table.begin_row()
        .add(graph.nodes[static_cast<std::size_t>(edge.u)].ext_id)
        .add(graph.nodes[static_cast<std::size_t>(edge.v)].ext_id)
        .add(edge.length_m)
        .add(edge.lanes);
  }
  return table.str();
}

std::string graph_to_graphml(const CityGraph& graph) {
  std::string out;
  out += "<?xml version='1.0' encoding='utf-8'?>\n";
  out += "<graphml>\n";
  out += "  <key id=\"dx\" for=\"node\" attr.name=\"x\" attr.type=\"double\"/>\n";
  out += "  <key id=\"dy\" for=\"node\" attr.name=\"y\" attr.type=\"double\"/>\n";
  out += "  <key id=\"dl\" for=\"edge\" attr.name=\"length\" attr.type=\"double\"/>\n";
  out += "  <key id=\"dn\" for=\"edge\" attr.name=\"lanes\" attr.type=\"int\"/>\n";
  out += std::string("  <graph edgedefault=\"") + (graph.directed ? "directed" : "undirected") +
         "\">\n";
  for (const auto& node : graph.nodes) {
    out += "    <node id=\"" + encode_entities(node.ext_id) + "\"";
    if (node.has_coords) {
      out += ">\n";
      out += "      <data key=\"dx\">" + csv::format_double(node.x) + "</data>\n";
      out += "      <data key=\"dy\">" + csv::format_double(node.y) + "</data>\n";
      out += "    </node>\n";
    } else {
      out += "/>\n";
    }
  }
  for (const auto& edge : graph.edges) {
    out += "    <edge source=\"" +
           encode_entities(graph.nodes[static_cast<std::size_t>(edge.u)].ext_id) +
           "\" target=\"" +
           encode_entities(graph.nodes[static_cast<std::size_t>(edge.v)].ext_id) + "\">\n";
    out += "      <data key=\"dl\">" + csv::format_double(edge.length_m) + "</data>\n";
    out += "      <data key=\"dn\">" + csv::format_int(edge.lanes) + "</data>\n";
    out += "    </edge>\n";
  }
  out += "  </graph>\n";
  out += "</graphml>\n";
  return out;
}

ServiceMap load_services(const std::string& path, const CityGraph& graph) {
  const auto parsed = csv::read_file(path);
  const auto& header = parsed.header;

  ServiceMap services;
  if (header == std::vector<std::string>{"category", "node_id"}) {
    const auto index = graph.build_id_index();
    for (std::size_t r = 0; r < parsed.rows.size(); ++r) {
      const auto& row = parsed.rows[r];
      const auto it = index.find(row[1]);
      if (it == index.end()) {
        throw LoadError(path + " row " + std::to_string(r + 2) + ": unknown node id '" +
                        row[1] + "'");
      }
      services[row[0]].insert(it->second);
    }
    return services;
  }
  if (header == std::vector<std::string>{"category", "x", "y"}) {
    bool any_coords = false;
    for (const auto& node : graph.nodes) any_coords |= node.has_coords;
    if (!any_coords) {
      throw LoadError(path + ": service locations use coordinates but the graph has none");
    }
    for (std::size_t r = 0; r < parsed.rows.size(); ++r) {
      const auto& row = parsed.rows[r];
      double x = 0.0;
      double y = 0.0;
      if (!parse_double(row[1], x) || !parse_double(row[2], y)) {
        throw LoadError(path + " row " + std::to_string(r + 2) + ": bad coordinates");
      }
      int best = -1;
      double best_dist = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
        const auto& node = graph.nodes[i];
        if (!node.has_coords) continue;
        const double dist = (node.x - x) * (node.x - x) + (node.y - y) * (node.y - y);
        if (dist < best_dist) {
          best_dist = dist;
          best = static_cast<int>(i);
        }
      }
      services[row[0]].insert(best);
    }
    return services;
  }
  throw LoadError(path + ": services header must be category,node_id or category,x,y");
}

RoadSnapshot load_snapshot(const std::string& path, double length_m, int lanes) {
  if (!(length_m > 0.0)) throw DomainError("snapshot length must be > 0");
  const auto parsed = csv::read_file(path);
  const auto& header = parsed.header;

  std::optional<std::size_t> col_id;
  std::optional<std::size_t> col_lane;
  std::optional<std::size_t> col_x;
  std::optional<std::size_t> col_hacked;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "vehicle_id") col_id = i;
    else if (header[i] == "lane") col_lane = i;
    else if (header[i] == "x_m") col_x = i;
    else if (header[i] == "hacked") col_hacked = i;
    else throw LoadError(path + ": unknown snapshot column '" + header[i] + "'");
  }
  if (!col_id || !col_lane || !col_x) {
    throw LoadError(path + ": snapshot header must contain vehicle_id,lane,x_m[,hacked]");
  }

  struct Row {
    int lane;
    double x;
    std::uint8_t hacked;
  };
  std::vector<Row> rows;
  int max_lane = -1;
  for (std::size_t r = 0; r < parsed.rows.size(); ++r) {
    const auto& row = parsed.rows[r];
    const std::string record = path + " row " + std::to_string(r + 2);
    double lane_val = 0.0;
    double x = 0.0;
    if (!parse_double(row[*col_lane], lane_val) || lane_val < 0.0 ||
        lane_val != std::floor(lane_val)) {
      throw LoadError(record + ": bad lane '" + row[*col_lane] + "'");
    }
    if (!parse_double(row[*col_x], x)) {
      throw LoadError(record + ": bad position '" + row[*col_x] + "'");
    }
    if (!(x >= 0.0 && x < length_m)) {
      throw LoadError(record + ": position " + row[*col_x] + " outside [0, L)");
    }
    std::uint8_t hacked = 0;
    if (col_hacked) {
      if (row[*col_hacked] == "1") hacked = 1;
      else if (row[*col_hacked] != "0") {
        throw LoadError(record + ": hacked flag must be 0 or 1");
      }
    }
    const int lane = static_cast<int>(lane_val);
    max_lane = std::max(max_lane, lane);
    rows.push_back(Row{lane, x, hacked});
  }

  const int lane_count = lanes > 0 ? lanes : max_lane + 1;
  if (max_lane >= lane_count) {
    throw LoadError(path + ": lane index " + std::to_string(max_lane) +
                    " outside [0, " + std::to_string(lane_count) + ")");
  }
  RoadSnapshot snapshot;
  snapshot.length_m = length_m;
  snapshot.lane_positions.resize(static_cast<std::size_t>(std::max(lane_count, 0)));
  snapshot.lane_hacked.resize(snapshot.lane_positions.size());
  for (const auto& row : rows) {
    snapshot.lane_positions[static_cast<std::size_t>(row.lane)].push_back(row.x);
    snapshot.lane_hacked[static_cast<std::size_t>(row.lane)].push_back(row.hacked);
  }
  snapshot.validate();
  return snapshot;
}

}  // namespace gridlock
