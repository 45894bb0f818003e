#include "relaynet/io.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "relaynet/error.hpp"

namespace relaynet {

using Json = nlohmann::ordered_json;

namespace {

std::pair<int, int> line_col(std::string_view text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    // byte is one past the offending character
    const auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    throw Error(ErrorKind::parse_error, fmt::format("line {}, column {}: malformed JSON", line, col));
  }
}

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw Error(ErrorKind::parse_error, fmt::format("field '{}': {}", field, what));
}

double number(const Json& j, const std::string& field) {
  if (!j.is_number()) field_error(field, "expected a number");
  return j.get<double>();
}

int integer(const Json& j, const std::string& field) {
  if (!j.is_number_integer()) field_error(field, "expected an integer");
  return j.get<int>();
}

bool boolean(const Json& j, const std::string& field) {
  if (!j.is_boolean()) field_error(field, "expected true or false");
  return j.get<bool>();
}

Point2 point(const Json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2) field_error(field, "expected [x, y]");
  return {number(j[0], field + "[0]"), number(j[1], field + "[1]")};
}

const Json& array(const Json& parent, const char* key) {
  if (!parent.contains(key)) field_error(key, "missing");
  const Json& j = parent[key];
  if (!j.is_array()) field_error(key, "expected an array");
  return j;
}

void check_keys(const Json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
      field_error(where.empty() ? key : where + "." + key, "unknown field");
    }
  }
}

void read_optimizer(const Json& j, OptimizerConfig& c) {
  if (!j.is_object()) field_error("optimizer", "expected an object");
  check_keys(j, "optimizer",
             {"max_steps", "stability_window", "stability_rel_tol", "leaf_steer_rate", "neighbor_move_rate",
              "stuck_steps_before_radial", "equilibration_enabled"});
  if (j.contains("max_steps")) c.max_steps = integer(j["max_steps"], "optimizer.max_steps");
  if (j.contains("stability_window")) c.stability_window = integer(j["stability_window"], "optimizer.stability_window");
  if (j.contains("stability_rel_tol")) {
    c.stability_rel_tol = number(j["stability_rel_tol"], "optimizer.stability_rel_tol");
  }
  if (j.contains("leaf_steer_rate")) c.leaf_steer_rate = number(j["leaf_steer_rate"], "optimizer.leaf_steer_rate");
  if (j.contains("neighbor_move_rate")) {
    c.neighbor_move_rate = number(j["neighbor_move_rate"], "optimizer.neighbor_move_rate");
  }
  if (j.contains("stuck_steps_before_radial")) {
    c.stuck_steps_before_radial = integer(j["stuck_steps_before_radial"], "optimizer.stuck_steps_before_radial");
  }
  if (j.contains("equilibration_enabled")) {
    c.equilibration_enabled = boolean(j["equilibration_enabled"], "optimizer.equilibration_enabled");
  }
}

}  // namespace

// Scenario files ----------------------------------------------------------

ScenarioFile parse_scenario(std::string_view text) {
  const Json j = parse_json(text);
  if (!j.is_object()) field_error("(root)", "expected an object");
  check_keys(j, "", {"schema_version", "name", "units", "terminals", "obstacles", "relay_budget", "seed",
                     "optimizer", "prescan"});
  ScenarioFile f;
  if (!j.contains("schema_version")) field_error("schema_version", "missing");
  f.schema_version = integer(j["schema_version"], "schema_version");
  if (f.schema_version != kScenarioSchemaVersion) {
    field_error("schema_version", fmt::format("unsupported version {} (expected {})", f.schema_version,
                                              kScenarioSchemaVersion));
  }
  if (j.contains("name")) {
    if (!j["name"].is_string()) field_error("name", "expected a string");
    f.name = j["name"].get<std::string>();
  }
  if (j.contains("units")) {
    if (!j["units"].is_string()) field_error("units", "expected a string");
    f.scenario.units = j["units"].get<std::string>();
  }
  const Json& terms = array(j, "terminals");
  for (std::size_t i = 0; i < terms.size(); ++i) {
    f.scenario.terminals.push_back(point(terms[i], fmt::format("terminals[{}]", i)));
  }
  if (j.contains("obstacles")) {
    const Json& obs = array(j, "obstacles");
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const std::string field = fmt::format("obstacles[{}]", i);
      if (!obs[i].is_object()) field_error(field, "expected {\"cx\", \"cy\", \"r\"}");
      check_keys(obs[i], field, {"cx", "cy", "r"});
      for (const char* k : {"cx", "cy", "r"}) {
        if (!obs[i].contains(k)) field_error(field + "." + k, "missing");
      }
      f.scenario.obstacles.push_back({{number(obs[i]["cx"], field + ".cx"), number(obs[i]["cy"], field + ".cy")},
                                      number(obs[i]["r"], field + ".r")});
    }
  }
  if (j.contains("relay_budget")) f.scenario.relay_budget = integer(j["relay_budget"], "relay_budget");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) field_error("seed", "expected a non-negative integer");
    f.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("optimizer")) read_optimizer(j["optimizer"], f.optimizer);
  if (j.contains("prescan")) {
    const Json& p = j["prescan"];
    if (!p.is_object()) field_error("prescan", "expected an object");
    check_keys(p, "prescan", {"generations", "cl_threshold", "keep_redundant"});
    if (p.contains("generations")) f.generations = integer(p["generations"], "prescan.generations");
    if (p.contains("cl_threshold")) f.cl_threshold = number(p["cl_threshold"], "prescan.cl_threshold");
    if (p.contains("keep_redundant")) f.keep_redundant = boolean(p["keep_redundant"], "prescan.keep_redundant");
  }
  f.scenario.validate();
  f.optimizer.validate();
  return f;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::parse_error, fmt::format("cannot read '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::parse_error, fmt::format("cannot write '{}'", path));
  out << content;
}

ScenarioFile load_scenario(const std::string& path) { return parse_scenario(read_file(path)); }

std::string to_json(const ScenarioFile& f) {
  Json j;
  j["schema_version"] = f.schema_version;
  if (!f.name.empty()) j["name"] = f.name;
  j["units"] = f.scenario.units;
  j["terminals"] = Json::array();
  for (Point2 t : f.scenario.terminals) j["terminals"].push_back({t.x, t.y});
  j["obstacles"] = Json::array();
  for (const Disk& d : f.scenario.obstacles) j["obstacles"].push_back({{"cx", d.center.x}, {"cy", d.center.y}, {"r", d.radius}});
  j["relay_budget"] = f.scenario.relay_budget;
  j["seed"] = f.seed;
  const OptimizerConfig& c = f.optimizer;
  j["optimizer"] = {{"max_steps", c.max_steps},
                    {"stability_window", c.stability_window},
                    {"stability_rel_tol", c.stability_rel_tol},
                    {"leaf_steer_rate", c.leaf_steer_rate},
                    {"neighbor_move_rate", c.neighbor_move_rate},
                    {"stuck_steps_before_radial", c.stuck_steps_before_radial},
                    {"equilibration_enabled", c.equilibration_enabled}};
  j["prescan"] = {{"generations", f.generations}, {"cl_threshold", f.cl_threshold}, {"keep_redundant", f.keep_redundant}};
  return j.dump(2) + "\n";
}

std::string scenario_digest(const ScenarioFile& f) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : to_json(f)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return fmt::format("{:016x}", h);
}

// Network files -----------------------------------------------------------

NetworkFile parse_network(std::string_view text, int terminal_count) {
  const Json j = parse_json(text);
  if (!j.is_object()) field_error("(root)", "expected an object");
  check_keys(j, "", {"nodes", "radii", "links", "terminals"});
  NetworkFile n;
  const Json& nodes = array(j, "nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) n.nodes.push_back(point(nodes[i], fmt::format("nodes[{}]", i)));
  const int count = static_cast<int>(n.nodes.size());
  if (j.contains("radii")) {
    const Json& radii = array(j, "radii");
    if (static_cast<int>(radii.size()) != count) field_error("radii", "must have one entry per node");
    for (std::size_t i = 0; i < radii.size(); ++i) n.radii.push_back(number(radii[i], fmt::format("radii[{}]", i)));
  }
  const Json& links = array(j, "links");
  for (std::size_t i = 0; i < links.size(); ++i) {
    const std::string field = fmt::format("links[{}]", i);
    if (!links[i].is_array() || links[i].size() != 2) field_error(field, "expected [u, v]");
    const int u = integer(links[i][0], field + "[0]");
    const int v = integer(links[i][1], field + "[1]");
    if (u < 0 || v < 0 || u >= count || v >= count || u == v) field_error(field, "node index out of range");
    n.links.push_back({std::min(u, v), std::max(u, v)});
  }
  if (j.contains("terminals")) {
    const Json& t = array(j, "terminals");
    for (std::size_t i = 0; i < t.size(); ++i) {
      const int id = integer(t[i], fmt::format("terminals[{}]", i));
      if (id < 0 || id >= count) field_error(fmt::format("terminals[{}]", i), "node index out of range");
      n.terminals.push_back(id);
    }
  } else {
    if (terminal_count > count) field_error("nodes", "fewer nodes than scenario terminals");
    for (int i = 0; i < terminal_count; ++i) n.terminals.push_back(i);
  }
  return n;
}

NetworkFile load_network(const std::string& path, int terminal_count) {
  return parse_network(read_file(path), terminal_count);
}

NetworkFile network_file(const Scenario& s, const NetworkState& st, const std::vector<TreeEdge>& mst) {
  NetworkFile n;
  for (int v = 0; v < node_count(s, st); ++v) {
    n.nodes.push_back(node_position(s, st, v));
    n.radii.push_back(node_radius(s, st, v));
  }
  n.links = mst;
  for (int i = 0; i < s.terminal_count(); ++i) n.terminals.push_back(i);
  return n;
}

std::string to_json(const NetworkFile& n) {
  Json j;
  j["nodes"] = Json::array();
  for (Point2 p : n.nodes) j["nodes"].push_back({p.x, p.y});
  if (!n.radii.empty()) j["radii"] = n.radii;
  j["links"] = Json::array();
  for (const TreeEdge& e : n.links) j["links"].push_back({e.u, e.v});
  j["terminals"] = n.terminals;
  return j.dump(2) + "\n";
}

NetworkGeometry to_geometry(const NetworkFile& n) {
  NetworkGeometry g;
  g.nodes = n.nodes;
  for (const TreeEdge& e : n.links) {
    g.links.push_back({e.u, e.v, Segment{n.nodes[static_cast<std::size_t>(e.u)], n.nodes[static_cast<std::size_t>(e.v)]}});
  }
  g.terminals = n.terminals;
  return g;
}

// SVG ---------------------------------------------------------------------

std::string render_svg(const Scenario& s, const NetworkState& st, const std::vector<TreeEdge>& mst,
                       const SvgOptions& options) {
  double lo_x = std::numeric_limits<double>::infinity(), lo_y = lo_x;
  double hi_x = -lo_x, hi_y = -lo_x;
  auto extend = [&](Point2 c, double r) {
    lo_x = std::min(lo_x, c.x - r);
    lo_y = std::min(lo_y, c.y - r);
    hi_x = std::max(hi_x, c.x + r);
    hi_y = std::max(hi_y, c.y + r);
  };
  for (const Disk& d : s.obstacles) extend(d.center, d.radius);
  for (int v = 0; v < node_count(s, st); ++v) {
    if (node_active(s, st, v)) extend(node_position(s, st, v), node_radius(s, st, v));
  }
  const double k = options.scale;
  const double m = options.margin;
  auto X = [&](double x) { return (x - lo_x) * k + m; };
  auto Y = [&](double y) { return (hi_y - y) * k + m; };  // y up

  std::string out = fmt::format(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{:.3f}\" height=\"{:.3f}\" "
      "data-scale=\"{}\">\n",
      (hi_x - lo_x) * k + 2 * m, (hi_y - lo_y) * k + 2 * m, k);
  out += "<g id=\"obstacles\" fill=\"#c0392b\" fill-opacity=\"0.6\" stroke=\"#922b21\">\n";
  for (const Disk& d : s.obstacles) {
    out += fmt::format("<circle cx=\"{:.4f}\" cy=\"{:.4f}\" r=\"{:.6f}\"/>\n", X(d.center.x), Y(d.center.y), d.radius * k);
  }
  out += "</g>\n<g id=\"disks\" fill=\"#2e86c1\" fill-opacity=\"0.08\" stroke=\"#2e86c1\" stroke-opacity=\"0.5\">\n";
  for (int v = 0; v < node_count(s, st); ++v) {
    const double r = node_radius(s, st, v);
    if (!node_active(s, st, v) || r <= 0.0) continue;
    const Point2 p = node_position(s, st, v);
    out += fmt::format("<circle cx=\"{:.4f}\" cy=\"{:.4f}\" r=\"{:.6f}\" data-node=\"{}\"/>\n", X(p.x), Y(p.y), r * k, v);
  }
  out += "</g>\n<g id=\"links\" stroke=\"#333333\" stroke-width=\"1\">\n";
  for (const TreeEdge& e : mst) {
    const Point2 a = node_position(s, st, e.u);
    const Point2 b = node_position(s, st, e.v);
    out += fmt::format("<line x1=\"{:.4f}\" y1=\"{:.4f}\" x2=\"{:.4f}\" y2=\"{:.4f}\"/>\n", X(a.x), Y(a.y), X(b.x), Y(b.y));
  }
  out += "</g>\n<g id=\"relays\" fill=\"#1e8449\">\n";
  for (int v = s.terminal_count(); v < node_count(s, st); ++v) {
    if (!node_active(s, st, v)) continue;
    const Point2 p = node_position(s, st, v);
    out += fmt::format("<rect x=\"{:.4f}\" y=\"{:.4f}\" width=\"4\" height=\"4\"/>\n", X(p.x) - 2, Y(p.y) - 2);
  }
  out += "</g>\n<g id=\"terminals\" fill=\"#000000\">\n";
  for (Point2 p : s.terminals) {
    out += fmt::format("<rect x=\"{:.4f}\" y=\"{:.4f}\" width=\"8\" height=\"8\"/>\n", X(p.x) - 4, Y(p.y) - 4);
  }
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace relaynet
