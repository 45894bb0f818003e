#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "relaynet/homotopy.hpp"
#include "relaynet/network.hpp"
#include "relaynet/optimizer.hpp"
#include "relaynet/prescan.hpp"

namespace relaynet {

inline constexpr int kScenarioSchemaVersion = 1;

/// Scenario plus the run parameters stored alongside it.
struct ScenarioFile {
  int schema_version = kScenarioSchemaVersion;
  std::string name;
  Scenario scenario;
  OptimizerConfig optimizer;
  int generations = 7;
  double cl_threshold = 10.0;
  bool keep_redundant = false;
  std::uint64_t seed = 1;
};

/// Errors: parse_error (with line and column) for malformed JSON or a field
/// of the wrong type, invalid_scenario when the scenario itself is invalid.
ScenarioFile parse_scenario(std::string_view text);
ScenarioFile load_scenario(const std::string& path);
/// Canonical form: fixed key order, shortest round-trip doubles.
std::string to_json(const ScenarioFile& f);
/// FNV-1a of the canonical form, as 16 hex digits.
std::string scenario_digest(const ScenarioFile& f);

/// Straight-line network. The first m nodes are the terminals unless
/// `terminals` says otherwise.
struct NetworkFile {
  std::vector<Point2> nodes;
  std::vector<double> radii;  // optional, per node
  std::vector<TreeEdge> links;
  std::vector<int> terminals;
};

NetworkFile parse_network(std::string_view text, int terminal_count);
NetworkFile load_network(const std::string& path, int terminal_count);
NetworkFile network_file(const Scenario& s, const NetworkState& st, const std::vector<TreeEdge>& mst);
std::string to_json(const NetworkFile& n);
NetworkGeometry to_geometry(const NetworkFile& n);

struct SvgOptions {
  double scale = 20.0;  // pixels per unit
  double margin = 20.0;
};

/// Obstacles, transmission disks, tree links and node markers. Obstacles and
/// disks are the only <circle> elements; markers are <rect>.
std::string render_svg(const Scenario& s, const NetworkState& st, const std::vector<TreeEdge>& mst,
                       const SvgOptions& options = {});

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace relaynet
