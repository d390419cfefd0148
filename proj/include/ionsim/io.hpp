#pragma once

// File formats. Every frequency in a file is in Hz (cycles per second) and every
// site label is 1-based; the library works in rad/s with 0-based sites.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ionsim/core.hpp"
#include "ionsim/dynamics.hpp"
#include "ionsim/geometry.hpp"
#include "ionsim/magnus.hpp"
#include "ionsim/scheduler.hpp"

namespace ionsim::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Malformed or incompatible input document.
class SchemaError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

double to_hz(double rad_per_s);
double from_hz(double hz);

/// Geometry document, e.g. {"geometry": "ring", "n": 5, "loop_flux": 2.356, "rate_hz": 100}.
GeometrySpec geometry_from_json(const json& j);
json geometry_to_json(const GeometrySpec& spec);

/// Compiled terms: {"n_ions", "terms": [{n, omega, phi, delta}], "spacers", "loop_flux"}.
/// omega and delta in Hz.
json terms_to_json(const CompiledGeometry& g, const std::string& geometry);
CompiledGeometry terms_from_json(const json& j);

json chain_to_json(const ChainConfig& c);
/// Accepts explicit "modes" or the shorthand {"com_mode": {"frequency_hz", "eta"}}.
ChainConfig chain_from_json(const json& j);

json schedule_to_json(const DriveSchedule& s, const ChainConfig& chain,
                      const AdiabaticityReport* report = nullptr);
DriveSchedule schedule_from_json(const json& j);
ChainConfig schedule_chain(const json& j);

json report_to_json(const AdiabaticityReport& r);
json magnus_report_to_json(const MagnusReport& r);

/// Header t,Pe_1..Pe_N,norm,nbar,sector; t in seconds.
std::string trajectory_csv(const Trajectory& t);
/// Amplitude lists [[re, im], ...] per snapshot.
json snapshots_to_json(const Trajectory& t);

std::string read_file(const std::filesystem::path& p);
json read_json(const std::filesystem::path& p);

/// Writes to a temporary sibling and renames over the target.
void atomic_write(const std::filesystem::path& p, std::string_view content);

std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

/// Relative paths are placed under $IONSIM_OUTPUT_ROOT when it is set.
std::filesystem::path output_path(const std::string& p);

struct RunManifest {
  std::string subcommand;
  std::vector<std::string> argv;
  std::vector<std::pair<std::string, std::string>> inputs;   // path, fnv1a64
  std::uint64_t seed = 0;
  std::string output;
  json parameters = json::object();
  int schema_version = kSchemaVersion;

  void add_input(const std::string& path);
  json to_json() const;
  static RunManifest from_json(const json& j);
};

}  // namespace ionsim::io
