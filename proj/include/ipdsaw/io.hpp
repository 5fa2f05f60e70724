#pragma once

// Serialisation: JSON / JSON Lines records for configurations and walks, CSV
// tables, atomic file writes and the run manifest.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "ipdsaw/continuum.hpp"
#include "ipdsaw/geometry.hpp"
#include "ipdsaw/model.hpp"
#include "ipdsaw/rescaling.hpp"
#include "ipdsaw/walk.hpp"

namespace ipdsaw::io {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolkitVersion = "0.1.0";

Json to_json(const model::StretchConfig& l);
/// Expects {"stretches": [...]}; "L", when present, must match.
model::StretchConfig stretch_config_from_json(const Json& j);

Json to_json(const walk::WalkPath& v);
Json to_json(const walk::ExcursionDecomposition& d);

/// Columns t, B, D, A on the sample grid.
std::string limit_sample_csv(const continuum::LimitSample& s);

/// List of polygons, one per box, each a list of [x, y] vertices.
Json to_json(const geometry::Region& r);
/// A single polygon as a list of [x, y] vertices.
Json to_json(const continuum::BandPolygon& p);

/// CSV with header "s,value"; one row per grid point k / rate.
std::string step_function_csv(const rescaling::StepFunction& f);

/// Table with a header row; numbers use the shortest round-trip form.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  std::string str() const;
};

/// Shortest decimal that round-trips the double.
std::string format_number(double v);
std::string format_number(std::int64_t v);
std::string format_number(std::uint64_t v);

/// Writes to a sibling temporary file and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Everything needed to reproduce a run. Only `created` varies between reruns.
struct RunManifest {
  std::string command;
  Json parameters = Json::object();
  std::uint64_t master_seed = 0;
  std::uint64_t replica_count = 0;
  std::string toolkit_version = kToolkitVersion;
  std::vector<std::string> output_paths;
  std::string created;  // ISO-8601 UTC

  Json to_json() const;
  static RunManifest from_json(const Json& j);
};

/// "<out>.manifest.json".
std::filesystem::path manifest_path(const std::filesystem::path& out);

std::string utc_timestamp();

}  // namespace ipdsaw::io
