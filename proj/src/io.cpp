#include "ipdsaw/io.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <system_error>
#include <unistd.h>

#include "ipdsaw/errors.hpp"

namespace ipdsaw::io {

Json to_json(const model::StretchConfig& l) {
  Json j;
  j["L"] = l.total_length();
  j["N"] = l.size();
  j["stretches"] = l.stretches();
  return j;
}

model::StretchConfig stretch_config_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("stretches") || !j["stretches"].is_array()) {
    throw ValidationError("configuration record needs a \"stretches\" array");
  }
  std::vector<std::int64_t> s;
  for (const auto& v : j["stretches"]) {
    if (!v.is_number_integer()) throw ValidationError("stretches must be integers");
    s.push_back(v.get<std::int64_t>());
  }
  model::StretchConfig l(std::move(s));
  if (j.contains("L") && j["L"].get<std::int64_t>() != l.total_length()) {
    throw ValidationError("configuration record: L does not match the stretches");
  }
  return l;
}

Json to_json(const walk::WalkPath& v) {
  Json j;
  j["start_law"] = v.start_law == walk::StartLaw::zero ? "zero" : "mu";
  j["values"] = v.values;
  return j;
}

Json to_json(const walk::ExcursionDecomposition& d) {
  Json j;
  j["taus"] = d.taus;
  j["lengths"] = d.lengths;
  j["areas"] = d.areas;
  j["weights"] = d.weights;
  j["partial_sums"] = d.partial_sums;
  if (d.open) {
    j["open"] = {{"start", d.open->start}, {"length", d.open->length}, {"area", d.open->area}};
  } else {
    j["open"] = nullptr;
  }
  return j;
}

std::string format_number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string format_number(std::int64_t v) { return std::to_string(v); }
std::string format_number(std::uint64_t v) { return std::to_string(v); }

std::string limit_sample_csv(const continuum::LimitSample& s) {
  CsvTable t;
  t.header = {"t", "B", "D", "A"};
  for (std::size_t k = 0; k < s.B.values.size(); ++k) {
    t.add_row({format_number(s.B.time(k)), format_number(s.B.values[k]), format_number(s.D.values[k]),
               format_number(s.area[k])});
  }
  return t.str();
}

Json to_json(const geometry::Region& r) {
  Json out = Json::array();
  for (const auto& b : r.boxes) {
    out.push_back(Json::array({{b.x0, b.y0}, {b.x1, b.y0}, {b.x1, b.y1}, {b.x0, b.y1}}));
  }
  return out;
}

Json to_json(const continuum::BandPolygon& p) {
  Json out = Json::array();
  for (const auto& [x, y] : p.vertices) out.push_back(Json::array({x, y}));
  return out;
}

std::string step_function_csv(const rescaling::StepFunction& f) {
  CsvTable t;
  t.header = {"s", "value"};
  for (std::size_t k = 0; k < f.values.size(); ++k) {
    t.add_row({format_number(static_cast<double>(k) / f.rate), format_number(f.values[k])});
  }
  return t.str();
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (!header.empty() && row.size() != header.size()) {
    throw ValidationError("CsvTable: row width differs from the header");
  }
  rows.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  if (!fs::exists(dir)) throw ValidationError("output directory does not exist: " + dir.string());
  const fs::path tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ValidationError("cannot open " + tmp.string());
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    os.flush();
    if (!os) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw ValidationError("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw ValidationError("cannot move output into place: " + path.string());
  }
}

Json RunManifest::to_json() const {
  Json j;
  j["command"] = command;
  j["parameters"] = parameters;
  j["master_seed"] = master_seed;
  j["replica_count"] = replica_count;
  j["toolkit_version"] = toolkit_version;
  j["output_paths"] = output_paths;
  j["created"] = created;
  return j;
}

RunManifest RunManifest::from_json(const Json& j) {
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.parameters = j.at("parameters");
  m.master_seed = j.at("master_seed").get<std::uint64_t>();
  m.replica_count = j.at("replica_count").get<std::uint64_t>();
  m.toolkit_version = j.at("toolkit_version").get<std::string>();
  m.output_paths = j.at("output_paths").get<std::vector<std::string>>();
  if (j.contains("created")) m.created = j["created"].get<std::string>();
  return m;
}

std::filesystem::path manifest_path(const std::filesystem::path& out) {
  return std::filesystem::path(out.string() + ".manifest.json");
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace ipdsaw::io
