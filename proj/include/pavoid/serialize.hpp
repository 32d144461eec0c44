#ifndef PAVOID_SERIALIZE_HPP
#define PAVOID_SERIALIZE_HPP

// File formats. Writers are byte-deterministic: fixed key order, no
// whitespace inside bulk arrays, doubles in shortest round-trip form.

#include "pavoid/avoider.hpp"
#include "pavoid/builder.hpp"
#include "pavoid/json_stream.hpp"
#include "pavoid/measure.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace pavoid {

/// {"dim":D,"k":K,"indices":[[...],...]}
void write_cubeset(std::ostream& out, const CubeSet& s);
std::string cubeset_json(const CubeSet& s);
CubeSet read_cubeset(std::istream& in);
/// CubeSet from a parsed object whose "indices" array was streamed; the
/// buffer is moved out of the document.
CubeSet cubeset_from(BulkDocument& doc, const nlohmann::json& obj);

void write_avoidance(std::ostream& out, const AvoidanceResult& res);

void write_trace(std::ostream& out, const ConstructionTrace& trace);
ConstructionTrace read_trace(std::istream& in);

void write_measure(std::ostream& out, const MeasureTree& tree);
MeasureTree read_measure(std::istream& in);

std::string format_double(double v);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

struct ManifestEntry {
  std::string file;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string command;
  std::string config_sha256;
  std::uint64_t seed = 0;
  std::vector<ManifestEntry> outputs;
  std::vector<std::pair<std::string, double>> timings_ms;
  int exit_code = 0;
};

/// Hashes each named file under `dir` and appends it to the inventory.
void add_outputs(RunManifest& m, const std::filesystem::path& dir, const std::vector<std::string>& files);
std::string manifest_json(const RunManifest& m, bool with_timings = true);

inline constexpr const char* kToolVersion = "0.3.0";

}  // namespace pavoid

#endif
