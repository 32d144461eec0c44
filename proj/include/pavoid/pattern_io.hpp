#ifndef PAVOID_PATTERN_IO_HPP
#define PAVOID_PATTERN_IO_HPP

// JSON front end for pattern definitions and build configurations.
//
// Pattern objects carry a "type" plus type-specific fields:
//   pointcloud      {"dim", "points": [[x,...],...]}
//   zeroset-linear  {"coefficients": [q,...], "constant": q}   q = int, "p/q" or float
//   cantor-product  {"factors": [{"base","digits"} | "full" | {"point": x}, ...]}
//   hyperplane      {"d", "n"}
//   union           {"parts": [pattern, ...]}
//   sumset          {"d", "target": pattern in dimension d}
//   isosceles       {"curve": name, "M", "space_dim"}
// and optionally "alpha" (declared dimension) and "soundness".

#include "pavoid/builder.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <set>
#include <string>

namespace pavoid {

OraclePtr parse_pattern(const nlohmann::json& j);
OraclePtr read_pattern_file(const std::string& path);

nlohmann::json read_json_file(const std::string& path);

/// Command-line values; config entries take precedence except for the seed.
struct FlagOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> max_k;
  std::optional<int> levels;
};

/// String entries under "patterns" are file paths relative to `base_dir`.
/// `extra_keys` are handled by the caller and not rejected as unknown.
BuildConfig parse_build_config(const nlohmann::json& j, const FlagOverrides& flags,
                               const std::filesystem::path& base_dir = {},
                               const std::set<std::string>& extra_keys = {});

Rational parse_rational_value(const nlohmann::json& v);

}  // namespace pavoid

#endif
