#ifndef PAVOID_JSON_STREAM_HPP
#define PAVOID_JSON_STREAM_HPP

// Reader for JSON documents whose bulk sits in a few large arrays. Arrays
// stored under the keys "indices" and "masses" go straight into flat buffers;
// everything else becomes an ordinary DOM, with {"$bulk": id} left where a
// streamed array was.

#include "pavoid/dyadic.hpp"

#include <json.hpp>

#include <istream>
#include <string>
#include <utility>
#include <vector>

namespace pavoid {

struct BulkArray {
  std::size_t rows = 0;
  std::size_t width = 0;  // integers per row; 0 until the first row
  std::vector<Index> flat;
  // Rows of the form [[ints...], "num", "den"] also carry an interned tag.
  std::vector<std::uint32_t> tag;
  std::vector<std::pair<std::string, std::string>> tags;
};

struct BulkDocument {
  nlohmann::json dom;
  std::vector<BulkArray> bulk;

  /// The streamed array behind a placeholder; throws FormatError otherwise.
  const BulkArray& array_at(const nlohmann::json& placeholder) const;
  BulkArray& array_at(const nlohmann::json& placeholder);
};

BulkDocument read_bulk_json(std::istream& in);

}  // namespace pavoid

#endif
