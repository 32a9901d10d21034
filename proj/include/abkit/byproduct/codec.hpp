#pragma once

#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "abkit/byproduct/types.hpp"

namespace abkit::byproduct {

// Renames applied to top-level keys before validation, e.g. to read files
// whose upstream key spellings differ from ours.
using FieldMapping = std::map<std::string, std::string>;

struct ParseOptions {
  // Strict mode rejects unknown fields; lenient mode keeps them in `extra`.
  bool strict = true;
  FieldMapping mapping;
};

// Parse one JSON record. Throws RecordError(MalformedRecord) for missing or
// mistyped fields and RecordError(InvariantViolation) when the record is well
// formed but violates a record invariant. The error carries the field path.
ImageNetRecord parse_imagenet_record(std::string_view bytes, const ParseOptions& opts = {});
CocoRecord parse_coco_record(std::string_view bytes, const ParseOptions& opts = {});

// Compact single-line JSON with a fixed key order. Output of serialize on a
// parsed canonical line reproduces the line byte for byte.
std::string serialize(const ImageNetRecord& record);
std::string serialize(const CocoRecord& record);

nlohmann::ordered_json to_json(const ImageNetRecord& record);
nlohmann::ordered_json to_json(const CocoRecord& record);
nlohmann::ordered_json to_json(const TracePoint& point);

// Invariant checks shared by the parsers and by anything that constructs
// records in memory. Throw RecordError(InvariantViolation).
void validate(const ImageNetRecord& record);
void validate(const CocoRecord& record);

// Reads a JSON Lines stream; blank lines are skipped. Errors are rethrown
// with the 1-based line number prefixed to the field path.
std::vector<ImageNetRecord> read_imagenet_jsonl(std::istream& in, const ParseOptions& opts = {});
std::vector<CocoRecord> read_coco_jsonl(std::istream& in, const ParseOptions& opts = {});

std::vector<ImageNetRecord> load_imagenet_jsonl(const std::string& path, const ParseOptions& opts = {});
std::vector<CocoRecord> load_coco_jsonl(const std::string& path, const ParseOptions& opts = {});

}  // namespace abkit::byproduct
