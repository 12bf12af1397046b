#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>

#include "anchorprobe/types.hpp"

namespace anchorprobe {

using Json = nlohmann::ordered_json;

/// Version stamped into every JSON document the toolkit writes.
inline constexpr int kSchemaVersion = 1;

Json to_json(const SampleRecord& record);
SampleRecord sample_record_from_json(const Json& j);

/// Finite doubles as numbers, NaN/inf as null.
Json number_or_null(double value);

/// Pretty-printed with a trailing newline; parent directories created.
void write_json_file(const std::filesystem::path& path, const Json& doc);
Json read_json_file(const std::filesystem::path& path);

}  // namespace anchorprobe
