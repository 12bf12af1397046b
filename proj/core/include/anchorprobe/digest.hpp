#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace anchorprobe {

/// Lower-case hex SHA-256 of a byte buffer.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);

/// SHA-256 of a file's full contents.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace anchorprobe
