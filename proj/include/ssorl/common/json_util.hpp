#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

namespace ssorl {

using Json = nlohmann::json;

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

/// Hash of the canonical (sorted-key, compact) serialization, as 16 hex digits.
std::string json_hash(const Json& value);

Json read_json_file(const std::filesystem::path& path);

/// Writes `value` pretty-printed with a trailing newline. Creates parent
/// directories. Throws std::runtime_error if the file cannot be written.
void write_json_file(const std::filesystem::path& path, const Json& value);

void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace ssorl
