#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace seizurenet::io {

// Writes to "<path>.tmp" then renames over `path`. Throws IoError.
void write_file_atomic(const std::string& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::string& path, std::string_view text);

std::string read_text_file(const std::string& path);

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);
std::string sha256_file(const std::string& path);

}  // namespace seizurenet::io
