#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "propspot/common.hpp"

namespace propspot::io {

// Strict UTF-8 decode. Throws ParseError citing the byte offset of the first
// invalid sequence. Rejects overlong encodings and surrogate code points.
std::u32string utf8_decode(std::string_view bytes);

std::string utf8_encode(std::u32string_view text);

// Number of Unicode scalar values in a UTF-8 string.
std::size_t utf8_length(std::string_view bytes);

std::string read_file(const std::filesystem::path& path);

// Write-to-temp + rename, so an interrupted run never leaves a partial file.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

std::vector<std::string> split_tabs(std::string_view line);

// Shortest decimal representation that round-trips the exact double.
std::string format_double(double x);

// Parses a base-10 non-negative integer; whole-field match required.
std::size_t parse_index(std::string_view field, const std::string& context);

double parse_double(std::string_view field, const std::string& context);

// PROPSPOT_THREADS, clamped to [1, hardware_concurrency]; 1 when unset.
unsigned thread_cap();

}  // namespace propspot::io
