#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace rlc {

/// Shortest "%.17g" style text that reads back to the same double.
std::string format_exact(double v);
/// Fixed significant digits for human-facing tables ("%.10g").
std::string format_real(double v);

std::string read_text_file(const std::filesystem::path& path);
/// Writes atomically enough for our purposes: truncate + write, creating parent dirs.
void write_text_file(const std::filesystem::path& path, std::string_view content);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(std::string_view bytes);

}  // namespace rlc
