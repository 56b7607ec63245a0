#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace adaptids {

// shortest decimal form that parses back to the same bits
std::string format_double(double v);
std::optional<double> parse_double(std::string_view s);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(std::span<const std::string> parts, std::string_view sep);

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

std::string read_file(const std::filesystem::path& path);
// write-temp-then-rename; never leaves a partial file at the target path
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string iso8601_utc_now();

}  // namespace adaptids
