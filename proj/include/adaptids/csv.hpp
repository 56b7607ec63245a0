#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace adaptids {

inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t col(const std::string& name) const;  // npos when missing
};

// comma-separated, UTF-8, header row required; handles CRLF and basic quoting
CsvTable read_csv(const std::filesystem::path& path);

// atomic write, one trailing newline per row
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

std::string csv_escape(const std::string& field);

}  // namespace adaptids
