#include "adaptids/csv.hpp"

#include <fstream>
#include <sstream>

#include "adaptids/error.hpp"
#include "adaptids/util.hpp"

namespace adaptids {

namespace {

std::vector<std::string> parse_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c == '\r') {
      // dropped; CRLF input
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

std::size_t CsvTable::col(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  return npos;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io, "cannot open " + path.string());

  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) fail(errc::ingestion, "empty csv: " + path.string());
  table.header = parse_line(line);
  for (auto& h : table.header) h = trim(h);

  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto fields = parse_line(line);
    // tolerate short rows from trailing commas; hard-fail on extra fields
    if (fields.size() > table.header.size())
      fail(errc::ingestion, path.string() + ": row has more fields than the header");
    fields.resize(table.header.size());
    table.rows.push_back(std::move(fields));
  }
  return table;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out << ',';
    out << csv_escape(header[i]);
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << csv_escape(row[i]);
    }
    out << '\n';
  }
  write_file_atomic(path, out.str());
}

}  // namespace adaptids
