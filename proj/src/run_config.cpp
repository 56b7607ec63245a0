#include "adaptids/run_config.hpp"

#include <nlohmann/json.hpp>

#include "adaptids/error.hpp"
#include "adaptids/sha256.hpp"
#include "adaptids/util.hpp"

namespace adaptids {

using json = nlohmann::json;

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  RunConfig cfg;
  const std::string text = read_file(path);
  std::size_t line_no = 0;
  for (const auto& raw_line : split(text, '\n')) {
    ++line_no;
    const std::string line = trim(raw_line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(errc::config, path.string() + ":" + std::to_string(line_no) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty())
      fail(errc::config, path.string() + ":" + std::to_string(line_no) + ": empty key");
    cfg.values[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

void RunConfig::set(const std::string& key, std::string value) { values[key] = std::move(value); }

bool RunConfig::has(const std::string& key) const { return values.count(key) > 0; }

std::string RunConfig::get(const std::string& key, const std::string& fallback) const {
  const auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  const auto v = parse_double(it->second);
  if (!v) fail(errc::config, "config key '" + key + "' is not a number: " + it->second);
  return *v;
}

std::size_t RunConfig::get_size(const std::string& key, std::size_t fallback) const {
  return static_cast<std::size_t>(get_u64(key, fallback));
}

std::uint64_t RunConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  try {
    return std::stoull(it->second);
  } catch (const std::exception&) {
    fail(errc::config, "config key '" + key + "' is not an unsigned integer: " + it->second);
  }
}

std::string RunConfig::canonical_text() const {
  std::string out;
  for (const auto& [k, v] : values) {  // std::map iterates sorted
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

std::string RunConfig::hash() const { return sha256_hex(canonical_text()); }

void write_manifest(const std::filesystem::path& out_dir, const std::string& stage,
                    const RunConfig& resolved, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
  json doc;
  doc["format_version"] = 1;
  doc["stage"] = stage;
  doc["tool"] = "adaptids";
  doc["tool_version"] = kToolVersion;
  doc["config_hash"] = resolved.hash();
  doc["config"] = resolved.values;
  doc["inputs"] = inputs;
  doc["outputs"] = outputs;
  write_file_atomic(out_dir / ("manifest_" + stage + ".json"), doc.dump(2));
}

}  // namespace adaptids
