#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace adaptids {

inline constexpr const char* kToolVersion = "1.0.0";

// flat key=value configuration; '#' starts a comment, flags override file
// values. The canonical text (sorted keys) feeds the manifest hash.
struct RunConfig {
  std::map<std::string, std::string> values;

  static RunConfig from_file(const std::filesystem::path& path);

  void set(const std::string& key, std::string value);
  bool has(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback = "") const;
  double get_double(const std::string& key, double fallback) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

  std::string canonical_text() const;
  std::string hash() const;  // sha256 of the canonical text
};

// deterministic per-stage record: stage, tool version, resolved config and its
// hash, input and output paths. No timestamps, so reruns are byte-identical.
void write_manifest(const std::filesystem::path& out_dir, const std::string& stage,
                    const RunConfig& resolved, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs);

}  // namespace adaptids
