#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "adaptids/mlp.hpp"

namespace adaptids {

struct EntryMetrics {
  double global_accuracy = 0.0;
  double historical_loss = 0.0;
  double latency_ns = 0.0;
  std::uint64_t memory_bytes = 0;
  std::uint64_t param_count = 0;
};

struct CatalogEntry {
  std::string model_id;  // content hash of the serialized artifact
  std::string subset_id;
  std::string parent_model_id;  // empty = root
  std::map<std::string, std::string> lineage_tags;
  std::vector<std::string> active_features;
  EntryMetrics metrics;
  std::string artifact_path;  // relative to the catalog root
  std::string created_at;
};

struct QueryConstraints {
  std::optional<std::uint64_t> max_memory_bytes;
  std::optional<double> max_latency_ns;
  std::optional<std::vector<std::string>> available_features;  // entry features must be a subset
  std::optional<double> min_global_accuracy;
  std::optional<double> max_historical_loss;
};

enum class LockPolicy { wait, fail_fast };

// file-based model repository: index.json plus models/<model_id>.json.
// Content-addressed (put is idempotent), writes are temp+rename, readers can
// run concurrently, writers serialize through an advisory lock file.
class Catalog {
 public:
  explicit Catalog(std::filesystem::path root, LockPolicy lock_policy = LockPolicy::wait);

  // writes the artifact and appends to the index; a duplicate model_id is a
  // no-op returning the existing id. parent ids must already exist.
  std::string put(const Mlp& model, CatalogEntry entry);

  // deserialize and integrity-check the stored artifact
  std::pair<Mlp, CatalogEntry> get(const std::string& model_id) const;

  // constraint filter sorted by (historical loss asc, memory asc, accuracy
  // desc, model_id asc)
  std::vector<CatalogEntry> query(const QueryConstraints& constraints) const;

  // verified index load; tampering is reported, never partial results
  std::vector<CatalogEntry> entries() const;

  // entry -> root chain, starting at model_id
  std::vector<CatalogEntry> lineage(const std::string& model_id) const;

  const std::filesystem::path& root() const { return root_; }

  // test seam: invoked at named points inside put ("after_artifact",
  // "before_index_rename"); a throwing hook simulates a crash
  std::function<void(std::string_view)> fault_hook;

 private:
  std::filesystem::path index_path() const;
  void write_index(const std::vector<CatalogEntry>& entries) const;

  std::filesystem::path root_;
  LockPolicy lock_policy_;
};

}  // namespace adaptids
