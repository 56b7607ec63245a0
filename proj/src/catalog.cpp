#include "adaptids/catalog.hpp"

#include <algorithm>
#include <chrono>
#include <set>
#include <thread>

#include <fcntl.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "adaptids/error.hpp"
#include "adaptids/sha256.hpp"
#include "adaptids/util.hpp"

namespace adaptids {

using json = nlohmann::json;

namespace {

json entry_to_json(const CatalogEntry& e) {
  json doc;
  doc["model_id"] = e.model_id;
  doc["subset_id"] = e.subset_id;
  doc["parent_model_id"] = e.parent_model_id;
  doc["lineage_tags"] = e.lineage_tags;
  doc["active_features"] = e.active_features;
  doc["metrics"] = {{"global_accuracy", e.metrics.global_accuracy},
                    {"historical_loss", e.metrics.historical_loss},
                    {"latency_ns", e.metrics.latency_ns},
                    {"memory_bytes", e.metrics.memory_bytes},
                    {"param_count", e.metrics.param_count}};
  doc["artifact_path"] = e.artifact_path;
  doc["created_at"] = e.created_at;
  return doc;
}

CatalogEntry entry_from_json(const json& doc) {
  CatalogEntry e;
  e.model_id = doc.at("model_id").get<std::string>();
  e.subset_id = doc.at("subset_id").get<std::string>();
  e.parent_model_id = doc.at("parent_model_id").get<std::string>();
  e.lineage_tags = doc.at("lineage_tags").get<std::map<std::string, std::string>>();
  e.active_features = doc.at("active_features").get<std::vector<std::string>>();
  const auto& m = doc.at("metrics");
  e.metrics.global_accuracy = m.at("global_accuracy").get<double>();
  e.metrics.historical_loss = m.at("historical_loss").get<double>();
  e.metrics.latency_ns = m.at("latency_ns").get<double>();
  e.metrics.memory_bytes = m.at("memory_bytes").get<std::uint64_t>();
  e.metrics.param_count = m.at("param_count").get<std::uint64_t>();
  e.artifact_path = doc.at("artifact_path").get<std::string>();
  e.created_at = doc.at("created_at").get<std::string>();
  return e;
}

// advisory single-writer lock; RAII removal
class ScopedLock {
 public:
  ScopedLock(const std::filesystem::path& path, LockPolicy policy) : path_(path) {
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(10);
    for (;;) {
      const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
      if (fd >= 0) {
        ::close(fd);
        return;
      }
      if (policy == LockPolicy::fail_fast)
        fail(errc::catalog, "catalog is locked by another writer (" + path_.string() + ")");
      if (std::chrono::steady_clock::now() > deadline)
        fail(errc::catalog, "timed out waiting for the catalog lock " + path_.string());
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
  }
  ~ScopedLock() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  ScopedLock(const ScopedLock&) = delete;
  ScopedLock& operator=(const ScopedLock&) = delete;

 private:
  std::filesystem::path path_;
};

}  // namespace

Catalog::Catalog(std::filesystem::path root, LockPolicy lock_policy)
    : root_(std::move(root)), lock_policy_(lock_policy) {
  std::filesystem::create_directories(root_ / "models");
}

std::filesystem::path Catalog::index_path() const { return root_ / "index.json"; }

std::vector<CatalogEntry> Catalog::entries() const {
  if (!std::filesystem::exists(index_path())) return {};
  json doc;
  try {
    doc = json::parse(read_file(index_path()));
  } catch (const json::exception& e) {
    fail(errc::catalog, std::string("corrupt index: ") + e.what());
  }
  try {
    if (doc.at("format_version").get<int>() != 1)
      fail(errc::catalog, "unsupported index format_version");
    const std::string stored = doc.at("checksum").get<std::string>();
    const std::string actual = sha256_hex(doc.at("entries").dump());
    if (stored != actual) fail(errc::catalog, "index checksum mismatch: refusing to load");
    std::vector<CatalogEntry> out;
    for (const auto& e : doc.at("entries")) out.push_back(entry_from_json(e));
    return out;
  } catch (const json::exception& e) {
    fail(errc::catalog, std::string("malformed index: ") + e.what());
  }
}

void Catalog::write_index(const std::vector<CatalogEntry>& entries) const {
  json list = json::array();
  for (const auto& e : entries) list.push_back(entry_to_json(e));
  json doc;
  doc["format_version"] = 1;
  doc["checksum"] = sha256_hex(list.dump());
  doc["entries"] = std::move(list);
  if (fault_hook) fault_hook("before_index_rename");
  write_file_atomic(index_path(), doc.dump(2));
}

std::string Catalog::put(const Mlp& model, CatalogEntry entry) {
  const std::string artifact = serialize_model(model);  // validates the schema
  entry.model_id = sha256_hex(artifact);
  entry.artifact_path = "models/" + entry.model_id + ".json";
  if (entry.created_at.empty()) entry.created_at = iso8601_utc_now();

  ScopedLock lock(root_ / ".lock", lock_policy_);
  auto existing = entries();
  for (const auto& e : existing)
    if (e.model_id == entry.model_id) return e.model_id;  // idempotent

  if (!entry.parent_model_id.empty()) {
    const bool found = std::any_of(existing.begin(), existing.end(), [&](const CatalogEntry& e) {
      return e.model_id == entry.parent_model_id;
    });
    if (!found)
      fail(errc::catalog, "parent model " + entry.parent_model_id + " is not in the catalog");
  }

  write_file_atomic(root_ / entry.artifact_path, artifact);
  if (fault_hook) fault_hook("after_artifact");

  existing.push_back(entry);
  write_index(existing);
  return entry.model_id;
}

std::pair<Mlp, CatalogEntry> Catalog::get(const std::string& model_id) const {
  for (const auto& e : entries()) {
    if (e.model_id != model_id) continue;
    const std::string artifact = read_file(root_ / e.artifact_path);
    if (sha256_hex(artifact) != model_id)
      fail(errc::catalog, "artifact hash mismatch for " + model_id);
    return {deserialize_model(artifact), e};
  }
  fail(errc::catalog, "unknown model id " + model_id);
}

std::vector<CatalogEntry> Catalog::query(const QueryConstraints& c) const {
  std::vector<CatalogEntry> out;
  std::optional<std::set<std::string>> available;
  if (c.available_features)
    available.emplace(c.available_features->begin(), c.available_features->end());

  for (const auto& e : entries()) {
    if (c.max_memory_bytes && e.metrics.memory_bytes > *c.max_memory_bytes) continue;
    if (c.max_latency_ns && e.metrics.latency_ns > *c.max_latency_ns) continue;
    if (c.min_global_accuracy && e.metrics.global_accuracy < *c.min_global_accuracy) continue;
    if (c.max_historical_loss && e.metrics.historical_loss > *c.max_historical_loss) continue;
    if (available) {
      bool ok = true;
      for (const auto& f : e.active_features)
        if (!available->count(f)) ok = false;
      if (!ok) continue;
    }
    out.push_back(e);
  }
  std::sort(out.begin(), out.end(), [](const CatalogEntry& a, const CatalogEntry& b) {
    if (a.metrics.historical_loss != b.metrics.historical_loss)
      return a.metrics.historical_loss < b.metrics.historical_loss;
    if (a.metrics.memory_bytes != b.metrics.memory_bytes)
      return a.metrics.memory_bytes < b.metrics.memory_bytes;
    if (a.metrics.global_accuracy != b.metrics.global_accuracy)
      return a.metrics.global_accuracy > b.metrics.global_accuracy;
    return a.model_id < b.model_id;
  });
  return out;
}

std::vector<CatalogEntry> Catalog::lineage(const std::string& model_id) const {
  const auto all = entries();
  const auto find = [&](const std::string& id) -> const CatalogEntry* {
    for (const auto& e : all)
      if (e.model_id == id) return &e;
    return nullptr;
  };

  std::vector<CatalogEntry> chain;
  std::set<std::string> visited;
  const CatalogEntry* cur = find(model_id);
  if (!cur) fail(errc::catalog, "unknown model id " + model_id);
  while (cur) {
    if (!visited.insert(cur->model_id).second)
      fail(errc::catalog, "lineage cycle at " + cur->model_id);
    chain.push_back(*cur);
    if (cur->parent_model_id.empty()) return chain;
    cur = find(cur->parent_model_id);
  }
  fail(errc::catalog, "broken lineage: parent of " + chain.back().model_id + " is missing");
}

}  // namespace adaptids
