#include <doctest.h>

#include <algorithm>
#include <fstream>

#include "adaptids/catalog.hpp"
#include "adaptids/error.hpp"
#include "adaptids/rng.hpp"
#include "adaptids/util.hpp"
#include "helpers.hpp"

using namespace adaptids;

namespace {

Mlp tiny_model(std::uint64_t seed) { return init_mlp({3, 4, 1}, seed); }

CatalogEntry entry_with(double loss, double acc, std::uint64_t memory,
                        std::vector<std::string> features = {}) {
  CatalogEntry e;
  e.subset_id = "s";
  e.metrics.historical_loss = loss;
  e.metrics.global_accuracy = acc;
  e.metrics.memory_bytes = memory;
  e.metrics.latency_ns = 100.0;
  e.active_features = std::move(features);
  return e;
}

}  // namespace

TEST_CASE("put/get round-trip and idempotence") {
  testutil::TempDir dir("cat");
  Catalog cat(dir.path() / "c");

  const Mlp m = tiny_model(1);
  const std::string id = cat.put(m, entry_with(0.1, 0.9, 100));
  CHECK(id == model_content_id(m));

  const std::string again = cat.put(m, entry_with(0.5, 0.1, 999));
  CHECK(again == id);  // duplicate put is a no-op
  CHECK(cat.entries().size() == 1);

  const auto [back, entry] = cat.get(id);
  CHECK(back.same_parameters(m));
  CHECK(serialize_model(back) == serialize_model(m));
  CHECK(entry.metrics.historical_loss == 0.1);

  CHECK_THROWS_AS(cat.get("deadbeef"), error);
}

TEST_CASE("artifact and index tampering are detected") {
  testutil::TempDir dir("tamper");
  Catalog cat(dir.path() / "c");
  const Mlp m = tiny_model(2);
  const std::string id = cat.put(m, entry_with(0, 0.9, 100));

  SUBCASE("artifact corruption fails the integrity check") {
    const auto artifact = dir.path() / "c" / "models" / (id + ".json");
    std::ofstream out(artifact, std::ios::app);
    out << " ";
    out.close();
    CHECK_THROWS_AS(cat.get(id), error);
  }

  SUBCASE("index edits trip the checksum and nothing is returned") {
    const auto index = dir.path() / "c" / "index.json";
    std::string text = read_file(index);
    const auto pos = text.find("\"historical_loss\": 0.0");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 22, "\"historical_loss\": 0.5");
    std::ofstream(index, std::ios::trunc) << text;
    CHECK_THROWS_AS(cat.entries(), error);
    CHECK_THROWS_AS(cat.get(id), error);
  }
}

TEST_CASE("query matches a brute-force oracle") {
  testutil::TempDir dir("query");
  Catalog cat(dir.path() / "q");
  Rng rng(55);

  std::vector<CatalogEntry> all;
  const std::vector<std::string> pool{"f0", "f1", "f2", "f3"};
  for (int i = 0; i < 18; ++i) {
    std::vector<std::string> feats;
    for (const auto& f : pool)
      if (rng.uniform() < 0.5) feats.push_back(f);
    CatalogEntry e = entry_with(rng.uniform(0, 0.4), rng.uniform(0.5, 1.0),
                                100 + rng.index(900), feats);
    e.metrics.latency_ns = rng.uniform(50, 500);
    Mlp m = tiny_model(100 + i);  // distinct seeds give distinct ids
    cat.put(m, e);
  }
  all = cat.entries();
  REQUIRE(all.size() == 18);

  QueryConstraints c;
  c.max_memory_bytes = 600;
  c.min_global_accuracy = 0.6;
  c.max_historical_loss = 0.3;
  c.max_latency_ns = 400.0;
  c.available_features = std::vector<std::string>{"f0", "f1", "f3"};

  // oracle: filter + sort the full list independently
  std::vector<CatalogEntry> expected;
  for (const auto& e : all) {
    if (e.metrics.memory_bytes > 600) continue;
    if (e.metrics.global_accuracy < 0.6) continue;
    if (e.metrics.historical_loss > 0.3) continue;
    if (e.metrics.latency_ns > 400.0) continue;
    bool subset = true;
    for (const auto& f : e.active_features)
      if (f != "f0" && f != "f1" && f != "f3") subset = false;
    if (!subset) continue;
    expected.push_back(e);
  }
  std::sort(expected.begin(), expected.end(), [](const CatalogEntry& a, const CatalogEntry& b) {
    if (a.metrics.historical_loss != b.metrics.historical_loss)
      return a.metrics.historical_loss < b.metrics.historical_loss;
    if (a.metrics.memory_bytes != b.metrics.memory_bytes)
      return a.metrics.memory_bytes < b.metrics.memory_bytes;
    if (a.metrics.global_accuracy != b.metrics.global_accuracy)
      return a.metrics.global_accuracy > b.metrics.global_accuracy;
    return a.model_id < b.model_id;
  });

  const auto got = cat.query(c);
  REQUIRE(got.size() == expected.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i].model_id == expected[i].model_id);

  // no constraints -> everything
  CHECK(cat.query({}).size() == all.size());
  // impossible constraint -> empty, not an error
  QueryConstraints none;
  none.max_memory_bytes = 1;
  CHECK(cat.query(none).empty());
}

TEST_CASE("lineage chains terminate at a root") {
  testutil::TempDir dir("lineage");
  Catalog cat(dir.path() / "l");

  const Mlp root = tiny_model(7);
  const std::string root_id = cat.put(root, entry_with(0, 0.95, 500));

  Mlp child = root;
  child.metadata["k"] = "pruned";
  CatalogEntry ce = entry_with(0.05, 0.9, 300);
  ce.parent_model_id = root_id;
  const std::string child_id = cat.put(child, ce);

  Mlp grand = root;
  grand.metadata["k"] = "tuned";
  CatalogEntry ge = entry_with(0.02, 0.92, 300);
  ge.parent_model_id = child_id;
  const std::string grand_id = cat.put(grand, ge);

  const auto chain = cat.lineage(grand_id);
  REQUIRE(chain.size() == 3);
  CHECK(chain[0].model_id == grand_id);
  CHECK(chain[2].model_id == root_id);
  CHECK(chain[2].parent_model_id.empty());

  // unknown parents are rejected at put time
  Mlp orphan = root;
  orphan.metadata["k"] = "orphan";
  CatalogEntry oe = entry_with(0, 0, 0);
  oe.parent_model_id = "not-a-real-id";
  CHECK_THROWS_AS(cat.put(orphan, oe), error);
}

TEST_CASE("interrupted puts never corrupt the index") {
  testutil::TempDir dir("crash");

  SUBCASE("crash after the artifact write leaves the old index intact") {
    Catalog cat(dir.path() / "c1");
    cat.put(tiny_model(1), entry_with(0, 0.9, 100));
    cat.fault_hook = [](std::string_view stage) {
      if (stage == "after_artifact") throw std::runtime_error("injected crash");
    };
    CHECK_THROWS(cat.put(tiny_model(2), entry_with(0, 0.8, 100)));
    cat.fault_hook = nullptr;

    Catalog reopened(dir.path() / "c1");
    const auto entries = reopened.entries();
    CHECK(entries.size() == 1);  // orphan artifact, but the index never saw it
    for (const auto& e : entries) reopened.get(e.model_id);
  }

  SUBCASE("crash before the index rename keeps the previous index readable") {
    Catalog cat(dir.path() / "c2");
    cat.put(tiny_model(1), entry_with(0, 0.9, 100));
    cat.fault_hook = [](std::string_view stage) {
      if (stage == "before_index_rename") throw std::runtime_error("injected crash");
    };
    CHECK_THROWS(cat.put(tiny_model(3), entry_with(0, 0.7, 100)));
    cat.fault_hook = nullptr;

    Catalog reopened(dir.path() / "c2");
    const auto entries = reopened.entries();
    CHECK(entries.size() == 1);
    reopened.get(entries[0].model_id);
  }
}

TEST_CASE("second writer fails fast while the lock is held") {
  testutil::TempDir dir("lock");
  const auto root = dir.path() / "c";
  Catalog cat(root, LockPolicy::fail_fast);
  std::ofstream(root / ".lock") << "held";
  CHECK_THROWS_AS(cat.put(tiny_model(1), entry_with(0, 0.9, 100)), error);
  std::filesystem::remove(root / ".lock");
  cat.put(tiny_model(1), entry_with(0, 0.9, 100));
  CHECK(cat.entries().size() == 1);
}
