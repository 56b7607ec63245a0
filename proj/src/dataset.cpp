#include "adaptids/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "adaptids/csv.hpp"
#include "adaptids/error.hpp"
#include "adaptids/rng.hpp"
#include "adaptids/sha256.hpp"
#include "adaptids/util.hpp"

namespace adaptids {

using json = nlohmann::json;

const char* split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

std::optional<Split> split_from_name(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "val") return Split::val;
  if (name == "test") return Split::test;
  return std::nullopt;
}

std::string subset_id_of(std::span<const std::size_t> sorted_indices) {
  std::string key;
  for (std::size_t i : sorted_indices) {
    key += std::to_string(i);
    key += ',';
  }
  return sha256_hex(key).substr(0, 16);
}

FeatureMask FeatureMask::all_active(std::size_t n) {
  return from_flags(std::vector<std::uint8_t>(n, 1));
}

FeatureMask FeatureMask::from_indices(std::size_t n, std::span<const std::size_t> indices) {
  std::vector<std::uint8_t> flags(n, 0);
  for (std::size_t i : indices) {
    if (i >= n) fail(errc::shape, "feature index " + std::to_string(i) + " out of range");
    flags[i] = 1;
  }
  return from_flags(std::move(flags));
}

FeatureMask FeatureMask::from_flags(std::vector<std::uint8_t> flags) {
  FeatureMask m;
  m.active = std::move(flags);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < m.active.size(); ++i)
    if (m.active[i]) idx.push_back(i);
  if (idx.empty()) fail(errc::spec, "feature mask must keep at least one active feature");
  m.subset_id = subset_id_of(idx);
  return m;
}

std::size_t FeatureMask::active_count() const {
  return static_cast<std::size_t>(std::count(active.begin(), active.end(), std::uint8_t{1}));
}

std::vector<std::size_t> FeatureMask::active_indices() const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < active.size(); ++i)
    if (active[i]) idx.push_back(i);
  return idx;
}

bool FeatureMask::all() const { return active_count() == active.size(); }

void Dataset::validate() const {
  const std::size_t n = X.rows;
  if (feature_names.size() != X.cols) fail(errc::shape, "dataset: feature name count mismatch");
  if (y.size() != n || category.size() != n || split.size() != n)
    fail(errc::shape, "dataset: per-row vectors out of sync");
  if (scaler.size() != X.cols) fail(errc::shape, "dataset: scaler length mismatch");
  for (double v : X.data)
    if (!(v >= 0.0 && v <= 1.0)) fail(errc::shape, "dataset: value outside [0,1]");
  std::map<std::string, std::uint8_t> seen;
  for (std::size_t r = 0; r < n; ++r) {
    auto [it, inserted] = seen.emplace(category[r], y[r]);
    if (!inserted && it->second != y[r])
      fail(errc::ingestion, "category '" + category[r] + "' maps to both labels");
  }
}

void SplitRatios::validate() const {
  if (!(train > 0.0 && val > 0.0 && test > 0.0))
    fail(errc::config, "split ratios must be positive");
  if (std::abs(train + val + test - 1.0) > 1e-9)
    fail(errc::config, "split ratios must sum to 1");
}

Matrix apply_mask(const Matrix& X, const FeatureMask& mask) {
  if (mask.size() != X.cols)
    fail(errc::shape, "mask length " + std::to_string(mask.size()) + " vs " +
                          std::to_string(X.cols) + " columns");
  Matrix out = X;
  for (std::size_t c = 0; c < X.cols; ++c) {
    if (mask.active[c]) continue;
    for (std::size_t r = 0; r < X.rows; ++r) out(r, c) = 0.0;
  }
  return out;
}

namespace {

bool is_missing_token(const std::string& raw) {
  const std::string v = to_lower(trim(raw));
  return v.empty() || v == "nan" || v == "na" || v == "inf" || v == "infinity" || v == "-inf" ||
         v == "-infinity" || v == "null";
}

DataView take_rows(const Dataset& ds, const std::vector<std::size_t>& rows) {
  DataView view;
  view.X = gather_rows(ds.X, rows);
  view.y.reserve(rows.size());
  view.category.reserve(rows.size());
  for (std::size_t r : rows) {
    view.y.push_back(ds.y[r]);
    view.category.push_back(ds.category[r]);
  }
  view.source_rows = rows;
  return view;
}

// largest-remainder apportionment of n into three buckets
std::array<std::size_t, 3> split_counts(std::size_t n, const SplitRatios& ratios) {
  const double want[3] = {ratios.train * n, ratios.val * n, ratios.test * n};
  std::array<std::size_t, 3> counts{};
  double frac[3];
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    counts[i] = static_cast<std::size_t>(want[i]);
    frac[i] = want[i] - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::array<int, 3> order = {0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (frac[a] != frac[b]) return frac[a] > frac[b];
    return a < b;
  });
  for (std::size_t left = n - assigned, i = 0; i < left; ++i) ++counts[order[i % 3]];
  return counts;
}

}  // namespace

Dataset load_and_preprocess(const std::vector<std::filesystem::path>& csv_paths,
                            const std::string& label_column, const std::string& category_column,
                            const PreprocessConfig& config) {
  if (csv_paths.empty()) fail(errc::usage, "no input files given");

  std::vector<CsvTable> tables;
  tables.reserve(csv_paths.size());
  for (const auto& p : csv_paths) tables.push_back(read_csv(p));

  for (std::size_t t = 0; t < tables.size(); ++t) {
    if (tables[t].col(label_column) == npos)
      fail(errc::ingestion, csv_paths[t].string() + ": missing label column '" + label_column + "'");
    if (tables[t].col(category_column) == npos)
      fail(errc::ingestion,
           csv_paths[t].string() + ": missing category column '" + category_column + "'");
  }

  // feature columns = intersection over all files, first file's order
  std::vector<std::string> columns;
  for (const auto& name : tables[0].header) {
    if (name == label_column || name == category_column) continue;
    bool everywhere = true;
    for (const auto& t : tables)
      if (t.col(name) == npos) everywhere = false;
    if (!everywhere) continue;
    if (std::find(columns.begin(), columns.end(), name) != columns.end()) continue;
    const std::string lowered = to_lower(name);
    bool is_id = false;
    for (const auto& pat : config.id_column_patterns)
      if (lowered.find(to_lower(pat)) != std::string::npos) is_id = true;
    if (!is_id) columns.push_back(name);
  }
  if (columns.empty()) fail(errc::ingestion, "no shared feature columns left after filtering");

  // gather raw cells column-major, plus labels/categories
  std::size_t total_rows = 0;
  for (const auto& t : tables) total_rows += t.rows.size();
  std::vector<std::vector<std::string>> raw(columns.size());
  for (auto& col : raw) col.reserve(total_rows);
  std::vector<std::string> category;
  std::vector<std::uint8_t> label;
  category.reserve(total_rows);
  label.reserve(total_rows);

  const bool label_is_category = label_column == category_column;
  for (std::size_t t = 0; t < tables.size(); ++t) {
    const auto& table = tables[t];
    std::vector<std::size_t> src_col(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) src_col[c] = table.col(columns[c]);
    const std::size_t label_col = table.col(label_column);
    const std::size_t cat_col = table.col(category_column);
    for (const auto& row : table.rows) {
      for (std::size_t c = 0; c < columns.size(); ++c) raw[c].push_back(row[src_col[c]]);
      const std::string cat = trim(row[cat_col]);
      category.push_back(cat);
      if (label_is_category) {
        label.push_back(cat == config.benign_label ? 0 : 1);
      } else {
        const std::string lv = trim(row[label_col]);
        if (auto num = parse_double(lv))
          label.push_back(*num != 0.0 ? 1 : 0);
        else
          label.push_back(lv == config.benign_label ? 0 : 1);
      }
    }
  }
  if (total_rows == 0) fail(errc::ingestion, "input files contain no rows");

  // per-column typing: numeric if every present value parses to a finite double
  const double missing_marker = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::vector<double>> values(columns.size());
  std::vector<double> missing_fraction(columns.size(), 0.0);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    auto& out = values[c];
    out.resize(total_rows, missing_marker);
    bool numeric = true;
    std::size_t missing = 0;
    for (std::size_t r = 0; r < total_rows; ++r) {
      if (is_missing_token(raw[c][r])) {
        ++missing;
        continue;
      }
      const auto v = parse_double(raw[c][r]);
      if (!v || !std::isfinite(*v)) {
        numeric = false;
        break;
      }
      out[r] = *v;
    }
    if (!numeric) {
      // encode distinct strings to integer categories, lexicographic order
      std::set<std::string> distinct;
      missing = 0;
      for (std::size_t r = 0; r < total_rows; ++r) {
        if (is_missing_token(raw[c][r]))
          ++missing;
        else
          distinct.insert(trim(raw[c][r]));
      }
      std::map<std::string, double> code;
      double next = 0.0;
      for (const auto& s : distinct) code[s] = next++;
      for (std::size_t r = 0; r < total_rows; ++r)
        out[r] = is_missing_token(raw[c][r]) ? missing_marker : code[trim(raw[c][r])];
    }
    missing_fraction[c] = static_cast<double>(missing) / static_cast<double>(total_rows);
  }

  // drop columns over the missing threshold, then rows with any missing value
  std::vector<std::size_t> keep_cols;
  for (std::size_t c = 0; c < columns.size(); ++c)
    if (missing_fraction[c] <= config.missing_column_threshold) keep_cols.push_back(c);
  if (keep_cols.empty()) fail(errc::ingestion, "every column exceeded the missing threshold");

  std::vector<std::size_t> keep_rows;
  for (std::size_t r = 0; r < total_rows; ++r) {
    bool ok = true;
    for (std::size_t c : keep_cols)
      if (std::isnan(values[c][r])) ok = false;
    if (ok) keep_rows.push_back(r);
  }
  if (keep_rows.empty()) fail(errc::ingestion, "no rows left after dropping missing values");

  // drop constant columns on the surviving rows
  std::vector<std::size_t> final_cols;
  for (std::size_t c : keep_cols) {
    const double first = values[c][keep_rows[0]];
    bool constant = true;
    for (std::size_t r : keep_rows)
      if (values[c][r] != first) {
        constant = false;
        break;
      }
    if (!constant) final_cols.push_back(c);
  }
  if (final_cols.empty()) fail(errc::ingestion, "all feature columns are constant");

  Dataset ds;
  for (std::size_t c : final_cols) ds.feature_names.push_back(columns[c]);
  ds.X = Matrix(keep_rows.size(), final_cols.size());
  ds.scaler.resize(final_cols.size());
  for (std::size_t j = 0; j < final_cols.size(); ++j) {
    const auto& col = values[final_cols[j]];
    double lo = col[keep_rows[0]], hi = lo;
    for (std::size_t r : keep_rows) {
      lo = std::min(lo, col[r]);
      hi = std::max(hi, col[r]);
    }
    ds.scaler[j] = {lo, hi};
    const double range = hi - lo;
    for (std::size_t i = 0; i < keep_rows.size(); ++i)
      ds.X(i, j) = range > 0.0 ? (col[keep_rows[i]] - lo) / range : 0.0;
  }
  for (std::size_t r : keep_rows) {
    ds.y.push_back(label[r]);
    ds.category.push_back(category[r]);
  }
  ds.split.assign(keep_rows.size(), Split::train);
  ds.validate();
  return ds;
}

Dataset balance_and_split(const Dataset& ds, SplitRatios ratios, std::uint64_t seed) {
  ratios.validate();
  std::vector<std::size_t> class_rows[2];
  for (std::size_t r = 0; r < ds.n_rows(); ++r) class_rows[ds.y[r] ? 1 : 0].push_back(r);
  if (class_rows[0].empty() || class_rows[1].empty())
    fail(errc::balance, std::string("class with zero samples: ") +
                            (class_rows[0].empty() ? "label 0" : "label 1"));

  Rng rng(seed);
  const std::size_t target = std::min(class_rows[0].size(), class_rows[1].size());
  for (auto& rows : class_rows) {
    if (rows.size() > target) {
      rng.shuffle(rows);
      rows.resize(target);
      std::sort(rows.begin(), rows.end());
    }
  }

  // stratified split per class, largest-remainder counts
  std::vector<std::size_t> kept;
  std::vector<Split> kept_split;
  for (auto& rows : class_rows) {
    rng.shuffle(rows);
    const auto counts = split_counts(rows.size(), ratios);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      Split s = Split::test;
      if (i < counts[0]) s = Split::train;
      else if (i < counts[0] + counts[1]) s = Split::val;
      kept.push_back(rows[i]);
      kept_split.push_back(s);
    }
  }

  // stable row order: sort retained rows by original index
  std::vector<std::size_t> order(kept.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return kept[a] < kept[b]; });

  Dataset out;
  out.feature_names = ds.feature_names;
  out.X = Matrix(kept.size(), ds.n_features());
  out.scaler = ds.scaler;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::size_t src = kept[order[i]];
    std::copy_n(ds.X.data.data() + src * ds.n_features(), ds.n_features(),
                out.X.data.data() + i * ds.n_features());
    out.y.push_back(ds.y[src]);
    out.category.push_back(ds.category[src]);
    out.split.push_back(kept_split[order[i]]);
  }

  // refit the scaler on training rows only; val/test are transformed with the
  // training statistics and clipped into [0,1]
  for (std::size_t j = 0; j < out.n_features(); ++j) {
    double lo = 1.0, hi = 0.0;
    bool any = false;
    for (std::size_t r = 0; r < out.n_rows(); ++r) {
      if (out.split[r] != Split::train) continue;
      lo = any ? std::min(lo, out.X(r, j)) : out.X(r, j);
      hi = any ? std::max(hi, out.X(r, j)) : out.X(r, j);
      any = true;
    }
    if (!any) fail(errc::balance, "empty training split");
    const double range = hi - lo;
    for (std::size_t r = 0; r < out.n_rows(); ++r)
      out.X(r, j) = range > 0.0 ? clamp01((out.X(r, j) - lo) / range) : 0.0;
    // compose with the original units so the stored scaler still inverts
    const auto [omin, omax] = out.scaler[j];
    const double orange = omax - omin;
    out.scaler[j] = {omin + lo * orange, omin + hi * orange};
  }
  out.validate();
  return out;
}

DataView category_view(const Dataset& ds, std::span<const std::string> categories, Split split) {
  if (categories.empty()) fail(errc::selection, "category_view: empty category set");
  std::set<std::string> wanted(categories.begin(), categories.end());
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < ds.n_rows(); ++r)
    if (ds.split[r] == split && wanted.count(ds.category[r])) rows.push_back(r);
  if (rows.empty())
    fail(errc::selection, std::string("no rows match the requested categories in split ") +
                              split_name(split));
  return take_rows(ds, rows);
}

DataView split_view(const Dataset& ds, Split split) {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < ds.n_rows(); ++r)
    if (ds.split[r] == split) rows.push_back(r);
  if (rows.empty()) fail(errc::selection, std::string("empty split ") + split_name(split));
  return take_rows(ds, rows);
}

std::vector<std::string> distinct_categories(const Dataset& ds) {
  std::set<std::string> s(ds.category.begin(), ds.category.end());
  return {s.begin(), s.end()};
}

void SynthSpec::validate() const {
  if (features == 0) fail(errc::spec, "synth spec needs features >= 1");
  if (categories.empty()) fail(errc::spec, "synth spec needs at least one category");
  ratios.validate();
  for (const auto& c : categories) {
    if (c.count == 0) fail(errc::spec, "category '" + c.name + "' has zero samples");
    if (c.mean.size() != features || c.stddev.size() != features)
      fail(errc::spec, "category '" + c.name + "' mean/stddev length != features");
    for (double m : c.mean)
      if (!(m >= 0.0 && m <= 1.0)) fail(errc::spec, "category mean outside [0,1]");
    for (double s : c.stddev)
      if (!(s >= 0.0) || !std::isfinite(s))
        fail(errc::spec, "invalid covariance for category '" + c.name + "'");
  }
}

Dataset synth_generate(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  Dataset ds;
  for (std::size_t j = 0; j < spec.features; ++j) ds.feature_names.push_back("f" + std::to_string(j));
  std::size_t total = 0;
  for (const auto& c : spec.categories) total += c.count;
  ds.X = Matrix(total, spec.features);
  ds.y.reserve(total);
  ds.category.reserve(total);
  ds.split.reserve(total);
  ds.scaler.assign(spec.features, {0.0, 1.0});

  std::size_t row = 0;
  for (const auto& c : spec.categories) {
    const auto counts = split_counts(c.count, spec.ratios);
    std::vector<Split> splits;
    splits.insert(splits.end(), counts[0], Split::train);
    splits.insert(splits.end(), counts[1], Split::val);
    splits.insert(splits.end(), counts[2], Split::test);
    rng.shuffle(splits);
    for (std::size_t i = 0; i < c.count; ++i, ++row) {
      for (std::size_t j = 0; j < spec.features; ++j)
        ds.X(row, j) = clamp01(c.mean[j] + c.stddev[j] * rng.normal());
      ds.y.push_back(c.label);
      ds.category.push_back(c.name);
      ds.split.push_back(splits[i]);
    }
  }
  ds.validate();
  return ds;
}

SynthSpec synth_spec_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(errc::spec, std::string("synth spec parse failed: ") + e.what());
  }
  try {
    SynthSpec spec;
    spec.features = doc.at("features").get<std::size_t>();
    spec.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("ratios")) {
      spec.ratios.train = doc["ratios"].at("train").get<double>();
      spec.ratios.val = doc["ratios"].at("val").get<double>();
      spec.ratios.test = doc["ratios"].at("test").get<double>();
    }
    for (const auto& c : doc.at("categories")) {
      SynthCategory cat;
      cat.name = c.at("name").get<std::string>();
      cat.label = c.at("label").get<int>() ? 1 : 0;
      cat.count = c.at("count").get<std::size_t>();
      cat.mean = c.at("mean").get<std::vector<double>>();
      cat.stddev = c.at("stddev").get<std::vector<double>>();
      spec.categories.push_back(std::move(cat));
    }
    spec.validate();
    return spec;
  } catch (const json::exception& e) {
    fail(errc::spec, std::string("malformed synth spec: ") + e.what());
  }
}

std::string synth_spec_to_json(const SynthSpec& spec) {
  json doc;
  doc["features"] = spec.features;
  doc["seed"] = spec.seed;
  doc["ratios"] = {{"train", spec.ratios.train}, {"val", spec.ratios.val}, {"test", spec.ratios.test}};
  json cats = json::array();
  for (const auto& c : spec.categories) {
    cats.push_back({{"name", c.name},
                    {"label", int(c.label)},
                    {"count", c.count},
                    {"mean", c.mean},
                    {"stddev", c.stddev}});
  }
  doc["categories"] = std::move(cats);
  return doc.dump(2);
}

void save_bundle(const std::filesystem::path& dir, const Dataset& ds, std::uint64_t seed,
                 const std::map<std::string, std::string>& provenance) {
  ds.validate();
  std::filesystem::create_directories(dir);

  std::vector<std::string> header = ds.feature_names;
  header.insert(header.end(), {"label", "category", "split"});
  std::vector<std::vector<std::string>> rows;
  rows.reserve(ds.n_rows());
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    std::vector<std::string> row;
    row.reserve(header.size());
    for (std::size_t c = 0; c < ds.n_features(); ++c) row.push_back(format_double(ds.X(r, c)));
    row.push_back(std::to_string(int(ds.y[r])));
    row.push_back(ds.category[r]);
    row.push_back(split_name(ds.split[r]));
    rows.push_back(std::move(row));
  }
  write_csv(dir / "data.csv", header, rows);

  json meta;
  meta["format_version"] = 1;
  meta["feature_names"] = ds.feature_names;
  json scaler = json::array();
  for (const auto& [lo, hi] : ds.scaler) scaler.push_back({lo, hi});
  meta["scaler"] = std::move(scaler);
  meta["seed"] = seed;
  meta["provenance"] = provenance;
  write_file_atomic(dir / "meta.json", meta.dump(2));
}

Dataset load_bundle(const std::filesystem::path& dir) {
  json meta;
  try {
    meta = json::parse(read_file(dir / "meta.json"));
  } catch (const json::exception& e) {
    fail(errc::io, std::string("bundle meta parse failed: ") + e.what());
  }

  Dataset ds;
  ds.feature_names = meta.at("feature_names").get<std::vector<std::string>>();
  for (const auto& pair : meta.at("scaler"))
    ds.scaler.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());

  const CsvTable table = read_csv(dir / "data.csv");
  const std::size_t F = ds.feature_names.size();
  if (table.header.size() != F + 3) fail(errc::io, "bundle data.csv header mismatch");
  for (std::size_t c = 0; c < F; ++c)
    if (table.header[c] != ds.feature_names[c]) fail(errc::io, "bundle feature order mismatch");

  ds.X = Matrix(table.rows.size(), F);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    for (std::size_t c = 0; c < F; ++c) {
      const auto v = parse_double(row[c]);
      if (!v) fail(errc::io, "bundle data.csv: bad number at row " + std::to_string(r));
      ds.X(r, c) = *v;
    }
    ds.y.push_back(row[F] == "1" ? 1 : 0);
    ds.category.push_back(row[F + 1]);
    const auto s = split_from_name(row[F + 2]);
    if (!s) fail(errc::io, "bundle data.csv: bad split tag '" + row[F + 2] + "'");
    ds.split.push_back(*s);
  }
  ds.validate();
  return ds;
}

void save_mask(const std::filesystem::path& path, const FeatureMask& mask) {
  json doc;
  doc["format_version"] = 1;
  doc["feature_count"] = mask.size();
  doc["active_indices"] = mask.active_indices();
  write_file_atomic(path, doc.dump(2));
}

FeatureMask load_mask(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
    const std::size_t n = doc.at("feature_count").get<std::size_t>();
    const auto idx = doc.at("active_indices").get<std::vector<std::size_t>>();
    return FeatureMask::from_indices(n, idx);
  } catch (const json::exception& e) {
    fail(errc::io, std::string("malformed mask file: ") + e.what());
  }
}

}  // namespace adaptids
