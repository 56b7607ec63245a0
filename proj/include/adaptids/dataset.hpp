#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adaptids/matrix.hpp"

namespace adaptids {

enum class Split : std::uint8_t { train = 0, val = 1, test = 2 };
const char* split_name(Split s);
std::optional<Split> split_from_name(std::string_view name);

// boolean vector over feature columns; "removing" a feature means zeroing its
// column, never changing the input dimension
struct FeatureMask {
  std::vector<std::uint8_t> active;
  std::string subset_id;  // stable hash of the active index set

  static FeatureMask all_active(std::size_t n);
  static FeatureMask from_indices(std::size_t n, std::span<const std::size_t> indices);
  static FeatureMask from_flags(std::vector<std::uint8_t> flags);

  std::size_t size() const { return active.size(); }
  std::size_t active_count() const;
  std::vector<std::size_t> active_indices() const;
  bool all() const;
};

std::string subset_id_of(std::span<const std::size_t> sorted_indices);

struct Dataset {
  std::vector<std::string> feature_names;
  Matrix X;  // rows x F, values in [0,1]
  std::vector<std::uint8_t> y;
  std::vector<std::string> category;
  std::vector<Split> split;
  std::vector<std::pair<double, double>> scaler;  // per-feature (min,max), original units

  std::size_t n_rows() const { return X.rows; }
  std::size_t n_features() const { return X.cols; }
  void validate() const;
};

// rows extracted from a dataset; X/y/category are copies, source_rows indexes
// back into the parent
struct DataView {
  Matrix X;
  std::vector<std::uint8_t> y;
  std::vector<std::string> category;
  std::vector<std::size_t> source_rows;
};

struct PreprocessConfig {
  // case-insensitive substrings; matching columns are dropped as identifiers
  std::vector<std::string> id_column_patterns = {
      "flow id",    "source ip",       "src ip",   "destination ip", "dst ip",   "source port",
      "src port",   "destination port", "dst port", "protocol",       "timestamp"};
  // columns whose missing fraction exceeds this are dropped; at the default
  // 1.0 no column is dropped and rows with missing values go instead
  double missing_column_threshold = 1.0;
  std::string benign_label = "BENIGN";
};

// merge CSVs on their common columns, drop identifier/constant columns, encode
// non-numeric columns, remove rows with missing or non-finite values, and
// min-max scale every column into [0,1]
Dataset load_and_preprocess(const std::vector<std::filesystem::path>& csv_paths,
                            const std::string& label_column, const std::string& category_column,
                            const PreprocessConfig& config = {});

struct SplitRatios {
  double train = 0.65;
  double val = 0.15;
  double test = 0.20;
  void validate() const;
};

// down-sample the majority class to the minority count, stratified-split by
// label, then refit the scaler on the training rows (val/test clipped)
Dataset balance_and_split(const Dataset& ds, SplitRatios ratios, std::uint64_t seed);

// copy with inactive columns zeroed; input untouched
Matrix apply_mask(const Matrix& X, const FeatureMask& mask);

DataView category_view(const Dataset& ds, std::span<const std::string> categories, Split split);
DataView split_view(const Dataset& ds, Split split);
std::vector<std::string> distinct_categories(const Dataset& ds);

struct SynthCategory {
  std::string name;
  std::uint8_t label = 0;
  std::size_t count = 0;
  std::vector<double> mean;    // length F, values in [0,1]
  std::vector<double> stddev;  // length F, non-negative (diagonal covariance)
};

struct SynthSpec {
  std::size_t features = 0;
  std::uint64_t seed = 0;
  SplitRatios ratios;
  std::vector<SynthCategory> categories;
  void validate() const;
};

// Gaussian clusters clipped to [0,1]^F with per-category stratified splits
Dataset synth_generate(const SynthSpec& spec);

SynthSpec synth_spec_from_json(const std::string& text);
std::string synth_spec_to_json(const SynthSpec& spec);

// bundle = data.csv (normalized data + label + category + split) plus
// meta.json (feature names, scaler, provenance, seed); loading reproduces the
// matrix bit-exactly
void save_bundle(const std::filesystem::path& dir, const Dataset& ds, std::uint64_t seed,
                 const std::map<std::string, std::string>& provenance);
Dataset load_bundle(const std::filesystem::path& dir);

void save_mask(const std::filesystem::path& path, const FeatureMask& mask);
FeatureMask load_mask(const std::filesystem::path& path);

}  // namespace adaptids
