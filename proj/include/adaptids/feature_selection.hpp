#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "adaptids/dataset.hpp"
#include "adaptids/mlp.hpp"
#include "adaptids/rng.hpp"

namespace adaptids {

// zero-perturbation ranking: score(f) = baseline accuracy minus accuracy with
// column f zeroed; higher = more important
struct RankingScore {
  std::vector<std::size_t> feature_index;  // active features, ascending
  std::vector<std::string> feature_name;
  std::vector<double> score;
  double baseline_accuracy = 0.0;
  std::size_t least_important = 0;  // argmin score, ties to the lowest column index

  double score_of(std::size_t feature) const;
};

// X_val must already be masked by `mask`
RankingScore feature_ranking(const Mlp& model, const FeatureMask& mask, const Matrix& X_val,
                             std::span<const std::uint8_t> y_val,
                             std::span<const std::string> feature_names);

enum class RankingMode { fixed, iterative };
enum class RemovalRule { zero_first, min_rank_first };

struct EliminationStep {
  std::size_t active_count = 0;   // after this removal
  std::size_t removed_feature = 0;
  std::string removed_name;
  double accuracy = 0.0;          // with the mask after this removal
  double acc_benign = -1.0;
  double acc_malicious = -1.0;
  bool valid = false;
  FeatureMask mask;
};

// backward elimination from the full set down to one active feature.
// fixed ranks once; iterative re-ranks after every removal. zero_first removes
// zero-scored features before anything else; min_rank_first always removes the
// global minimum (possibly negative) score. Ties go to the lowest column index.
std::vector<EliminationStep> recursive_elimination(const Mlp& model, const Matrix& X_val,
                                                   std::span<const std::uint8_t> y_val,
                                                   std::span<const std::string> feature_names,
                                                   RankingMode mode, RemovalRule rule);

// p(f) = (score(f) - min + eps) / sum(...), eps = 1e-6; all p > 0, sum = 1
std::vector<double> rank_to_distribution(std::span<const double> scores);

// sequential weighted draws with renormalization; k distinct picks
std::vector<std::size_t> weighted_sample_without_replacement(std::span<const double> probs,
                                                             std::size_t k, Rng& rng);

struct SubsetResult {
  FeatureMask mask;
  double ratio = 0.0;
  double accuracy = 0.0;
  double acc_benign = -1.0;
  double acc_malicious = -1.0;
  bool valid = false;  // accuracy > 0.5 on both classes separately
};

// up to n weighted draws of round(F*s) distinct features; duplicate subsets are
// discarded, survivors evaluated with the complement zeroed. Seeded and
// deterministic; results in draw order.
std::vector<SubsetResult> subset_search(const Mlp& model, const RankingScore& scores, double ratio,
                                        std::size_t n, const Matrix& X_val,
                                        std::span<const std::uint8_t> y_val, std::uint64_t seed);

void write_ranking_csv(const std::filesystem::path& path, const RankingScore& ranking);
void write_elimination_csv(const std::filesystem::path& path,
                           std::span<const EliminationStep> trace,
                           std::span<const std::string> feature_names);
void write_subsets_csv(const std::filesystem::path& path, std::span<const SubsetResult> results,
                       std::span<const std::string> feature_names);

}  // namespace adaptids
