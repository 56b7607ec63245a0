#include "adaptids/feature_selection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>

#include "adaptids/csv.hpp"
#include "adaptids/error.hpp"
#include "adaptids/util.hpp"

namespace adaptids {

double RankingScore::score_of(std::size_t feature) const {
  for (std::size_t i = 0; i < feature_index.size(); ++i)
    if (feature_index[i] == feature) return score[i];
  fail(errc::evaluation, "no ranking score for feature " + std::to_string(feature));
}

RankingScore feature_ranking(const Mlp& model, const FeatureMask& mask, const Matrix& X_val,
                             std::span<const std::uint8_t> y_val,
                             std::span<const std::string> feature_names) {
  if (X_val.rows == 0) fail(errc::evaluation, "feature_ranking: empty validation view");
  if (mask.size() != X_val.cols) fail(errc::shape, "feature_ranking: mask vs columns mismatch");
  if (feature_names.size() != X_val.cols)
    fail(errc::shape, "feature_ranking: names vs columns mismatch");

  RankingScore out;
  out.baseline_accuracy = accuracy(model, X_val, y_val);
  out.feature_index = mask.active_indices();
  for (std::size_t f : out.feature_index) out.feature_name.push_back(feature_names[f]);
  out.score.assign(out.feature_index.size(), 0.0);

  const std::int64_t n = static_cast<std::int64_t>(out.feature_index.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const std::size_t f = out.feature_index[static_cast<std::size_t>(i)];
    Matrix perturbed = X_val;
    for (std::size_t r = 0; r < perturbed.rows; ++r) perturbed(r, f) = 0.0;
    const double acc = accuracy(model, perturbed, y_val, ExecMode::serial);
    out.score[static_cast<std::size_t>(i)] = out.baseline_accuracy - acc;
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < out.score.size(); ++i)
    if (out.score[i] < out.score[best]) best = i;  // ties keep the lowest index
  out.least_important = out.feature_index[best];
  return out;
}

namespace {

// position (within the ranking arrays) of the next feature to remove
std::size_t pick_removal(const RankingScore& ranking, RemovalRule rule) {
  if (rule == RemovalRule::zero_first) {
    for (std::size_t i = 0; i < ranking.score.size(); ++i)
      if (ranking.score[i] == 0.0) return i;
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < ranking.score.size(); ++i)
    if (ranking.score[i] < ranking.score[best]) best = i;
  return best;
}

EliminationStep evaluate_step(const Mlp& model, const Matrix& X_val,
                              std::span<const std::uint8_t> y_val, const FeatureMask& mask,
                              std::size_t removed, std::string removed_name) {
  EliminationStep step;
  step.active_count = mask.active_count();
  step.removed_feature = removed;
  step.removed_name = std::move(removed_name);
  step.mask = mask;
  const Matrix masked = apply_mask(X_val, mask);
  step.accuracy = accuracy(model, masked, y_val);
  const auto [b, m] = accuracy_by_class(model, masked, y_val);
  step.acc_benign = b;
  step.acc_malicious = m;
  step.valid = b > 0.5 && m > 0.5;
  return step;
}

}  // namespace

std::vector<EliminationStep> recursive_elimination(const Mlp& model, const Matrix& X_val,
                                                   std::span<const std::uint8_t> y_val,
                                                   std::span<const std::string> feature_names,
                                                   RankingMode mode, RemovalRule rule) {
  const std::size_t F = X_val.cols;
  if (F == 0) fail(errc::evaluation, "recursive_elimination: no features");

  std::vector<EliminationStep> trace;
  FeatureMask mask = FeatureMask::all_active(F);

  if (mode == RankingMode::fixed) {
    RankingScore ranking = feature_ranking(model, mask, X_val, y_val, feature_names);
    // removal order from the one precomputed ranking
    std::vector<std::size_t> order(ranking.score.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (rule == RemovalRule::zero_first) {
        const bool za = ranking.score[a] == 0.0;
        const bool zb = ranking.score[b] == 0.0;
        if (za != zb) return za;
      }
      if (ranking.score[a] != ranking.score[b]) return ranking.score[a] < ranking.score[b];
      return ranking.feature_index[a] < ranking.feature_index[b];
    });
    for (std::size_t k = 0; k + 1 < F; ++k) {
      const std::size_t f = ranking.feature_index[order[k]];
      auto flags = mask.active;
      flags[f] = 0;
      mask = FeatureMask::from_flags(std::move(flags));
      trace.push_back(evaluate_step(model, X_val, y_val, mask, f, feature_names[f]));
    }
    return trace;
  }

  Matrix masked = X_val;
  while (mask.active_count() > 1) {
    const RankingScore ranking = feature_ranking(model, mask, masked, y_val, feature_names);
    const std::size_t f = ranking.feature_index[pick_removal(ranking, rule)];
    auto flags = mask.active;
    flags[f] = 0;
    mask = FeatureMask::from_flags(std::move(flags));
    for (std::size_t r = 0; r < masked.rows; ++r) masked(r, f) = 0.0;
    trace.push_back(evaluate_step(model, X_val, y_val, mask, f, feature_names[f]));
  }
  return trace;
}

std::vector<double> rank_to_distribution(std::span<const double> scores) {
  if (scores.empty()) fail(errc::evaluation, "rank_to_distribution: no scores");
  constexpr double kEps = 1e-6;
  const double min_score = *std::min_element(scores.begin(), scores.end());
  std::vector<double> p(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    p[i] = scores[i] - min_score + kEps;
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

std::vector<std::size_t> weighted_sample_without_replacement(std::span<const double> probs,
                                                             std::size_t k, Rng& rng) {
  if (k > probs.size()) fail(errc::ratio, "cannot draw more features than exist");
  std::vector<double> weight(probs.begin(), probs.end());
  std::vector<std::size_t> picks;
  picks.reserve(k);
  for (std::size_t draw = 0; draw < k; ++draw) {
    double total = 0.0;
    for (double w : weight) total += w;
    const double u = rng.uniform() * total;
    double cum = 0.0;
    std::size_t chosen = weight.size();
    for (std::size_t i = 0; i < weight.size(); ++i) {
      if (weight[i] <= 0.0) continue;
      cum += weight[i];
      if (u < cum) {
        chosen = i;
        break;
      }
    }
    if (chosen == weight.size()) {  // numeric edge: u == total
      for (std::size_t i = weight.size(); i-- > 0;)
        if (weight[i] > 0.0) {
          chosen = i;
          break;
        }
    }
    picks.push_back(chosen);
    weight[chosen] = 0.0;
  }
  return picks;
}

std::vector<SubsetResult> subset_search(const Mlp& model, const RankingScore& scores, double ratio,
                                        std::size_t n, const Matrix& X_val,
                                        std::span<const std::uint8_t> y_val, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) fail(errc::ratio, "subset ratio must lie in (0,1)");
  if (n == 0) fail(errc::ratio, "subset search needs n >= 1");
  const std::size_t F = scores.feature_index.size();
  if (F == 0) fail(errc::evaluation, "subset_search: empty ranking");
  const std::size_t k =
      static_cast<std::size_t>(std::llround(static_cast<double>(F) * ratio));
  if (k < 1) fail(errc::ratio, "round(F*s) must be >= 1");

  const std::vector<double> probs = rank_to_distribution(scores.score);
  Rng rng(seed);

  // draw all candidates first, then evaluate the distinct ones; output stays
  // in draw order no matter how the evaluation is scheduled
  std::vector<FeatureMask> masks;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < n; ++i) {
    const auto picks = weighted_sample_without_replacement(probs, k, rng);
    std::vector<std::size_t> features;
    features.reserve(k);
    for (std::size_t p : picks) features.push_back(scores.feature_index[p]);
    std::sort(features.begin(), features.end());
    FeatureMask mask = FeatureMask::from_indices(X_val.cols, features);
    if (seen.insert(mask.subset_id).second) masks.push_back(std::move(mask));
  }

  std::vector<SubsetResult> results(masks.size());
  const std::int64_t total = static_cast<std::int64_t>(masks.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < total; ++i) {
    const auto& mask = masks[static_cast<std::size_t>(i)];
    SubsetResult r;
    r.mask = mask;
    r.ratio = ratio;
    const Matrix masked = apply_mask(X_val, mask);
    r.accuracy = accuracy(model, masked, y_val, ExecMode::serial);
    const auto [b, m] = accuracy_by_class(model, masked, y_val, ExecMode::serial);
    r.acc_benign = b;
    r.acc_malicious = m;
    r.valid = b > 0.5 && m > 0.5;
    results[static_cast<std::size_t>(i)] = std::move(r);
  }
  return results;
}

void write_ranking_csv(const std::filesystem::path& path, const RankingScore& ranking) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < ranking.feature_index.size(); ++i) {
    rows.push_back({std::to_string(ranking.feature_index[i]), ranking.feature_name[i],
                    format_double(ranking.score[i]), format_double(ranking.baseline_accuracy)});
  }
  write_csv(path, {"feature_index", "feature", "score", "baseline_accuracy"}, rows);
}

namespace {

std::string active_names(const FeatureMask& mask, std::span<const std::string> names) {
  std::vector<std::string> act;
  for (std::size_t i : mask.active_indices()) act.push_back(names[i]);
  return join(act, ";");
}

}  // namespace

void write_elimination_csv(const std::filesystem::path& path,
                           std::span<const EliminationStep> trace,
                           std::span<const std::string> feature_names) {
  std::vector<std::vector<std::string>> rows;
  std::size_t step = 1;
  for (const auto& s : trace) {
    rows.push_back({std::to_string(step++), std::to_string(s.active_count), s.removed_name,
                    s.mask.subset_id,
                    format_double(static_cast<double>(s.active_count) /
                                  static_cast<double>(feature_names.size())),
                    active_names(s.mask, feature_names), format_double(s.accuracy),
                    format_double(s.acc_benign), format_double(s.acc_malicious),
                    s.valid ? "1" : "0"});
  }
  write_csv(path,
            {"step", "active_count", "removed_feature", "subset_id", "ratio", "active_features",
             "accuracy", "acc_benign", "acc_malicious", "valid"},
            rows);
}

void write_subsets_csv(const std::filesystem::path& path, std::span<const SubsetResult> results,
                       std::span<const std::string> feature_names) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : results) {
    rows.push_back({r.mask.subset_id, format_double(r.ratio),
                    std::to_string(r.mask.active_count()), active_names(r.mask, feature_names),
                    format_double(r.accuracy), format_double(r.acc_benign),
                    format_double(r.acc_malicious), r.valid ? "1" : "0"});
  }
  write_csv(path,
            {"subset_id", "ratio", "active_count", "active_features", "accuracy", "acc_benign",
             "acc_malicious", "valid"},
            rows);
}

}  // namespace adaptids
