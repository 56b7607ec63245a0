#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "adaptids/error.hpp"
#include "adaptids/feature_selection.hpp"
#include "helpers.hpp"

using namespace adaptids;
using testutil::random_matrix;

namespace {

struct Fixture {
  Mlp model;
  Matrix X;
  std::vector<std::uint8_t> y;
  std::vector<std::string> names;

  static Fixture trained(std::size_t per_class = 300, std::uint64_t seed = 5) {
    Fixture f;
    const Dataset ds = testutil::two_blob_dataset(per_class, seed);
    const DataView tr = split_view(ds, Split::train);
    const DataView va = split_view(ds, Split::val);
    f.model = init_mlp({ds.n_features(), 8, 1}, 3);
    TrainConfig tc;
    tc.learning_rate = 0.05;
    tc.batch_size = 64;
    tc.max_epochs = 40;
    tc.patience = 40;
    train(f.model, tr.X, std::vector<double>(tr.y.begin(), tr.y.end()), va.X,
          std::vector<double>(va.y.begin(), va.y.end()), tc);
    f.X = va.X;
    f.y = va.y;
    f.names = ds.feature_names;
    return f;
  }
};

Matrix zero_column(const Matrix& X, std::size_t col) {
  Matrix out = X;
  for (std::size_t r = 0; r < out.rows; ++r) out(r, col) = 0.0;
  return out;
}

}  // namespace

TEST_CASE("feature_ranking: score identity, zero column, dead input") {
  Fixture f = Fixture::trained();
  const FeatureMask all = FeatureMask::all_active(f.X.cols);
  const RankingScore ranking = feature_ranking(f.model, all, f.X, f.y, f.names);
  CHECK(ranking.score.size() == f.X.cols);

  // score identity against an independent re-evaluation, bit-exact
  for (std::size_t i = 0; i < ranking.feature_index.size(); ++i) {
    const double direct =
        accuracy(f.model, zero_column(f.X, ranking.feature_index[i]), f.y);
    CHECK(ranking.score[i] == ranking.baseline_accuracy - direct);
  }

  // a column that is already all zero scores exactly 0
  Matrix with_zero = f.X;
  for (std::size_t r = 0; r < with_zero.rows; ++r) with_zero(r, 2) = 0.0;
  const RankingScore rz = feature_ranking(f.model, all, with_zero, f.y, f.names);
  CHECK(rz.score[2] == 0.0);

  // a dead input (first-layer weights zeroed) scores exactly 0
  Mlp dead = f.model;
  for (std::size_t c = 0; c < dead.weights[0].cols; ++c) dead.weights[0](1, c) = 0.0;
  const RankingScore rd = feature_ranking(dead, all, f.X, f.y, f.names);
  CHECK(rd.score[1] == 0.0);

  CHECK_THROWS_AS(feature_ranking(f.model, all, Matrix(0, f.X.cols), {}, f.names), error);
}

TEST_CASE("feature_ranking breaks argmin ties by lowest column index") {
  // constant-score model: zeroing any column changes nothing, all scores 0
  Mlp constant;
  constant.layer_sizes = {3, 2, 1};
  constant.weights = {Matrix(3, 2), Matrix(2, 1)};
  constant.biases = {{0.0, 0.0}, {0.7}};
  Rng rng(2);
  const Matrix X = random_matrix(10, 3, rng, 0.0, 1.0);
  const std::vector<std::uint8_t> y(10, 1);
  const RankingScore r =
      feature_ranking(constant, FeatureMask::all_active(3), X, y,
                      std::vector<std::string>{"a", "b", "c"});
  for (double s : r.score) CHECK(s == 0.0);
  CHECK(r.least_important == 0);
}

TEST_CASE("recursive_elimination traces") {
  Fixture f = Fixture::trained(200, 6);
  const std::size_t F = f.X.cols;

  for (const RankingMode mode : {RankingMode::fixed, RankingMode::iterative}) {
    const auto trace = recursive_elimination(f.model, f.X, f.y, f.names, mode,
                                             RemovalRule::min_rank_first);
    REQUIRE(trace.size() == F - 1);  // exactly F-1 removal steps
    // active counts descend to 1; each accuracy matches a direct re-evaluation
    for (std::size_t k = 0; k < trace.size(); ++k) {
      CHECK(trace[k].active_count == F - 1 - k);
      const double direct = accuracy(f.model, apply_mask(f.X, trace[k].mask), f.y);
      CHECK(trace[k].accuracy == direct);
    }
    // monotone nesting: each active set is a strict subset of the previous
    for (std::size_t k = 1; k < trace.size(); ++k) {
      for (std::size_t j = 0; j < F; ++j)
        if (trace[k].mask.active[j]) CHECK(trace[k - 1].mask.active[j]);
      CHECK(trace[k].mask.active_count() < trace[k - 1].mask.active_count());
    }
  }

  // fixed-rank removal order equals the ascending initial ranking
  const RankingScore initial =
      feature_ranking(f.model, FeatureMask::all_active(F), f.X, f.y, f.names);
  std::vector<std::size_t> order(F);
  for (std::size_t i = 0; i < F; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (initial.score[a] != initial.score[b]) return initial.score[a] < initial.score[b];
    return initial.feature_index[a] < initial.feature_index[b];
  });
  const auto fixed = recursive_elimination(f.model, f.X, f.y, f.names, RankingMode::fixed,
                                           RemovalRule::min_rank_first);
  for (std::size_t k = 0; k < fixed.size(); ++k)
    CHECK(fixed[k].removed_feature == initial.feature_index[order[k]]);
}

TEST_CASE("zero-first removes zero-scored features before negative ones") {
  // craft scores by hand through the fixed-mode sort: just check the rule on a
  // trace where both kinds exist is brittle; instead check pick order directly
  Fixture f = Fixture::trained(150, 8);
  const auto zero_first = recursive_elimination(f.model, f.X, f.y, f.names, RankingMode::iterative,
                                                RemovalRule::zero_first);
  REQUIRE(zero_first.size() == f.X.cols - 1);
  // rule sanity: if the first iterative ranking had zero-scored features, the
  // earliest removals must be exactly those (lowest index first)
  const RankingScore initial =
      feature_ranking(f.model, FeatureMask::all_active(f.X.cols), f.X, f.y, f.names);
  std::vector<std::size_t> zeros;
  for (std::size_t i = 0; i < initial.score.size(); ++i)
    if (initial.score[i] == 0.0) zeros.push_back(initial.feature_index[i]);
  if (!zeros.empty()) CHECK(zero_first.front().removed_feature == zeros.front());
}

TEST_CASE("rank_to_distribution") {
  SUBCASE("equal scores give a uniform distribution") {
    const std::vector<double> scores(8, 0.25);
    const auto p = rank_to_distribution(scores);
    for (double v : p) CHECK(v == doctest::Approx(0.125).epsilon(1e-12));
  }
  SUBCASE("closed form for {0.3, 0.1}") {
    const auto p = rank_to_distribution(std::vector<double>{0.3, 0.1});
    const double eps = 1e-6;
    CHECK(p[0] == doctest::Approx((0.2 + eps) / (0.2 + 2 * eps)).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(eps / (0.2 + 2 * eps)).epsilon(1e-12));
  }
  SUBCASE("negative scores stay drawable and smallest") {
    const auto p = rank_to_distribution(std::vector<double>{0.2, -0.05, 0.0});
    CHECK(p[1] > 0.0);
    CHECK(p[1] < p[2]);
    CHECK(p[2] < p[0]);
  }
  SUBCASE("sums to one within 1e-12 for random score vectors") {
    Rng rng(77);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> scores(1 + rng.index(40));
      for (double& s : scores) s = rng.uniform(-0.5, 0.5);
      const auto p = rank_to_distribution(scores);
      double total = 0.0;
      for (double v : p) {
        CHECK(v > 0.0);
        total += v;
      }
      CHECK(std::abs(total - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("weighted draws favor the heavy feature") {
  std::vector<double> scores{0.9};
  scores.resize(10, 0.1);
  const auto p = rank_to_distribution(scores);
  Rng rng(123);
  std::size_t hits = 0;
  const int draws = 2000;
  for (int i = 0; i < draws; ++i) {
    const auto picks = weighted_sample_without_replacement(p, 3, rng);
    hits += std::count(picks.begin(), picks.end(), std::size_t{0});
  }
  const double uniform_expectation = 3.0 / 10.0;
  CHECK(static_cast<double>(hits) / draws > uniform_expectation + 0.2);

  CHECK_THROWS_AS(weighted_sample_without_replacement(p, 11, rng), error);
}

TEST_CASE("subset_search contract") {
  Fixture f = Fixture::trained(150, 9);
  const FeatureMask all = FeatureMask::all_active(f.X.cols);
  const RankingScore ranking = feature_ranking(f.model, all, f.X, f.y, f.names);

  SUBCASE("ratio 0.25 on F=4 draws single-feature subsets") {
    const auto results = subset_search(f.model, ranking, 0.25, 200, f.X, f.y, 4);
    CHECK(results.size() <= 4);  // at most F distinct singleton subsets
    std::set<std::string> ids;
    for (const auto& r : results) {
      CHECK(r.mask.active_count() == 1);
      CHECK(ids.insert(r.mask.subset_id).second);  // duplicates were discarded
    }
  }

  SUBCASE("a ratio rounding to F yields the full set at baseline accuracy") {
    const auto results = subset_search(f.model, ranking, 0.9, 10, f.X, f.y, 4);
    REQUIRE(results.size() == 1);
    CHECK(results[0].mask.all());
    CHECK(results[0].accuracy == ranking.baseline_accuracy);
  }

  SUBCASE("seed determinism") {
    const auto a = subset_search(f.model, ranking, 0.5, 50, f.X, f.y, 11);
    const auto b = subset_search(f.model, ranking, 0.5, 50, f.X, f.y, 11);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].mask.subset_id == b[i].mask.subset_id);
      CHECK(a[i].accuracy == b[i].accuracy);
    }
  }

  SUBCASE("ratio errors") {
    CHECK_THROWS_AS(subset_search(f.model, ranking, 0.01, 10, f.X, f.y, 1), error);
    CHECK_THROWS_AS(subset_search(f.model, ranking, 1.0, 10, f.X, f.y, 1), error);
    CHECK_THROWS_AS(subset_search(f.model, ranking, 0.5, 0, f.X, f.y, 1), error);
  }
}
