#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adaptids/dataset.hpp"
#include "adaptids/mlp.hpp"

namespace adaptids {

// target rules: HT = true hard labels; HD = even mix of labels and teacher
// scores; HI = teacher scores rounded to {0,1}; KD = raw teacher scores
enum class Algorithm { HT, HD, HI, KD };
const char* algorithm_name(Algorithm a);
std::optional<Algorithm> algorithm_from_name(std::string_view name);
// HT pins alpha to 0, KD to 1, HI has none; HD keeps the requested value
double canonical_alpha(Algorithm a, double requested = 0.5);

enum class ModelKind { BRM, P_BRM, E_BRM, EP_BRM };
const char* model_kind_name(ModelKind k);
std::optional<ModelKind> model_kind_from_name(std::string_view name);
bool model_kind_is_edge(ModelKind k);

struct FineTuneSpec {
  Algorithm algorithm = Algorithm::KD;
  double alpha = 1.0;
  int edge_case = 2;  // 1..4; centralized deployments use case 2 with an all-active mask
  FeatureMask student_mask;
  FeatureMask teacher_mask;  // case 1: = student_mask; cases 2-4: all active
  std::vector<std::string> local_categories{"BENIGN", "DDoS"};
  TrainConfig train_config;

  static FineTuneSpec make(Algorithm algorithm, int edge_case, FeatureMask student_mask,
                           std::vector<std::string> local_categories, TrainConfig train_config,
                           double alpha = 0.5);
  void validate(std::size_t feature_count) const;
};

// Eq-style target mixing: alpha * teacher + (1 - alpha) * labels, with the
// teacher scores clamped to [0,1] first. Pass nullptr for inputs an algorithm
// does not need.
std::vector<double> build_targets(Algorithm algorithm, double alpha,
                                  const std::vector<std::uint8_t>* y_true,
                                  const std::vector<double>* teacher_scores);

struct LearningInput {
  Matrix student_X;                     // what the student trains on
  Matrix teacher_X;                     // what the teacher scores (its own mask applied)
  std::vector<std::size_t> source_row;  // row -> index into X_local
};

// cases 1-2 train on the student-masked matrix, case 3 on the full-feature
// matrix, case 4 on paired masked+unmasked duplicates shuffled by seed
LearningInput build_learning_input(int edge_case, const Matrix& X_local,
                                   const FeatureMask& student_mask, std::uint64_t shuffle_seed);

struct EvalBaselines {
  double teacher_global_accuracy = 0.0;
  double student_pre_global_accuracy = 0.0;
  double student_pre_historical_loss = 0.0;
};

struct EvalReport {
  double global_accuracy = 0.0;
  std::map<std::string, double> per_category_accuracy;
  std::map<std::string, std::size_t> per_category_count;
  double historical_accuracy = 0.0;
  double brm_historical_accuracy = 0.0;  // teacher baseline on the historical view
  double historical_loss = 0.0;          // max(0, brm baseline - student), on test rows
  EvalBaselines baselines;
};

// full-test-split evaluation: student masked per deployment, teacher unmasked;
// historical view = test rows whose category is outside local_categories
EvalReport evaluate_student(const Mlp& student, const FeatureMask& student_mask,
                            const Mlp& teacher, const Dataset& ds,
                            std::span<const std::string> local_categories);

struct FineTuneResult {
  EvalReport report;
  TrainReport train_report;
};

// fine-tune the student on the local-category train/val views; the teacher is
// frozen throughout and its scores are computed once on the learning input
FineTuneResult fine_tune(const Mlp& teacher, Mlp& student, const FineTuneSpec& spec,
                         const Dataset& ds);

struct SweepSpec {
  std::vector<ModelKind> kinds{ModelKind::BRM, ModelKind::P_BRM, ModelKind::E_BRM,
                               ModelKind::EP_BRM};
  std::vector<int> cases{1, 2, 3, 4};
  std::vector<Algorithm> algorithms{Algorithm::HT, Algorithm::HD, Algorithm::HI, Algorithm::KD};
  std::vector<double> prune_ratios;                     // P-BRM / EP-BRM
  std::vector<std::pair<double, FeatureMask>> masks;    // (feature ratio, mask) for E-/EP-BRM
  std::vector<std::string> local_categories{"BENIGN", "DDoS"};
  TrainConfig train_config;
  double hd_alpha = 0.5;
  std::uint64_t seed = 0;
};

struct SweepCell {
  ModelKind kind = ModelKind::BRM;
  int edge_case = 2;
  Algorithm algorithm = Algorithm::KD;
  double feature_ratio = 1.0;
  double prune_ratio = 0.0;
  std::string subset_id;
  std::string status;  // ok | skipped | error
  std::string note;
  EvalReport report;
  TrainReport train_report;
  double wall_ms = 0.0;
};

// full cross-product; inapplicable combinations (centralized kinds with a case
// other than 2) are recorded as skipped, per-cell failures as error
std::vector<SweepCell> scenario_sweep(const Mlp& teacher, const Dataset& ds, const SweepSpec& spec);

void write_leaderboard_csv(const std::filesystem::path& path, std::span<const SweepCell> cells);
std::string eval_report_to_json(const EvalReport& report, int indent = 2);

}  // namespace adaptids
