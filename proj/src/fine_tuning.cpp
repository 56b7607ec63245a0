#include "adaptids/fine_tuning.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>

#include <nlohmann/json.hpp>

#include "adaptids/csv.hpp"
#include "adaptids/error.hpp"
#include "adaptids/pruning.hpp"
#include "adaptids/rng.hpp"
#include "adaptids/util.hpp"

namespace adaptids {

using json = nlohmann::json;

const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::HT: return "HT";
    case Algorithm::HD: return "HD";
    case Algorithm::HI: return "HI";
    case Algorithm::KD: return "KD";
  }
  return "?";
}

std::optional<Algorithm> algorithm_from_name(std::string_view name) {
  if (name == "HT") return Algorithm::HT;
  if (name == "HD") return Algorithm::HD;
  if (name == "HI") return Algorithm::HI;
  if (name == "KD") return Algorithm::KD;
  return std::nullopt;
}

double canonical_alpha(Algorithm a, double requested) {
  switch (a) {
    case Algorithm::HT: return 0.0;
    case Algorithm::KD: return 1.0;
    case Algorithm::HI: return std::numeric_limits<double>::quiet_NaN();  // not applicable
    case Algorithm::HD: return requested;
  }
  return requested;
}

const char* model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::BRM: return "BRM";
    case ModelKind::P_BRM: return "P-BRM";
    case ModelKind::E_BRM: return "E-BRM";
    case ModelKind::EP_BRM: return "EP-BRM";
  }
  return "?";
}

std::optional<ModelKind> model_kind_from_name(std::string_view name) {
  if (name == "BRM") return ModelKind::BRM;
  if (name == "P-BRM") return ModelKind::P_BRM;
  if (name == "E-BRM") return ModelKind::E_BRM;
  if (name == "EP-BRM") return ModelKind::EP_BRM;
  return std::nullopt;
}

bool model_kind_is_edge(ModelKind k) {
  return k == ModelKind::E_BRM || k == ModelKind::EP_BRM;
}

FineTuneSpec FineTuneSpec::make(Algorithm algorithm, int edge_case, FeatureMask student_mask,
                                std::vector<std::string> local_categories,
                                TrainConfig train_config, double alpha) {
  FineTuneSpec spec;
  spec.algorithm = algorithm;
  spec.alpha = canonical_alpha(algorithm, alpha);
  spec.edge_case = edge_case;
  spec.teacher_mask = edge_case == 1 ? student_mask : FeatureMask::all_active(student_mask.size());
  spec.student_mask = std::move(student_mask);
  spec.local_categories = std::move(local_categories);
  spec.train_config = std::move(train_config);
  return spec;
}

void FineTuneSpec::validate(std::size_t feature_count) const {
  if (edge_case < 1 || edge_case > 4) fail(errc::spec, "edge case must be 1..4");
  if (student_mask.size() != feature_count || teacher_mask.size() != feature_count)
    fail(errc::spec, "mask length does not match the feature count");
  if (edge_case == 1) {
    if (teacher_mask.active != student_mask.active)
      fail(errc::spec, "case 1 requires the teacher and student masks to match");
  } else if (!teacher_mask.all()) {
    fail(errc::spec, "cases 2-4 require a full-feature teacher");
  }
  if (algorithm == Algorithm::HD && !(alpha >= 0.0 && alpha <= 1.0))
    fail(errc::spec, "alpha must lie in [0,1]");
  if (local_categories.empty()) fail(errc::spec, "local category set is empty");
  train_config.validate();
}

std::vector<double> build_targets(Algorithm algorithm, double alpha,
                                  const std::vector<std::uint8_t>* y_true,
                                  const std::vector<double>* teacher_scores) {
  const bool needs_labels = algorithm == Algorithm::HT || algorithm == Algorithm::HD;
  const bool needs_teacher = algorithm != Algorithm::HT;
  if (needs_labels && (!y_true || y_true->empty()))
    fail(errc::spec, std::string(algorithm_name(algorithm)) + " requires true labels");
  if (needs_teacher && (!teacher_scores || teacher_scores->empty()))
    fail(errc::spec, std::string(algorithm_name(algorithm)) + " requires teacher scores");
  if (needs_labels && needs_teacher && y_true->size() != teacher_scores->size())
    fail(errc::shape, "labels vs teacher scores length mismatch");

  const std::size_t n = needs_labels ? y_true->size() : teacher_scores->size();
  std::vector<double> targets(n);
  switch (algorithm) {
    case Algorithm::HT:
      for (std::size_t i = 0; i < n; ++i) targets[i] = (*y_true)[i] ? 1.0 : 0.0;
      break;
    case Algorithm::HD: {
      if (!(alpha >= 0.0 && alpha <= 1.0)) fail(errc::spec, "alpha must lie in [0,1]");
      for (std::size_t i = 0; i < n; ++i) {
        const double q = clamp01((*teacher_scores)[i]);
        const double p = (*y_true)[i] ? 1.0 : 0.0;
        targets[i] = alpha * q + (1.0 - alpha) * p;
      }
      break;
    }
    case Algorithm::HI:
      // ties at exactly 0.5 round to 1, matching the predict threshold
      for (std::size_t i = 0; i < n; ++i)
        targets[i] = clamp01((*teacher_scores)[i]) >= 0.5 ? 1.0 : 0.0;
      break;
    case Algorithm::KD:
      for (std::size_t i = 0; i < n; ++i) targets[i] = clamp01((*teacher_scores)[i]);
      break;
  }
  return targets;
}

LearningInput build_learning_input(int edge_case, const Matrix& X_local,
                                   const FeatureMask& student_mask, std::uint64_t shuffle_seed) {
  if (edge_case < 1 || edge_case > 4) fail(errc::spec, "edge case must be 1..4");
  LearningInput in;
  const std::size_t n = X_local.rows;

  switch (edge_case) {
    case 1: {
      in.student_X = apply_mask(X_local, student_mask);
      in.teacher_X = in.student_X;  // teacher sees the same masked data
      in.source_row.resize(n);
      for (std::size_t i = 0; i < n; ++i) in.source_row[i] = i;
      break;
    }
    case 2: {
      in.student_X = apply_mask(X_local, student_mask);
      in.teacher_X = X_local;  // teacher keeps full features
      in.source_row.resize(n);
      for (std::size_t i = 0; i < n; ++i) in.source_row[i] = i;
      break;
    }
    case 3: {
      in.student_X = X_local;  // student learns from full-feature rows
      in.teacher_X = X_local;
      in.source_row.resize(n);
      for (std::size_t i = 0; i < n; ++i) in.source_row[i] = i;
      break;
    }
    case 4: {
      // paired masked + unmasked duplicates in one stream, shuffled by seed
      const Matrix masked = apply_mask(X_local, student_mask);
      std::vector<std::size_t> order(2 * n);
      for (std::size_t i = 0; i < 2 * n; ++i) order[i] = i;
      Rng rng(shuffle_seed);
      rng.shuffle(order);

      in.student_X = Matrix(2 * n, X_local.cols);
      in.teacher_X = Matrix(2 * n, X_local.cols);
      in.source_row.resize(2 * n);
      for (std::size_t i = 0; i < 2 * n; ++i) {
        const std::size_t slot = order[i];
        const std::size_t src = slot % n;
        const Matrix& variant = slot < n ? masked : X_local;
        std::copy_n(variant.data.data() + src * X_local.cols, X_local.cols,
                    in.student_X.data.data() + i * X_local.cols);
        // the teacher always gets the full-feature version of the same sample
        std::copy_n(X_local.data.data() + src * X_local.cols, X_local.cols,
                    in.teacher_X.data.data() + i * X_local.cols);
        in.source_row[i] = src;
      }
      break;
    }
  }
  return in;
}

namespace {

EvalReport evaluate_on_test(const Mlp& student, const FeatureMask& student_mask,
                            const Mlp& teacher, const Dataset& ds,
                            std::span<const std::string> local_categories) {
  const DataView test = split_view(ds, Split::test);
  const Matrix student_in = apply_mask(test.X, student_mask);

  EvalReport report;
  report.global_accuracy = accuracy(student, student_in, test.y);

  const auto student_pred = predict(student, student_in);
  std::map<std::string, std::size_t> correct;
  for (std::size_t r = 0; r < test.y.size(); ++r) {
    report.per_category_count[test.category[r]] += 1;
    if (student_pred[r] == test.y[r]) correct[test.category[r]] += 1;
  }
  for (const auto& [cat, count] : report.per_category_count)
    report.per_category_accuracy[cat] =
        static_cast<double>(correct[cat]) / static_cast<double>(count);

  const std::set<std::string> local(local_categories.begin(), local_categories.end());
  std::vector<std::size_t> hist_rows;
  for (std::size_t r = 0; r < test.y.size(); ++r)
    if (!local.count(test.category[r])) hist_rows.push_back(r);
  if (hist_rows.empty())
    fail(errc::evaluation, "historical view is empty: every test category is local");

  const Matrix hist_student = gather_rows(student_in, hist_rows);
  const Matrix hist_teacher = gather_rows(test.X, hist_rows);
  std::vector<std::uint8_t> hist_y;
  hist_y.reserve(hist_rows.size());
  for (std::size_t r : hist_rows) hist_y.push_back(test.y[r]);

  report.historical_accuracy = accuracy(student, hist_student, hist_y);
  report.brm_historical_accuracy = accuracy(teacher, hist_teacher, hist_y);
  report.historical_loss =
      std::max(0.0, report.brm_historical_accuracy - report.historical_accuracy);
  report.baselines.teacher_global_accuracy = accuracy(teacher, test.X, test.y);
  return report;
}

}  // namespace

EvalReport evaluate_student(const Mlp& student, const FeatureMask& student_mask,
                            const Mlp& teacher, const Dataset& ds,
                            std::span<const std::string> local_categories) {
  EvalReport report = evaluate_on_test(student, student_mask, teacher, ds, local_categories);
  report.baselines.student_pre_global_accuracy = report.global_accuracy;
  report.baselines.student_pre_historical_loss = report.historical_loss;
  return report;
}

FineTuneResult fine_tune(const Mlp& teacher, Mlp& student, const FineTuneSpec& spec,
                         const Dataset& ds) {
  spec.validate(ds.n_features());
  if (student.input_dim() != ds.n_features())
    fail(errc::shape, "student input dimension must equal the dataset feature count");
  if (teacher.input_dim() != ds.n_features())
    fail(errc::shape, "teacher input dimension must equal the dataset feature count");

  const EvalBaselines pre = [&] {
    const EvalReport r =
        evaluate_student(student, spec.student_mask, teacher, ds, spec.local_categories);
    return EvalBaselines{r.baselines.teacher_global_accuracy, r.global_accuracy,
                         r.historical_loss};
  }();

  const DataView local_train = category_view(ds, spec.local_categories, Split::train);
  const DataView local_val = category_view(ds, spec.local_categories, Split::val);

  // training stream per the case; teacher scores computed once, teacher frozen
  const LearningInput input =
      build_learning_input(spec.edge_case, local_train.X, spec.student_mask, student.rng_seed);
  const std::vector<double> teacher_scores = forward(teacher, input.teacher_X);
  std::vector<std::uint8_t> labels(input.source_row.size());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = local_train.y[input.source_row[i]];
  const std::vector<double> targets =
      build_targets(spec.algorithm, spec.alpha, &labels, &teacher_scores);

  // validation under deployment conditions: student-masked inputs, targets
  // built by the same rule from teacher scores on the teacher's view
  const Matrix val_student = apply_mask(local_val.X, spec.student_mask);
  const Matrix val_teacher = apply_mask(local_val.X, spec.teacher_mask);
  const std::vector<double> val_teacher_scores = forward(teacher, val_teacher);
  const std::vector<double> val_targets =
      build_targets(spec.algorithm, spec.alpha, &local_val.y, &val_teacher_scores);

  FineTuneResult result;
  result.train_report =
      train(student, input.student_X, targets, val_student, val_targets, spec.train_config);
  result.report = evaluate_on_test(student, spec.student_mask, teacher, ds, spec.local_categories);
  result.report.baselines = pre;
  return result;
}

std::vector<SweepCell> scenario_sweep(const Mlp& teacher, const Dataset& ds,
                                      const SweepSpec& spec) {
  const FeatureMask full = FeatureMask::all_active(ds.n_features());
  std::vector<double> prune_ratios = spec.prune_ratios.empty()
                                         ? std::vector<double>{0.15}
                                         : spec.prune_ratios;
  std::vector<std::pair<double, FeatureMask>> masks = spec.masks;
  if (masks.empty()) masks.emplace_back(1.0, full);

  std::vector<SweepCell> cells;
  std::size_t cell_index = 0;

  const auto run_cell = [&](ModelKind kind, int edge_case, Algorithm alg, double prune_ratio,
                            double feature_ratio, const FeatureMask& mask) {
    SweepCell cell;
    cell.kind = kind;
    cell.edge_case = edge_case;
    cell.algorithm = alg;
    cell.prune_ratio = prune_ratio;
    cell.feature_ratio = feature_ratio;
    cell.subset_id = mask.subset_id;
    ++cell_index;

    if (!model_kind_is_edge(kind) && edge_case != 2) {
      cell.status = "skipped";
      cell.note = "centralized deployment uses case 2 semantics";
      cells.push_back(std::move(cell));
      return;
    }

    const auto start = std::chrono::steady_clock::now();
    try {
      Mlp student = (kind == ModelKind::P_BRM || kind == ModelKind::EP_BRM)
                        ? prune_neurons(teacher, prune_ratio)
                        : teacher;
      student.rng_seed = Rng::mix(spec.seed, cell_index);
      FineTuneSpec ft = FineTuneSpec::make(alg, edge_case, mask, spec.local_categories,
                                           spec.train_config, spec.hd_alpha);
      const FineTuneResult result = fine_tune(teacher, student, ft, ds);
      cell.report = result.report;
      cell.train_report = result.train_report;
      cell.status = "ok";
    } catch (const error& e) {
      cell.status = "error";
      cell.note = e.what();
    }
    cell.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                             start)
                       .count();
    cells.push_back(std::move(cell));
  };

  for (ModelKind kind : spec.kinds) {
    const bool edge = model_kind_is_edge(kind);
    const bool pruned = kind == ModelKind::P_BRM || kind == ModelKind::EP_BRM;
    for (int edge_case : spec.cases) {
      for (Algorithm alg : spec.algorithms) {
        if (pruned && edge) {
          for (double p : prune_ratios)
            for (const auto& [ratio, mask] : masks) run_cell(kind, edge_case, alg, p, ratio, mask);
        } else if (pruned) {
          for (double p : prune_ratios) run_cell(kind, edge_case, alg, p, 1.0, full);
        } else if (edge) {
          for (const auto& [ratio, mask] : masks) run_cell(kind, edge_case, alg, 0.0, ratio, mask);
        } else {
          run_cell(kind, edge_case, alg, 0.0, 1.0, full);
        }
      }
    }
  }
  return cells;
}

void write_leaderboard_csv(const std::filesystem::path& path, std::span<const SweepCell> cells) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& c : cells) {
    rows.push_back({model_kind_name(c.kind), std::to_string(c.edge_case),
                    algorithm_name(c.algorithm), format_double(c.feature_ratio),
                    format_double(c.prune_ratio), c.subset_id, c.status,
                    format_double(c.report.global_accuracy),
                    format_double(c.report.historical_loss),
                    format_double(c.report.historical_accuracy),
                    format_double(c.report.brm_historical_accuracy),
                    format_double(c.report.baselines.teacher_global_accuracy),
                    format_double(c.report.baselines.student_pre_global_accuracy),
                    format_double(c.report.baselines.student_pre_historical_loss),
                    std::to_string(c.train_report.epochs_run),
                    format_double(c.train_report.best_val_loss), format_double(c.wall_ms),
                    c.note});
  }
  write_csv(path,
            {"kind", "case", "algorithm", "feature_ratio", "prune_ratio", "subset_id", "status",
             "global_accuracy", "historical_loss", "historical_accuracy",
             "brm_historical_accuracy", "teacher_global_accuracy",
             "student_pre_global_accuracy", "student_pre_historical_loss", "epochs_run",
             "best_val_loss", "wall_ms", "note"},
            rows);
}

std::string eval_report_to_json(const EvalReport& report, int indent) {
  json doc;
  doc["global_accuracy"] = report.global_accuracy;
  doc["per_category_accuracy"] = report.per_category_accuracy;
  doc["per_category_count"] = report.per_category_count;
  doc["historical_accuracy"] = report.historical_accuracy;
  doc["brm_historical_accuracy"] = report.brm_historical_accuracy;
  doc["historical_loss"] = report.historical_loss;
  doc["baselines"] = {
      {"teacher_global_accuracy", report.baselines.teacher_global_accuracy},
      {"student_pre_global_accuracy", report.baselines.student_pre_global_accuracy},
      {"student_pre_historical_loss", report.baselines.student_pre_historical_loss}};
  return doc.dump(indent);
}

}  // namespace adaptids
