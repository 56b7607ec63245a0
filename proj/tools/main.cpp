// adaptids: adapt a dense MLP traffic classifier to constrained targets via
// feature ranking/selection, structured pruning, and distillation fine-tuning,
// with a file-based model catalog. Stages read prior-stage outputs by path and
// write CSV/JSON plus a per-stage manifest, so every run is reproducible.

#include <cstdlib>
#include <iostream>
#include <set>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "adaptids/catalog.hpp"
#include "adaptids/csv.hpp"
#include "adaptids/dataset.hpp"
#include "adaptids/error.hpp"
#include "adaptids/feature_selection.hpp"
#include "adaptids/fine_tuning.hpp"
#include "adaptids/mlp.hpp"
#include "adaptids/pruning.hpp"
#include "adaptids/run_config.hpp"
#include "adaptids/synth_presets.hpp"
#include "adaptids/util.hpp"

namespace {

using namespace adaptids;
using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;    // bad invocation, unreadable inputs
constexpr int kExitConfig = 3;   // invalid configuration or spec values
constexpr int kExitRuntime = 4;  // failures while computing

int exit_code_for(errc kind) {
  switch (kind) {
    case errc::usage:
    case errc::io:
    case errc::ingestion:
      return kExitUsage;
    case errc::config:
    case errc::spec:
    case errc::ratio:
      return kExitConfig;
    default:
      return kExitRuntime;
  }
}

std::vector<double> parse_ratio_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& part : split(text, ',')) {
    const std::string p = trim(part);
    if (p.empty()) continue;
    const auto colon = split(p, ':');
    if (colon.size() == 3) {  // start:stop:step
      const auto lo = parse_double(colon[0]), hi = parse_double(colon[1]),
                 step = parse_double(colon[2]);
      if (!lo || !hi || !step || *step <= 0) fail(errc::config, "bad ratio range '" + p + "'");
      for (double v = *lo; v <= *hi + 1e-12; v += *step) out.push_back(v);
    } else {
      const auto v = parse_double(p);
      if (!v) fail(errc::config, "bad ratio '" + p + "'");
      out.push_back(*v);
    }
  }
  if (out.empty()) fail(errc::config, "empty ratio list");
  return out;
}

std::vector<std::size_t> parse_size_list(const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& part : split(text, ',')) {
    const std::string p = trim(part);
    if (p.empty()) continue;
    try {
      out.push_back(std::stoul(p));
    } catch (const std::exception&) {
      fail(errc::config, "bad integer '" + p + "'");
    }
  }
  return out;
}

std::vector<std::string> parse_name_list(const std::string& text) {
  std::vector<std::string> out;
  for (const auto& part : split(text, ','))
    if (!trim(part).empty()) out.push_back(trim(part));
  return out;
}

RunConfig collect_config(const CLI::App& cmd) {
  RunConfig cfg;
  for (const CLI::Option* opt : cmd.get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "config") continue;
    if (opt->count() > 0) {
      const auto& results = opt->results();
      cfg.set(name, join(results, ","));
    } else {
      cfg.set(name, opt->get_default_str());
    }
  }
  return cfg;
}

struct TrainFlags {
  double lr = 0.001;
  std::size_t batch = 512;
  std::size_t epochs = 100;
  std::size_t patience = 25;
  double tolerance = 1e-4;

  void attach(CLI::App* cmd) {
    cmd->add_option("--lr", lr, "learning rate")->capture_default_str();
    cmd->add_option("--batch", batch, "mini-batch size")->capture_default_str();
    cmd->add_option("--epochs", epochs, "maximum training epochs")->capture_default_str();
    cmd->add_option("--patience", patience, "early-stop patience in epochs")
        ->capture_default_str();
    cmd->add_option("--tolerance", tolerance, "minimum val-loss improvement")
        ->capture_default_str();
  }
  TrainConfig to_config() const {
    TrainConfig tc;
    tc.learning_rate = lr;
    tc.batch_size = batch;
    tc.max_epochs = epochs;
    tc.patience = std::min(patience, epochs > 0 ? epochs : patience);
    tc.tolerance = tolerance;
    return tc;
  }
};

DataView view_of(const Dataset& ds, const std::string& split) {
  const auto s = split_from_name(split);
  if (!s) fail(errc::usage, "unknown split '" + split + "'");
  return split_view(ds, *s);
}

json tolerant_json(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    fail(errc::io, path.string() + ": " + e.what());
  }
}

FeatureMask mask_from_flags(const std::string& mask_file, const std::string& mask_indices,
                            std::size_t feature_count) {
  if (!mask_file.empty()) return load_mask(mask_file);
  if (!mask_indices.empty())
    return FeatureMask::from_indices(feature_count, parse_size_list(mask_indices));
  return FeatureMask::all_active(feature_count);
}

std::string default_catalog_root(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("ADAPTIDS_CATALOG")) return env;
  return "catalog";
}

// ---------------------------------------------------------------------------
// stages

int cmd_synth(const std::string& preset, const std::string& spec_path, std::uint64_t seed,
              bool seed_passed, const std::string& out, const RunConfig& resolved) {
  SynthSpec spec = spec_path.empty() ? synth_preset(preset, seed)
                                     : synth_spec_from_json(read_file(spec_path));
  if (seed_passed) spec.seed = seed;
  const Dataset ds = synth_generate(spec);
  save_bundle(out, ds, spec.seed,
              {{"stage", "synth"}, {"preset", spec_path.empty() ? preset : "file"}});
  write_file_atomic(fs::path(out) / "synth_spec.json", synth_spec_to_json(spec));
  write_manifest(out, "synth", resolved, spec_path.empty() ? std::vector<std::string>{} :
                                                             std::vector<std::string>{spec_path},
                 {"data.csv", "meta.json", "synth_spec.json"});
  std::cout << "synth: " << ds.n_rows() << " rows, " << ds.n_features() << " features -> " << out
            << "\n";
  return kExitOk;
}

int cmd_preprocess(const std::vector<std::string>& inputs, const std::string& label_col,
                   const std::string& category_col, const std::string& ratios_text,
                   std::uint64_t seed, const std::string& id_patterns,
                   double missing_threshold, const std::string& benign, const std::string& out,
                   const RunConfig& resolved) {
  PreprocessConfig pcfg;
  if (!id_patterns.empty()) pcfg.id_column_patterns = parse_name_list(id_patterns);
  pcfg.missing_column_threshold = missing_threshold;
  pcfg.benign_label = benign;

  std::vector<fs::path> paths(inputs.begin(), inputs.end());
  Dataset ds = load_and_preprocess(paths, label_col, category_col, pcfg);

  SplitRatios ratios;
  const auto parts = parse_ratio_list(ratios_text);
  if (parts.size() != 3) fail(errc::config, "--ratios needs train,val,test");
  ratios.train = parts[0];
  ratios.val = parts[1];
  ratios.test = parts[2];
  ds = balance_and_split(ds, ratios, seed);

  save_bundle(out, ds, seed, {{"stage", "preprocess"}});
  write_manifest(out, "preprocess", resolved, inputs, {"data.csv", "meta.json"});
  std::cout << "preprocess: " << ds.n_rows() << " rows, " << ds.n_features() << " features -> "
            << out << "\n";
  return kExitOk;
}

int cmd_train_base(const std::string& data, const std::string& hidden_text, std::uint64_t seed,
                   const TrainFlags& tf, std::size_t reps, const std::string& out,
                   const RunConfig& resolved) {
  const Dataset ds = load_bundle(data);
  std::vector<std::size_t> layers{ds.n_features()};
  for (std::size_t h : parse_size_list(hidden_text)) layers.push_back(h);
  layers.push_back(1);

  Mlp model = init_mlp(layers, seed);
  model.metadata["stage"] = "train-base";
  model.metadata["config_hash"] = resolved.hash();

  const DataView train_view = split_view(ds, Split::train);
  const DataView val_view = split_view(ds, Split::val);
  const std::vector<double> targets(train_view.y.begin(), train_view.y.end());
  const std::vector<double> val_targets(val_view.y.begin(), val_view.y.end());

  const TrainReport report = train(model, train_view.X, targets, val_view.X, val_targets,
                                   tf.to_config());
  save_model(fs::path(out) / "brm_model.json", model);

  const DataView test_view = split_view(ds, Split::test);
  const double test_acc = accuracy(model, test_view.X, test_view.y);
  const auto [acc_b, acc_m] = accuracy_by_class(model, test_view.X, test_view.y);
  const InferenceStats stats = measure_inference(model, val_view.X, reps);

  json metrics;
  metrics["global_accuracy"] = test_acc;
  metrics["acc_benign"] = acc_b;
  metrics["acc_malicious"] = acc_m;
  metrics["historical_loss"] = 0.0;
  metrics["param_count"] = model.param_count();
  metrics["memory_bytes"] = stats.memory_bytes;
  metrics["latency_ns"] = stats.mean_ns_per_sample;
  write_file_atomic(fs::path(out) / "brm_metrics.json", metrics.dump(2));

  json tr;
  tr["epochs_run"] = report.epochs_run;
  tr["best_epoch"] = report.best_epoch;
  tr["best_val_loss"] = report.best_val_loss;
  write_file_atomic(fs::path(out) / "brm_train_report.json", tr.dump(2));

  write_manifest(out, "train-base", resolved, {data},
                 {"brm_model.json", "brm_metrics.json", "brm_train_report.json"});
  std::cout << "train-base: " << report.epochs_run << " epochs, best val loss "
            << format_double(report.best_val_loss) << ", test accuracy "
            << format_double(test_acc) << "\n";
  return kExitOk;
}

int cmd_rank(const std::string& model_path, const std::string& data, const std::string& split,
             const std::string& out, const RunConfig& resolved) {
  const Mlp model = load_model(model_path);
  const Dataset ds = load_bundle(data);
  const DataView view = view_of(ds, split);
  const RankingScore ranking = feature_ranking(model, FeatureMask::all_active(ds.n_features()),
                                               view.X, view.y, ds.feature_names);
  write_ranking_csv(fs::path(out) / "ranking.csv", ranking);
  write_manifest(out, "rank", resolved, {model_path, data}, {"ranking.csv"});
  std::cout << "rank: baseline " << format_double(ranking.baseline_accuracy)
            << ", least important " << ds.feature_names[ranking.least_important] << "\n";
  return kExitOk;
}

int cmd_rfe(const std::string& model_path, const std::string& data, const std::string& split,
            const std::string& mode, const std::string& removal, const std::string& out,
            const RunConfig& resolved) {
  const Mlp model = load_model(model_path);
  const Dataset ds = load_bundle(data);
  const DataView view = view_of(ds, split);

  RankingMode rmode;
  if (mode == "fixed") rmode = RankingMode::fixed;
  else if (mode == "iterative") rmode = RankingMode::iterative;
  else fail(errc::usage, "--mode must be fixed or iterative");
  RemovalRule rule;
  if (removal == "zero-first") rule = RemovalRule::zero_first;
  else if (removal == "min-rank") rule = RemovalRule::min_rank_first;
  else fail(errc::usage, "--removal must be zero-first or min-rank");

  const auto trace =
      recursive_elimination(model, view.X, view.y, ds.feature_names, rmode, rule);
  write_elimination_csv(fs::path(out) / "rfe_trace.csv", trace, ds.feature_names);
  write_manifest(out, "rfe", resolved, {model_path, data}, {"rfe_trace.csv"});
  std::cout << "rfe: " << trace.size() << " removal steps written\n";
  return kExitOk;
}

RankingScore ranking_from_csv(const fs::path& path) {
  const CsvTable table = read_csv(path);
  const std::size_t fi = table.col("feature_index"), fn = table.col("feature"),
                    sc = table.col("score"), ba = table.col("baseline_accuracy");
  if (fi == npos || fn == npos || sc == npos || ba == npos)
    fail(errc::io, path.string() + ": not a ranking csv");
  RankingScore r;
  for (const auto& row : table.rows) {
    r.feature_index.push_back(std::stoul(row[fi]));
    r.feature_name.push_back(row[fn]);
    r.score.push_back(*parse_double(row[sc]));
    r.baseline_accuracy = *parse_double(row[ba]);
  }
  if (r.score.empty()) fail(errc::io, path.string() + ": empty ranking");
  std::size_t best = 0;
  for (std::size_t i = 1; i < r.score.size(); ++i)
    if (r.score[i] < r.score[best]) best = i;
  r.least_important = r.feature_index[best];
  return r;
}

int cmd_subset_search(const std::string& model_path, const std::string& data,
                      const std::string& split, const std::string& ranking_path,
                      const std::string& ratios_text, std::size_t n, std::uint64_t seed,
                      const std::string& out, const RunConfig& resolved) {
  const Mlp model = load_model(model_path);
  const Dataset ds = load_bundle(data);
  const DataView view = view_of(ds, split);
  const RankingScore ranking =
      ranking_path.empty()
          ? feature_ranking(model, FeatureMask::all_active(ds.n_features()), view.X, view.y,
                            ds.feature_names)
          : ranking_from_csv(ranking_path);

  std::vector<SubsetResult> all;
  std::size_t ratio_index = 0;
  for (double ratio : parse_ratio_list(ratios_text)) {
    const auto results =
        subset_search(model, ranking, ratio, n, view.X, view.y, Rng::mix(seed, ratio_index++));
    all.insert(all.end(), results.begin(), results.end());
  }
  write_subsets_csv(fs::path(out) / "subsets.csv", all, ds.feature_names);
  std::vector<std::string> inputs{model_path, data};
  if (!ranking_path.empty()) inputs.push_back(ranking_path);
  write_manifest(out, "subset-search", resolved, inputs, {"subsets.csv"});
  std::cout << "subset-search: " << all.size() << " distinct subsets evaluated\n";
  return kExitOk;
}

int cmd_prune(const std::string& model_path, const std::string& data, const std::string& split,
              const std::string& mode_text, const std::string& ratios_text, std::size_t reps,
              bool save_models, const std::string& out, const RunConfig& resolved) {
  const Mlp model = load_model(model_path);
  const Dataset ds = load_bundle(data);
  const DataView view = view_of(ds, split);

  PruneMode mode;
  if (mode_text == "neurons") mode = PruneMode::neurons;
  else if (mode_text == "connections") mode = PruneMode::connections;
  else fail(errc::usage, "--mode must be neurons or connections");

  const auto ratios = parse_ratio_list(ratios_text);
  const auto reports = prune_sweep(model, ratios, mode, view.X, view.y, reps);
  write_prune_csv(fs::path(out) / "prune_report.csv", reports);

  std::vector<std::string> outputs{"prune_report.csv"};
  if (save_models) {
    for (const auto& r : reports) {
      if (!r.ok || r.ratio == 0.0) continue;
      const Mlp pruned = mode == PruneMode::neurons ? prune_neurons(model, r.ratio)
                                                    : prune_connections(model, r.ratio);
      const std::string name =
          std::string("pruned_") + prune_mode_name(mode) + "_" + format_double(r.ratio) + ".json";
      save_model(fs::path(out) / "models" / name, pruned);
      outputs.push_back("models/" + name);
    }
  }
  write_manifest(out, "prune", resolved, {model_path, data}, outputs);
  std::cout << "prune: " << reports.size() << " ratios evaluated (" << mode_text << ")\n";
  return kExitOk;
}

int cmd_finetune(const std::string& teacher_path, const std::string& student_path,
                 const std::string& data, const std::string& algorithm_text, int edge_case,
                 double alpha, const std::string& mask_file, const std::string& mask_indices,
                 const std::string& local_text, std::uint64_t seed, bool seed_passed,
                 const TrainFlags& tf, const std::string& out, const RunConfig& resolved) {
  const Mlp teacher = load_model(teacher_path);
  Mlp student = student_path.empty() ? teacher : load_model(student_path);
  if (seed_passed) student.rng_seed = seed;

  const Dataset ds = load_bundle(data);
  const auto algorithm = algorithm_from_name(algorithm_text);
  if (!algorithm) fail(errc::usage, "--algorithm must be one of HT, HD, HI, KD");
  FeatureMask mask = mask_from_flags(mask_file, mask_indices, ds.n_features());

  const FineTuneSpec spec = FineTuneSpec::make(*algorithm, edge_case, mask,
                                               parse_name_list(local_text), tf.to_config(), alpha);
  const FineTuneResult result = fine_tune(teacher, student, spec, ds);

  student.metadata["stage"] = "finetune";
  student.metadata["algorithm"] = algorithm_text;
  student.metadata["case"] = std::to_string(edge_case);
  student.metadata["subset_id"] = mask.subset_id;
  save_model(fs::path(out) / "tuned_model.json", student);
  save_mask(fs::path(out) / "mask.json", mask);
  write_file_atomic(fs::path(out) / "eval_report.json", eval_report_to_json(result.report));

  json tr;
  tr["epochs_run"] = result.train_report.epochs_run;
  tr["best_epoch"] = result.train_report.best_epoch;
  tr["best_val_loss"] = result.train_report.best_val_loss;
  write_file_atomic(fs::path(out) / "finetune_train_report.json", tr.dump(2));

  std::vector<std::string> inputs{teacher_path, data};
  if (!student_path.empty()) inputs.push_back(student_path);
  write_manifest(out, "finetune", resolved, inputs,
                 {"tuned_model.json", "mask.json", "eval_report.json",
                  "finetune_train_report.json"});
  std::cout << "finetune: global accuracy " << format_double(result.report.global_accuracy)
            << ", historical loss " << format_double(result.report.historical_loss) << "\n";
  return kExitOk;
}

// best valid subset per requested ratio; falls back to top-ranked features
std::vector<std::pair<double, FeatureMask>> masks_for_sweep(
    const Dataset& ds, const Mlp& teacher, const std::vector<double>& feature_ratios,
    const std::string& subsets_path, const std::string& eval_split) {
  std::vector<std::pair<double, FeatureMask>> masks;
  if (!subsets_path.empty()) {
    const CsvTable table = read_csv(subsets_path);
    const std::size_t rc = table.col("ratio"), names_c = table.col("active_features"),
                      acc_c = table.col("accuracy"), valid_c = table.col("valid");
    if (rc == npos || names_c == npos || acc_c == npos || valid_c == npos)
      fail(errc::io, subsets_path + ": not a subsets csv");
    for (double want : feature_ratios) {
      double best_acc = -1.0;
      std::string best_names;
      for (const auto& row : table.rows) {
        const double ratio = *parse_double(row[rc]);
        if (std::abs(ratio - want) > 1e-9 || row[valid_c] != "1") continue;
        const double acc = *parse_double(row[acc_c]);
        if (acc > best_acc) {
          best_acc = acc;
          best_names = row[names_c];
        }
      }
      if (best_acc < 0.0) continue;  // no valid subset at this ratio
      std::vector<std::size_t> idx;
      for (const auto& name : split(best_names, ';')) {
        const auto it = std::find(ds.feature_names.begin(), ds.feature_names.end(), name);
        if (it == ds.feature_names.end()) fail(errc::io, "unknown feature '" + name + "'");
        idx.push_back(static_cast<std::size_t>(it - ds.feature_names.begin()));
      }
      masks.emplace_back(want, FeatureMask::from_indices(ds.n_features(), idx));
    }
    return masks;
  }

  const DataView view = view_of(ds, eval_split);
  const RankingScore ranking = feature_ranking(teacher, FeatureMask::all_active(ds.n_features()),
                                               view.X, view.y, ds.feature_names);
  for (double want : feature_ratios) {
    const std::size_t k = static_cast<std::size_t>(
        std::llround(static_cast<double>(ds.n_features()) * want));
    if (k < 1 || k > ds.n_features()) fail(errc::ratio, "feature ratio out of range");
    std::vector<std::size_t> order(ranking.score.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (ranking.score[a] != ranking.score[b]) return ranking.score[a] > ranking.score[b];
      return ranking.feature_index[a] < ranking.feature_index[b];
    });
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < k; ++i) idx.push_back(ranking.feature_index[order[i]]);
    std::sort(idx.begin(), idx.end());
    masks.emplace_back(want, FeatureMask::from_indices(ds.n_features(), idx));
  }
  return masks;
}

int cmd_sweep(const std::string& teacher_path, const std::string& data,
              const std::string& kinds_text, const std::string& cases_text,
              const std::string& algorithms_text, const std::string& prune_ratios_text,
              const std::string& feature_ratios_text, const std::string& subsets_path,
              const std::string& split, const std::string& local_text, double alpha,
              std::uint64_t seed, const TrainFlags& tf, const std::string& out,
              const RunConfig& resolved) {
  const Mlp teacher = load_model(teacher_path);
  const Dataset ds = load_bundle(data);

  SweepSpec spec;
  spec.kinds.clear();
  for (const auto& name : parse_name_list(kinds_text)) {
    const auto kind = model_kind_from_name(name);
    if (!kind) fail(errc::usage, "unknown model kind '" + name + "'");
    spec.kinds.push_back(*kind);
  }
  spec.cases.clear();
  for (std::size_t c : parse_size_list(cases_text)) spec.cases.push_back(static_cast<int>(c));
  spec.algorithms.clear();
  for (const auto& name : parse_name_list(algorithms_text)) {
    const auto alg = algorithm_from_name(name);
    if (!alg) fail(errc::usage, "unknown algorithm '" + name + "'");
    spec.algorithms.push_back(*alg);
  }
  if (!prune_ratios_text.empty()) spec.prune_ratios = parse_ratio_list(prune_ratios_text);
  const bool needs_masks =
      std::any_of(spec.kinds.begin(), spec.kinds.end(), model_kind_is_edge);
  if (needs_masks) {
    if (feature_ratios_text.empty())
      fail(errc::usage, "edge model kinds need --feature-ratios");
    spec.masks = masks_for_sweep(ds, teacher, parse_ratio_list(feature_ratios_text),
                                 subsets_path, split);
    if (spec.masks.empty()) fail(errc::selection, "no usable feature subset for the sweep");
  }
  spec.local_categories = parse_name_list(local_text);
  spec.train_config = tf.to_config();
  spec.hd_alpha = alpha;
  spec.seed = seed;

  const auto cells = scenario_sweep(teacher, ds, spec);
  write_leaderboard_csv(fs::path(out) / "leaderboard.csv", cells);
  std::vector<std::string> inputs{teacher_path, data};
  if (!subsets_path.empty()) inputs.push_back(subsets_path);
  write_manifest(out, "sweep", resolved, inputs, {"leaderboard.csv"});

  std::size_t ok = 0, skipped = 0, failed = 0;
  for (const auto& c : cells) {
    if (c.status == "ok") ++ok;
    else if (c.status == "skipped") ++skipped;
    else ++failed;
  }
  std::cout << "sweep: " << cells.size() << " cells (" << ok << " ok, " << skipped
            << " skipped, " << failed << " error)\n";
  return kExitOk;
}

EntryMetrics metrics_from_json(const fs::path& path) {
  const json doc = tolerant_json(path);
  EntryMetrics m;
  if (doc.contains("global_accuracy")) m.global_accuracy = doc["global_accuracy"].get<double>();
  if (doc.contains("historical_loss")) m.historical_loss = doc["historical_loss"].get<double>();
  if (doc.contains("latency_ns")) m.latency_ns = doc["latency_ns"].get<double>();
  if (doc.contains("memory_bytes")) m.memory_bytes = doc["memory_bytes"].get<std::uint64_t>();
  if (doc.contains("param_count")) m.param_count = doc["param_count"].get<std::uint64_t>();
  return m;
}

int cmd_catalog_put(const std::string& root, const std::string& model_path,
                    const std::string& metrics_path, const std::string& parent,
                    const std::vector<std::string>& tags, const std::string& subset_id,
                    const std::string& features_text, bool fail_fast) {
  Catalog catalog(default_catalog_root(root),
                  fail_fast ? LockPolicy::fail_fast : LockPolicy::wait);
  const Mlp model = load_model(model_path);

  CatalogEntry entry;
  entry.parent_model_id = parent;
  entry.subset_id = subset_id.empty() ? FeatureMask::all_active(model.input_dim()).subset_id
                                      : subset_id;
  if (!features_text.empty()) entry.active_features = parse_name_list(features_text);
  for (const auto& tag : tags) {
    const auto eq = tag.find('=');
    if (eq == std::string::npos) fail(errc::usage, "--tag expects key=value, got '" + tag + "'");
    entry.lineage_tags[tag.substr(0, eq)] = tag.substr(eq + 1);
  }
  if (!metrics_path.empty()) entry.metrics = metrics_from_json(metrics_path);
  entry.metrics.param_count = model.param_count();
  if (entry.metrics.memory_bytes == 0) entry.metrics.memory_bytes = model.memory_bytes();

  const std::string id = catalog.put(model, entry);
  std::cout << id << "\n";
  return kExitOk;
}

int cmd_catalog_get(const std::string& root, const std::string& id, const std::string& out) {
  Catalog catalog(default_catalog_root(root));
  const auto [model, entry] = catalog.get(id);
  if (!out.empty()) {
    save_model(out, model);
    std::cout << "wrote " << out << "\n";
  } else {
    std::cout << serialize_model(model) << "\n";
  }
  return kExitOk;
}

int cmd_catalog_query(const std::string& root, double max_memory, double max_latency,
                      double min_accuracy, double max_hist_loss, const std::string& features_text,
                      const std::string& out) {
  Catalog catalog(default_catalog_root(root));
  QueryConstraints c;
  if (max_memory >= 0) c.max_memory_bytes = static_cast<std::uint64_t>(max_memory);
  if (max_latency >= 0) c.max_latency_ns = max_latency;
  if (min_accuracy >= 0) c.min_global_accuracy = min_accuracy;
  if (max_hist_loss >= 0) c.max_historical_loss = max_hist_loss;
  if (!features_text.empty()) c.available_features = parse_name_list(features_text);

  const auto results = catalog.query(c);
  std::vector<std::vector<std::string>> rows;
  for (const auto& e : results) {
    rows.push_back({e.model_id, e.subset_id, e.parent_model_id,
                    format_double(e.metrics.global_accuracy),
                    format_double(e.metrics.historical_loss),
                    format_double(e.metrics.latency_ns), std::to_string(e.metrics.memory_bytes),
                    std::to_string(e.metrics.param_count)});
  }
  const std::vector<std::string> header{"model_id",        "subset_id",  "parent_model_id",
                                        "global_accuracy", "historical_loss", "latency_ns",
                                        "memory_bytes",    "param_count"};
  if (!out.empty()) {
    write_csv(out, header, rows);
  } else {
    std::cout << join(header, ",") << "\n";
    for (const auto& row : rows) std::cout << join(row, ",") << "\n";
  }
  return kExitOk;
}

int cmd_report(const std::string& in_dir, const std::string& out, const RunConfig& resolved) {
  std::vector<std::string> inputs, outputs;
  const fs::path in(in_dir);

  if (fs::exists(in / "leaderboard.csv")) {
    inputs.push_back((in / "leaderboard.csv").string());
    const CsvTable lb = read_csv(in / "leaderboard.csv");
    const std::size_t kind_c = lb.col("kind"), case_c = lb.col("case"),
                      alg_c = lb.col("algorithm"), status_c = lb.col("status"),
                      acc_c = lb.col("global_accuracy"), loss_c = lb.col("historical_loss");
    if (kind_c == npos || acc_c == npos) fail(errc::io, "leaderboard.csv: unexpected schema");

    std::map<std::string, std::vector<std::pair<double, double>>> groups;
    for (const auto& row : lb.rows) {
      if (row[status_c] != "ok") continue;
      const std::string key = row[kind_c] + "," + row[case_c] + "," + row[alg_c];
      groups[key].emplace_back(*parse_double(row[acc_c]), *parse_double(row[loss_c]));
    }
    std::vector<std::vector<std::string>> rows;
    for (const auto& [key, vals] : groups) {
      double best_acc = 0.0, min_loss = 1.0, sum_acc = 0.0, sum_loss = 0.0;
      for (const auto& [acc, loss] : vals) {
        best_acc = std::max(best_acc, acc);
        min_loss = std::min(min_loss, loss);
        sum_acc += acc;
        sum_loss += loss;
      }
      const auto parts = split(key, ',');
      rows.push_back({parts[0], parts[1], parts[2], std::to_string(vals.size()),
                      format_double(best_acc), format_double(min_loss),
                      format_double(sum_acc / vals.size()),
                      format_double(sum_loss / vals.size())});
    }
    write_csv(fs::path(out) / "report_leaderboard.csv",
              {"kind", "case", "algorithm", "cells", "best_global_accuracy",
               "min_historical_loss", "mean_global_accuracy", "mean_historical_loss"},
              rows);
    outputs.push_back("report_leaderboard.csv");
  }

  if (fs::exists(in / "prune_report.csv")) {
    inputs.push_back((in / "prune_report.csv").string());
    const CsvTable pr = read_csv(in / "prune_report.csv");
    const std::size_t ratio_c = pr.col("ratio"), mode_c = pr.col("mode"),
                      status_c = pr.col("status"), acc_c = pr.col("accuracy");
    std::map<std::string, std::vector<std::pair<double, double>>> by_mode;
    for (const auto& row : pr.rows)
      if (row[status_c] == "ok")
        by_mode[row[mode_c]].emplace_back(*parse_double(row[ratio_c]),
                                          *parse_double(row[acc_c]));
    std::vector<std::vector<std::string>> rows;
    for (auto& [mode, points] : by_mode) {
      std::sort(points.begin(), points.end());
      double baseline = points.front().second;
      for (const auto& [ratio, acc] : points)
        if (ratio == 0.0) baseline = acc;
      double max_within = 0.0;
      for (const auto& [ratio, acc] : points)
        if (acc >= 0.95 * baseline) max_within = std::max(max_within, ratio);
      rows.push_back({mode, format_double(baseline), format_double(max_within)});
    }
    write_csv(fs::path(out) / "report_prune.csv",
              {"mode", "baseline_accuracy", "max_ratio_within_5pct"}, rows);
    outputs.push_back("report_prune.csv");
  }

  if (fs::exists(in / "subsets.csv")) {
    inputs.push_back((in / "subsets.csv").string());
    const CsvTable st = read_csv(in / "subsets.csv");
    const std::size_t ratio_c = st.col("ratio"), acc_c = st.col("accuracy"),
                      valid_c = st.col("valid");
    std::map<std::string, std::vector<std::pair<double, bool>>> by_ratio;
    for (const auto& row : st.rows)
      by_ratio[row[ratio_c]].emplace_back(*parse_double(row[acc_c]), row[valid_c] == "1");
    std::vector<std::vector<std::string>> rows;
    for (const auto& [ratio, entries] : by_ratio) {
      std::size_t valid = 0;
      double best = 0.0;
      for (const auto& [acc, ok] : entries) {
        if (ok) {
          ++valid;
          best = std::max(best, acc);
        }
      }
      rows.push_back({ratio, std::to_string(entries.size()), std::to_string(valid),
                      format_double(best)});
    }
    write_csv(fs::path(out) / "report_subsets.csv",
              {"ratio", "subsets", "valid_subsets", "best_valid_accuracy"}, rows);
    outputs.push_back("report_subsets.csv");
  }

  if (outputs.empty()) fail(errc::usage, "nothing to report: no stage outputs in " + in_dir);
  write_manifest(out, "report", resolved, inputs, outputs);
  std::cout << "report: wrote " << outputs.size() << " summaries\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adapt MLP traffic classifiers to constrained targets: feature "
               "selection, structured pruning, distillation fine-tuning, model catalog"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file ([subcommand] sections)");

  int jobs = 0;
  bool serial = false;
  app.add_option("--jobs", jobs, "worker threads for data-parallel stages (0 = all cores)");
  app.add_flag("--serial", serial, "run every kernel on one thread");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset bundle");
  std::string synth_preset_name = "two-cluster", synth_spec_path, synth_out = "out/synth";
  std::uint64_t synth_seed = 1;
  synth->add_option("--preset", synth_preset_name, "one of: " + join(synth_preset_names(), ", "))
      ->capture_default_str();
  synth->add_option("--spec", synth_spec_path, "synth spec JSON (overrides --preset)");
  auto* synth_seed_opt = synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--out", synth_out, "output bundle directory")->capture_default_str();

  // preprocess
  auto* prep = app.add_subcommand("preprocess", "ingest labeled CSVs into a dataset bundle");
  std::vector<std::string> prep_inputs;
  std::string prep_label = "Label", prep_category = "Label", prep_ratios = "0.65,0.15,0.20";
  std::string prep_id_patterns, prep_benign = "BENIGN", prep_out = "out/data";
  double prep_missing = 1.0;
  std::uint64_t prep_seed = 1;
  prep->add_option("--input", prep_inputs, "input CSV (repeatable)")->required();
  prep->add_option("--label-column", prep_label, "label column name")->capture_default_str();
  prep->add_option("--category-column", prep_category, "traffic category column name")
      ->capture_default_str();
  prep->add_option("--ratios", prep_ratios, "train,val,test ratios")->capture_default_str();
  prep->add_option("--seed", prep_seed, "balancing/splitting seed")->capture_default_str();
  prep->add_option("--id-patterns", prep_id_patterns,
                   "comma-separated identifier-column substrings to drop");
  prep->add_option("--missing-threshold", prep_missing,
                   "drop columns whose missing fraction exceeds this")
      ->capture_default_str();
  prep->add_option("--benign-label", prep_benign, "category treated as label 0")
      ->capture_default_str();
  prep->add_option("--out", prep_out, "output bundle directory")->capture_default_str();

  // train-base
  auto* tb = app.add_subcommand("train-base", "train the base reference model");
  std::string tb_data, tb_hidden = "64,64,64,64", tb_out = "out/base";
  std::uint64_t tb_seed = 1;
  std::size_t tb_reps = 3;
  TrainFlags tb_tf;
  tb->add_option("--data", tb_data, "dataset bundle directory")->required();
  tb->add_option("--hidden", tb_hidden, "hidden layer sizes")->capture_default_str();
  tb->add_option("--seed", tb_seed, "init/shuffle seed")->capture_default_str();
  tb->add_option("--reps", tb_reps, "latency measurement repetitions")->capture_default_str();
  tb_tf.attach(tb);
  tb->add_option("--out", tb_out, "output directory")->capture_default_str();

  // rank
  auto* rank = app.add_subcommand("rank", "zero-perturbation feature ranking");
  std::string rank_model, rank_data, rank_split = "val", rank_out = "out/rank";
  rank->add_option("--model", rank_model, "model JSON")->required();
  rank->add_option("--data", rank_data, "dataset bundle directory")->required();
  rank->add_option("--split", rank_split, "split to evaluate on")->capture_default_str();
  rank->add_option("--out", rank_out, "output directory")->capture_default_str();

  // rfe
  auto* rfe = app.add_subcommand("rfe", "recursive backward feature elimination");
  std::string rfe_model, rfe_data, rfe_split = "val", rfe_mode = "iterative",
              rfe_removal = "min-rank", rfe_out = "out/rfe";
  rfe->add_option("--model", rfe_model, "model JSON")->required();
  rfe->add_option("--data", rfe_data, "dataset bundle directory")->required();
  rfe->add_option("--split", rfe_split, "split to evaluate on")->capture_default_str();
  rfe->add_option("--mode", rfe_mode, "fixed | iterative")->capture_default_str();
  rfe->add_option("--removal", rfe_removal, "zero-first | min-rank")->capture_default_str();
  rfe->add_option("--out", rfe_out, "output directory")->capture_default_str();

  // subset-search
  auto* ss = app.add_subcommand("subset-search", "weighted stochastic feature-subset search");
  std::string ss_model, ss_data, ss_split = "val", ss_ranking, ss_ratios = "0.1:0.9:0.1",
              ss_out = "out/subsets";
  std::size_t ss_n = 1000;
  std::uint64_t ss_seed = 1;
  ss->add_option("--model", ss_model, "model JSON")->required();
  ss->add_option("--data", ss_data, "dataset bundle directory")->required();
  ss->add_option("--split", ss_split, "split to evaluate on")->capture_default_str();
  ss->add_option("--ranking", ss_ranking, "ranking.csv from the rank stage (else recomputed)");
  ss->add_option("--ratios", ss_ratios, "active-feature ratios")->capture_default_str();
  ss->add_option("--n", ss_n, "draws per ratio")->capture_default_str();
  ss->add_option("--seed", ss_seed, "sampling seed")->capture_default_str();
  ss->add_option("--out", ss_out, "output directory")->capture_default_str();

  // prune
  auto* prune = app.add_subcommand("prune", "L1-norm pruning sweep");
  std::string prune_model, prune_data, prune_split = "val", prune_mode = "neurons",
              prune_ratios = "0.05:0.95:0.05", prune_out = "out/prune";
  std::size_t prune_reps = 3;
  bool prune_save = false;
  prune->add_option("--model", prune_model, "model JSON")->required();
  prune->add_option("--data", prune_data, "dataset bundle directory")->required();
  prune->add_option("--split", prune_split, "split to evaluate on")->capture_default_str();
  prune->add_option("--mode", prune_mode, "neurons | connections")->capture_default_str();
  prune->add_option("--ratios", prune_ratios, "prune ratios (list or lo:hi:step)")
      ->capture_default_str();
  prune->add_option("--reps", prune_reps, "latency measurement repetitions")
      ->capture_default_str();
  prune->add_flag("--save-models", prune_save, "also write each pruned model");
  prune->add_option("--out", prune_out, "output directory")->capture_default_str();

  // finetune
  auto* ft = app.add_subcommand("finetune", "fine-tune a student model on local traffic");
  std::string ft_teacher, ft_student, ft_data, ft_algorithm = "KD", ft_mask_file,
              ft_mask_indices, ft_local = "BENIGN,DDoS", ft_out = "out/finetune";
  int ft_case = 2;
  double ft_alpha = 0.5;
  std::uint64_t ft_seed = 1;
  TrainFlags ft_tf;
  ft->add_option("--teacher", ft_teacher, "teacher model JSON")->required();
  ft->add_option("--student", ft_student, "student model JSON (defaults to a teacher copy)");
  ft->add_option("--data", ft_data, "dataset bundle directory")->required();
  ft->add_option("--algorithm", ft_algorithm, "HT | HD | HI | KD")->capture_default_str();
  ft->add_option("--case", ft_case, "edge scenario 1..4")->capture_default_str();
  ft->add_option("--alpha", ft_alpha, "teacher weight for HD")->capture_default_str();
  ft->add_option("--mask-file", ft_mask_file, "feature mask JSON");
  ft->add_option("--mask-indices", ft_mask_indices, "comma-separated active feature indices");
  ft->add_option("--local-categories", ft_local, "categories available locally")
      ->capture_default_str();
  auto* ft_seed_opt = ft->add_option("--seed", ft_seed, "student shuffle seed");
  ft_tf.attach(ft);
  ft->add_option("--out", ft_out, "output directory")->capture_default_str();

  // sweep
  auto* sweep = app.add_subcommand("sweep", "fine-tuning grid over kinds/cases/algorithms");
  std::string sw_teacher, sw_data, sw_kinds = "BRM,P-BRM,E-BRM,EP-BRM", sw_cases = "1,2,3,4",
              sw_algorithms = "HT,HD,HI,KD", sw_prune_ratios = "0.15", sw_feature_ratios,
              sw_subsets, sw_split = "val", sw_local = "BENIGN,DDoS", sw_out = "out/sweep";
  double sw_alpha = 0.5;
  std::uint64_t sw_seed = 1;
  TrainFlags sw_tf;
  sweep->add_option("--teacher", sw_teacher, "teacher model JSON")->required();
  sweep->add_option("--data", sw_data, "dataset bundle directory")->required();
  sweep->add_option("--kinds", sw_kinds, "model kinds")->capture_default_str();
  sweep->add_option("--cases", sw_cases, "edge scenarios")->capture_default_str();
  sweep->add_option("--algorithms", sw_algorithms, "learning algorithms")->capture_default_str();
  sweep->add_option("--prune-ratios", sw_prune_ratios, "ratios for P-/EP-BRM")
      ->capture_default_str();
  sweep->add_option("--feature-ratios", sw_feature_ratios, "active-feature ratios for E-/EP-BRM");
  sweep->add_option("--subsets", sw_subsets, "subsets.csv to pick masks from (best valid)");
  sweep->add_option("--split", sw_split, "split used when ranking fallback masks")
      ->capture_default_str();
  sweep->add_option("--local-categories", sw_local, "categories available locally")
      ->capture_default_str();
  sweep->add_option("--alpha", sw_alpha, "teacher weight for HD")->capture_default_str();
  sweep->add_option("--seed", sw_seed, "per-cell seed base")->capture_default_str();
  sw_tf.attach(sweep);
  sweep->add_option("--out", sw_out, "output directory")->capture_default_str();

  // catalog
  auto* cat = app.add_subcommand("catalog", "model catalog operations");
  cat->require_subcommand(1);
  std::string cat_root;
  cat->add_option("--root", cat_root, "catalog directory (or env ADAPTIDS_CATALOG)");

  auto* cat_put = cat->add_subcommand("put", "store a model with metadata");
  std::string cp_model, cp_metrics, cp_parent, cp_subset, cp_features;
  std::vector<std::string> cp_tags;
  bool cp_fail_fast = false;
  cat_put->add_option("--model", cp_model, "model JSON")->required();
  cat_put->add_option("--metrics", cp_metrics, "metrics/eval-report JSON");
  cat_put->add_option("--parent", cp_parent, "parent model id");
  cat_put->add_option("--tag", cp_tags, "lineage tag key=value (repeatable)");
  cat_put->add_option("--subset-id", cp_subset, "feature subset id");
  cat_put->add_option("--features", cp_features, "comma-separated active feature names");
  cat_put->add_flag("--fail-fast", cp_fail_fast, "fail instead of waiting for the writer lock");

  auto* cat_get = cat->add_subcommand("get", "fetch a model by id");
  std::string cg_id, cg_out;
  cat_get->add_option("--id", cg_id, "model id")->required();
  cat_get->add_option("--out", cg_out, "write the model here (default: stdout)");

  auto* cat_query = cat->add_subcommand("query", "rank catalog entries under constraints");
  double cq_max_memory = -1, cq_max_latency = -1, cq_min_acc = -1, cq_max_loss = -1;
  std::string cq_features, cq_out;
  cat_query->add_option("--max-memory-bytes", cq_max_memory, "upper memory bound");
  cat_query->add_option("--max-latency-ns", cq_max_latency, "upper latency bound");
  cat_query->add_option("--min-accuracy", cq_min_acc, "lower global-accuracy bound");
  cat_query->add_option("--max-historical-loss", cq_max_loss, "upper historical-loss bound");
  cat_query->add_option("--features", cq_features, "features available on the device");
  cat_query->add_option("--out", cq_out, "write CSV here (default: stdout)");

  // report
  auto* report = app.add_subcommand("report", "aggregate stage outputs without recomputation");
  std::string rp_in, rp_out = "out/report";
  report->add_option("--in", rp_in, "directory holding stage CSVs")->required();
  report->add_option("--out", rp_out, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);  // prints the message / help text
    return rc == 0 ? kExitOk : kExitUsage;
  }

  set_worker_threads(jobs);
  if (serial) set_default_exec(ExecMode::serial);

  try {
    if (*synth)
      return cmd_synth(synth_preset_name, synth_spec_path, synth_seed, synth_seed_opt->count() > 0,
                       synth_out, collect_config(*synth));
    if (*prep)
      return cmd_preprocess(prep_inputs, prep_label, prep_category, prep_ratios, prep_seed,
                            prep_id_patterns, prep_missing, prep_benign, prep_out,
                            collect_config(*prep));
    if (*tb)
      return cmd_train_base(tb_data, tb_hidden, tb_seed, tb_tf, tb_reps, tb_out,
                            collect_config(*tb));
    if (*rank) return cmd_rank(rank_model, rank_data, rank_split, rank_out, collect_config(*rank));
    if (*rfe)
      return cmd_rfe(rfe_model, rfe_data, rfe_split, rfe_mode, rfe_removal, rfe_out,
                     collect_config(*rfe));
    if (*ss)
      return cmd_subset_search(ss_model, ss_data, ss_split, ss_ranking, ss_ratios, ss_n, ss_seed,
                               ss_out, collect_config(*ss));
    if (*prune)
      return cmd_prune(prune_model, prune_data, prune_split, prune_mode, prune_ratios, prune_reps,
                       prune_save, prune_out, collect_config(*prune));
    if (*ft)
      return cmd_finetune(ft_teacher, ft_student, ft_data, ft_algorithm, ft_case, ft_alpha,
                          ft_mask_file, ft_mask_indices, ft_local, ft_seed,
                          ft_seed_opt->count() > 0, ft_tf, ft_out, collect_config(*ft));
    if (*sweep)
      return cmd_sweep(sw_teacher, sw_data, sw_kinds, sw_cases, sw_algorithms, sw_prune_ratios,
                       sw_feature_ratios, sw_subsets, sw_split, sw_local, sw_alpha, sw_seed, sw_tf,
                       sw_out, collect_config(*sweep));
    if (*cat) {
      if (*cat_put)
        return cmd_catalog_put(cat_root, cp_model, cp_metrics, cp_parent, cp_tags, cp_subset,
                               cp_features, cp_fail_fast);
      if (*cat_get) return cmd_catalog_get(cat_root, cg_id, cg_out);
      if (*cat_query)
        return cmd_catalog_query(cat_root, cq_max_memory, cq_max_latency, cq_min_acc, cq_max_loss,
                                 cq_features, cq_out);
    }
    if (*report) return cmd_report(rp_in, rp_out, collect_config(*report));
    std::cerr << "no subcommand selected\n";
    return kExitUsage;
  } catch (const error& e) {
    std::cerr << "adaptids: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "adaptids: unexpected failure: " << e.what() << "\n";
    return kExitRuntime;
  }
}
