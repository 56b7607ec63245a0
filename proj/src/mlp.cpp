#include "adaptids/mlp.hpp"

#include <chrono>
#include <cmath>
#include <mutex>
#include <numeric>

#include <nlohmann/json.hpp>

#include "adaptids/error.hpp"
#include "adaptids/rng.hpp"
#include "adaptids/sha256.hpp"
#include "adaptids/util.hpp"

namespace adaptids {

using json = nlohmann::json;

std::size_t Mlp::param_count() const {
  std::size_t n = 0;
  for (const auto& w : weights) n += w.data.size();
  for (const auto& b : biases) n += b.size();
  return n;
}

std::uint64_t Mlp::memory_bytes() const {
  return std::uint64_t(param_count()) * sizeof(double) +
         std::uint64_t(weight_layer_count()) * kLayerOverheadBytes;
}

void Mlp::validate() const {
  if (layer_sizes.size() < 2) fail(errc::shape, "mlp: needs at least input and output layer");
  if (layer_sizes.back() != 1) fail(errc::shape, "mlp: output dimension must be 1");
  for (std::size_t s : layer_sizes)
    if (s == 0) fail(errc::shape, "mlp: zero-sized layer");
  if (weights.size() != layer_sizes.size() - 1 || biases.size() != weights.size())
    fail(errc::shape, "mlp: layer count mismatch");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows != layer_sizes[l] || weights[l].cols != layer_sizes[l + 1])
      fail(errc::shape, "mlp: weight matrix " + std::to_string(l) + " has wrong shape");
    if (biases[l].size() != layer_sizes[l + 1])
      fail(errc::shape, "mlp: bias vector " + std::to_string(l) + " has wrong length");
    for (double v : weights[l].data)
      if (!std::isfinite(v)) fail(errc::shape, "mlp: non-finite weight in layer " + std::to_string(l));
    for (double v : biases[l])
      if (!std::isfinite(v)) fail(errc::shape, "mlp: non-finite bias in layer " + std::to_string(l));
  }
}

bool Mlp::same_parameters(const Mlp& other) const {
  return layer_sizes == other.layer_sizes && weights == other.weights && biases == other.biases;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) fail(errc::config, "learning_rate must be positive");
  if (batch_size == 0) fail(errc::config, "batch_size must be positive");
  if (patience == 0) fail(errc::config, "patience must be positive");
  if (tolerance < 0.0) fail(errc::config, "tolerance must be non-negative");
  if (max_epochs > 0 && patience > max_epochs) fail(errc::config, "patience must be <= max_epochs");
}

Mlp init_mlp(const std::vector<std::size_t>& layer_sizes, std::uint64_t rng_seed) {
  if (layer_sizes.size() < 3)
    fail(errc::config, "layer_sizes needs input, at least one hidden layer, and output");
  for (std::size_t s : layer_sizes)
    if (s == 0) fail(errc::config, "layer_sizes entries must be >= 1");
  if (layer_sizes.back() != 1) fail(errc::config, "output dimension must be 1");

  Mlp m;
  m.layer_sizes = layer_sizes;
  m.rng_seed = rng_seed;
  Rng rng(rng_seed);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const std::size_t fan_in = layer_sizes[l];
    const std::size_t fan_out = layer_sizes[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix w(fan_in, fan_out);
    for (double& v : w.data) v = rng.uniform(-bound, bound);
    m.weights.push_back(std::move(w));
    m.biases.emplace_back(fan_out, 0.0);
  }
  return m;
}

namespace {

struct ForwardTrace {
  // activations[0] is the input; activations.back() is the raw score column
  std::vector<Matrix> activations;
};

void forward_trace(const Mlp& m, const Matrix& X, ForwardTrace& t, ExecMode mode) {
  if (X.cols != m.input_dim())
    fail(errc::shape, "forward: input has " + std::to_string(X.cols) + " columns, model expects " +
                          std::to_string(m.input_dim()));
  t.activations.resize(m.weight_layer_count() + 1);
  t.activations[0] = X;
  for (std::size_t l = 0; l < m.weight_layer_count(); ++l) {
    affine(t.activations[l], m.weights[l], m.biases[l], t.activations[l + 1], mode);
    if (l + 1 < m.weight_layer_count()) tanh_activate(t.activations[l + 1], mode);
  }
}

std::vector<double> scores_from(const Matrix& out_col) {
  std::vector<double> s(out_col.rows);
  for (std::size_t r = 0; r < out_col.rows; ++r) s[r] = out_col(r, 0);
  return s;
}

}  // namespace

std::vector<double> forward(const Mlp& m, const Matrix& inputs, ExecMode mode) {
  ForwardTrace t;
  forward_trace(m, inputs, t, mode);
  return scores_from(t.activations.back());
}

std::vector<std::uint8_t> predict(const Mlp& m, const Matrix& inputs, double threshold,
                                  ExecMode mode) {
  const auto scores = forward(m, inputs, mode);
  std::vector<std::uint8_t> labels(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) labels[i] = scores[i] >= threshold ? 1 : 0;
  return labels;
}

double accuracy(const Mlp& m, const Matrix& X, std::span<const std::uint8_t> y, ExecMode mode) {
  if (X.rows == 0 || y.empty()) fail(errc::evaluation, "accuracy: empty input");
  if (X.rows != y.size()) fail(errc::shape, "accuracy: rows vs labels mismatch");
  const auto scores = forward(m, X, mode);
  const std::size_t correct = count_correct(scores, y, 0.5, mode);
  return static_cast<double>(correct) / static_cast<double>(y.size());
}

std::pair<double, double> accuracy_by_class(const Mlp& m, const Matrix& X,
                                            std::span<const std::uint8_t> y, ExecMode mode) {
  if (X.rows == 0 || y.empty()) fail(errc::evaluation, "accuracy_by_class: empty input");
  if (X.rows != y.size()) fail(errc::shape, "accuracy_by_class: rows vs labels mismatch");
  const auto scores = forward(m, X, mode);
  std::size_t n0 = 0, n1 = 0, c0 = 0, c1 = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const std::uint8_t pred = scores[i] >= 0.5 ? 1 : 0;
    if (y[i] == 0) {
      ++n0;
      c0 += pred == 0;
    } else {
      ++n1;
      c1 += pred == 1;
    }
  }
  return {n0 ? double(c0) / double(n0) : -1.0, n1 ? double(c1) / double(n1) : -1.0};
}

Gradients mse_gradients(const Mlp& m, const Matrix& X, std::span<const double> targets,
                        ExecMode mode) {
  if (targets.size() != X.rows) fail(errc::shape, "mse_gradients: targets vs rows mismatch");
  if (X.rows == 0) fail(errc::evaluation, "mse_gradients: empty batch");

  ForwardTrace t;
  forward_trace(m, X, t, mode);
  const std::size_t L = m.weight_layer_count();
  const std::size_t n = X.rows;

  Gradients g;
  g.weights.resize(L);
  g.biases.resize(L);

  // dL/dscore, and the batch loss on the way
  Matrix delta(n, 1);
  double loss = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const double d = t.activations[L](r, 0) - targets[r];
    loss += d * d;
    delta(r, 0) = 2.0 * d / static_cast<double>(n);
  }
  g.loss = loss / static_cast<double>(n);

  Matrix dprev;
  for (std::size_t l = L; l-- > 0;) {
    grad_weights(t.activations[l], delta, g.weights[l], mode);
    g.biases[l].assign(m.layer_sizes[l + 1], 0.0);
    grad_bias(delta, g.biases[l], mode);
    if (l > 0) {
      backprop_delta(delta, m.weights[l], t.activations[l], dprev, mode);
      std::swap(delta, dprev);
    }
  }
  return g;
}

double validation_mse(const Mlp& m, const Matrix& X, std::span<const double> targets,
                      ExecMode mode) {
  const auto scores = forward(m, X, mode);
  return mean_squared_error(scores, targets);
}

TrainReport train(Mlp& m, const Matrix& X_train, std::span<const double> targets,
                  const Matrix& X_val, std::span<const double> val_targets,
                  const TrainConfig& config) {
  config.validate();
  if (targets.size() != X_train.rows) fail(errc::shape, "train: targets vs training rows mismatch");
  if (val_targets.size() != X_val.rows) fail(errc::shape, "train: val targets vs rows mismatch");
  if (X_val.rows == 0) fail(errc::evaluation, "train: empty validation set");
  for (double v : targets)
    if (!(v >= 0.0 && v <= 1.0)) fail(errc::config, "train: target outside [0,1]");

  TrainReport report;
  if (config.max_epochs == 0) {
    report.best_val_loss = validation_mse(m, X_val, val_targets);
    return report;
  }

  const ExecMode mode = default_exec();
  Rng rng(m.rng_seed);

  auto best_weights = m.weights;
  auto best_biases = m.biases;
  double best_val = validation_mse(m, X_val, val_targets);
  std::size_t best_epoch = 0;
  std::size_t since_improvement = 0;

  std::vector<std::size_t> order(X_train.rows);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::size_t> batch_idx;
  std::vector<double> batch_targets;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(start + config.batch_size, order.size());
      batch_idx.assign(order.begin() + start, order.begin() + end);
      batch_targets.resize(batch_idx.size());
      for (std::size_t i = 0; i < batch_idx.size(); ++i) batch_targets[i] = targets[batch_idx[i]];
      const Matrix batch = gather_rows(X_train, batch_idx);

      const Gradients g = mse_gradients(m, batch, batch_targets, mode);
      if (!std::isfinite(g.loss))
        fail(errc::divergence, "non-finite training loss at epoch " + std::to_string(epoch));
      for (std::size_t l = 0; l < m.weights.size(); ++l) {
        double* w = m.weights[l].data.data();
        const double* gw = g.weights[l].data.data();
        for (std::size_t i = 0; i < m.weights[l].data.size(); ++i)
          w[i] -= config.learning_rate * gw[i];
        double* b = m.biases[l].data();
        const double* gb = g.biases[l].data();
        for (std::size_t i = 0; i < m.biases[l].size(); ++i) b[i] -= config.learning_rate * gb[i];
      }
    }

    const double val_loss = validation_mse(m, X_val, val_targets);
    if (!std::isfinite(val_loss))
      fail(errc::divergence, "non-finite validation loss at epoch " + std::to_string(epoch));
    report.epochs_run = epoch;

    if (best_val - val_loss > config.tolerance) {
      best_val = val_loss;
      best_weights = m.weights;
      best_biases = m.biases;
      best_epoch = epoch;
      since_improvement = 0;
    } else {
      ++since_improvement;
      if (since_improvement >= config.patience) break;
    }
  }

  m.weights = std::move(best_weights);
  m.biases = std::move(best_biases);
  report.best_epoch = best_epoch;
  report.best_val_loss = best_val;
  return report;
}

InferenceStats measure_inference(const Mlp& m, const Matrix& X, std::size_t repetitions) {
  if (repetitions == 0) repetitions = 1;
  if (X.rows == 0) fail(errc::evaluation, "measure_inference: empty input");

  // one measurement at a time so concurrent callers cannot skew each other
  static std::mutex gate;
  std::lock_guard<std::mutex> lock(gate);

  Matrix sample(1, X.cols);
  volatile double sink = 0.0;  // keeps the measured work live
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    for (std::size_t r = 0; r < X.rows; ++r) {
      std::copy_n(X.data.data() + r * X.cols, X.cols, sample.data.data());
      sink = sink + forward(m, sample, ExecMode::serial)[0];
    }
  }
  const auto elapsed = std::chrono::steady_clock::now() - start;
  const double total_ns =
      static_cast<double>(std::chrono::duration_cast<std::chrono::nanoseconds>(elapsed).count());

  InferenceStats stats;
  stats.repetitions = repetitions;
  stats.samples = X.rows;
  stats.mean_ns_per_sample = total_ns / (static_cast<double>(repetitions * X.rows));
  stats.memory_bytes = m.memory_bytes();
  return stats;
}

std::string serialize_model(const Mlp& m) {
  m.validate();
  json doc;
  doc["format_version"] = 1;
  doc["layer_sizes"] = m.layer_sizes;
  json weights = json::array();
  for (const auto& w : m.weights) {
    json rows = json::array();
    for (std::size_t r = 0; r < w.rows; ++r) {
      json row = json::array();
      for (std::size_t c = 0; c < w.cols; ++c) row.push_back(w(r, c));
      rows.push_back(std::move(row));
    }
    weights.push_back(std::move(rows));
  }
  doc["weights"] = std::move(weights);
  doc["biases"] = m.biases;
  doc["rng_seed"] = m.rng_seed;
  doc["metadata"] = m.metadata;
  return doc.dump();
}

Mlp deserialize_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(errc::io, std::string("model parse failed: ") + e.what());
  }
  try {
    if (doc.at("format_version").get<int>() != 1)
      fail(errc::io, "unsupported model format_version");
    Mlp m;
    m.layer_sizes = doc.at("layer_sizes").get<std::vector<std::size_t>>();
    m.rng_seed = doc.at("rng_seed").get<std::uint64_t>();
    if (doc.contains("metadata"))
      m.metadata = doc.at("metadata").get<std::map<std::string, std::string>>();
    for (const auto& layer : doc.at("weights")) {
      const std::size_t rows = layer.size();
      const std::size_t cols = rows ? layer.at(0).size() : 0;
      Matrix w(rows, cols);
      for (std::size_t r = 0; r < rows; ++r) {
        const auto& row = layer.at(r);
        if (row.size() != cols) fail(errc::io, "ragged weight matrix in model document");
        for (std::size_t c = 0; c < cols; ++c) w(r, c) = row.at(c).get<double>();
      }
      m.weights.push_back(std::move(w));
    }
    m.biases = doc.at("biases").get<std::vector<std::vector<double>>>();
    m.validate();
    return m;
  } catch (const json::exception& e) {
    fail(errc::io, std::string("malformed model document: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const Mlp& m) {
  write_file_atomic(path, serialize_model(m));
}

Mlp load_model(const std::filesystem::path& path) { return deserialize_model(read_file(path)); }

std::string model_content_id(const Mlp& m) { return sha256_hex(serialize_model(m)); }

}  // namespace adaptids
