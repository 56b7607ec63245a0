#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "adaptids/kernels.hpp"
#include "adaptids/matrix.hpp"

namespace adaptids {

// serialized-state overhead charged per weight matrix by the memory estimate
// (shape fields plus two array headers)
inline constexpr std::uint64_t kLayerOverheadBytes = 32;

// dense feed-forward net: tanh hidden layers, identity output, output dim 1.
// Scores are raw; classification happens by thresholding in predict().
struct Mlp {
  std::vector<std::size_t> layer_sizes;     // input, hidden..., 1
  std::vector<Matrix> weights;              // weights[l]: layer_sizes[l] x layer_sizes[l+1]
  std::vector<std::vector<double>> biases;  // biases[l]: layer_sizes[l+1]
  std::uint64_t rng_seed = 0;
  std::map<std::string, std::string> metadata;

  std::size_t input_dim() const { return layer_sizes.front(); }
  std::size_t weight_layer_count() const { return weights.size(); }
  std::size_t hidden_layer_count() const { return layer_sizes.size() - 2; }
  std::size_t param_count() const;
  std::uint64_t memory_bytes() const;  // param_count * 8 + kLayerOverheadBytes per matrix
  void validate() const;               // shape and finiteness invariants
  bool same_parameters(const Mlp& other) const;
};

struct TrainConfig {
  double learning_rate = 0.001;
  std::size_t batch_size = 512;
  std::size_t max_epochs = 100;
  std::size_t patience = 25;
  double tolerance = 1e-4;  // minimum val-loss decrease counted as progress
  void validate() const;
};

struct TrainReport {
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;  // 0 = initial parameters
  double best_val_loss = 0.0;
};

struct InferenceStats {
  double mean_ns_per_sample = 0.0;
  std::size_t repetitions = 0;
  std::size_t samples = 0;
  std::uint64_t memory_bytes = 0;
};

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
  double loss = 0.0;
};

// symmetric scaled-uniform init, bound sqrt(6/(fan_in+fan_out)); biases zero.
// layer_sizes needs >= 3 entries, all >= 1, last exactly 1.
Mlp init_mlp(const std::vector<std::size_t>& layer_sizes, std::uint64_t rng_seed);

std::vector<double> forward(const Mlp& m, const Matrix& inputs, ExecMode mode = default_exec());
std::vector<std::uint8_t> predict(const Mlp& m, const Matrix& inputs, double threshold = 0.5,
                                  ExecMode mode = default_exec());
double accuracy(const Mlp& m, const Matrix& X, std::span<const std::uint8_t> y,
                ExecMode mode = default_exec());
// {label-0 accuracy, label-1 accuracy}; -1 marks a class absent from y
std::pair<double, double> accuracy_by_class(const Mlp& m, const Matrix& X,
                                            std::span<const std::uint8_t> y,
                                            ExecMode mode = default_exec());

// analytic MSE gradients over a batch (loss = mean (score - target)^2)
Gradients mse_gradients(const Mlp& m, const Matrix& X, std::span<const double> targets,
                        ExecMode mode = default_exec());

double validation_mse(const Mlp& m, const Matrix& X, std::span<const double> targets,
                      ExecMode mode = default_exec());

// mini-batch gradient descent on MSE, soft targets in [0,1]; early stopping on
// validation loss with best-epoch parameters restored; shuffling is seeded by
// m.rng_seed. Updates m in place.
TrainReport train(Mlp& m, const Matrix& X_train, std::span<const double> targets,
                  const Matrix& X_val, std::span<const double> val_targets,
                  const TrainConfig& config);

// mean wall clock for a single-sample forward pass; one measurement at a time
InferenceStats measure_inference(const Mlp& m, const Matrix& X, std::size_t repetitions);

// versioned JSON document, lossless at 64-bit precision
std::string serialize_model(const Mlp& m);
Mlp deserialize_model(const std::string& text);
void save_model(const std::filesystem::path& path, const Mlp& m);
Mlp load_model(const std::filesystem::path& path);
// sha256 of the canonical serialization
std::string model_content_id(const Mlp& m);

}  // namespace adaptids
