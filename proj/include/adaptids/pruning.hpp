#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "adaptids/mlp.hpp"

namespace adaptids {

enum class PruneMode { neurons, connections };
const char* prune_mode_name(PruneMode mode);

struct NeuronNorm {
  std::size_t layer = 0;   // index into layer_sizes; hidden layers only
  std::size_t neuron = 0;  // index within the layer
  double norm = 0.0;       // sum of |incoming weights| (+ |bias| when enabled)
};

// ascending by (norm, layer, neuron); input and output layers are never listed
std::vector<NeuronNorm> neuron_l1_norms(const Mlp& m, bool include_bias = true);

struct PruneReport {
  double ratio = 0.0;
  PruneMode mode = PruneMode::neurons;
  std::vector<std::pair<std::size_t, std::size_t>> removed_neurons;  // (layer, neuron)
  std::size_t removed_connections = 0;
  std::size_t parent_params = 0;
  std::size_t pruned_params = 0;
  double accuracy = 0.0;
  double acc_benign = -1.0;
  double acc_malicious = -1.0;
  InferenceStats stats;
  bool ok = true;
  std::string note;
};

// remove the floor(prunable * ratio) globally lowest-norm hidden neurons and
// physically shrink the surrounding matrices; the parent is untouched. Fails
// rather than emptying a hidden layer.
Mlp prune_neurons(const Mlp& m, double ratio, PruneReport* report = nullptr,
                  bool include_bias = true);

// zero the floor(total * ratio) smallest-|w| weights among matrices that join
// two hidden layers; shapes unchanged
Mlp prune_connections(const Mlp& m, double ratio, PruneReport* report = nullptr);

// ratio 0 is accepted as the unpruned sentinel; per-ratio failures are
// recorded and the sweep continues. Reports sorted by ratio.
std::vector<PruneReport> prune_sweep(const Mlp& m, std::span<const double> ratios, PruneMode mode,
                                     const Matrix& X_val, std::span<const std::uint8_t> y_val,
                                     std::size_t latency_repetitions = 1);

void write_prune_csv(const std::filesystem::path& path, std::span<const PruneReport> reports);

}  // namespace adaptids
