#include "adaptids/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "adaptids/csv.hpp"
#include "adaptids/error.hpp"
#include "adaptids/util.hpp"

namespace adaptids {

const char* prune_mode_name(PruneMode mode) {
  return mode == PruneMode::neurons ? "neurons" : "connections";
}

std::vector<NeuronNorm> neuron_l1_norms(const Mlp& m, bool include_bias) {
  if (m.hidden_layer_count() == 0) fail(errc::prune, "model has no hidden layer");
  std::vector<NeuronNorm> norms;
  for (std::size_t layer = 1; layer + 1 < m.layer_sizes.size(); ++layer) {
    const Matrix& incoming = m.weights[layer - 1];
    const auto& bias = m.biases[layer - 1];
    for (std::size_t j = 0; j < m.layer_sizes[layer]; ++j) {
      double norm = 0.0;
      for (std::size_t i = 0; i < incoming.rows; ++i) norm += std::abs(incoming(i, j));
      if (include_bias) norm += std::abs(bias[j]);
      norms.push_back({layer, j, norm});
    }
  }
  std::sort(norms.begin(), norms.end(), [](const NeuronNorm& a, const NeuronNorm& b) {
    return std::tie(a.norm, a.layer, a.neuron) < std::tie(b.norm, b.layer, b.neuron);
  });
  return norms;
}

Mlp prune_neurons(const Mlp& m, double ratio, PruneReport* report, bool include_bias) {
  if (!(ratio > 0.0 && ratio < 1.0)) fail(errc::ratio, "prune ratio must lie in (0,1)");
  m.validate();

  const auto norms = neuron_l1_norms(m, include_bias);
  const std::size_t d = static_cast<std::size_t>(std::floor(norms.size() * ratio));

  // per-layer removal sets
  std::map<std::size_t, std::set<std::size_t>> removed;
  for (std::size_t i = 0; i < d; ++i) removed[norms[i].layer].insert(norms[i].neuron);

  for (const auto& [layer, neurons] : removed) {
    if (neurons.size() >= m.layer_sizes[layer])
      fail(errc::prune,
           "pruning would empty hidden layer " + std::to_string(layer) + " (" +
               std::to_string(neurons.size()) + " of " + std::to_string(m.layer_sizes[layer]) + ")");
  }

  Mlp out;
  out.rng_seed = m.rng_seed;
  out.metadata = m.metadata;
  out.layer_sizes = m.layer_sizes;
  for (const auto& [layer, neurons] : removed) out.layer_sizes[layer] -= neurons.size();

  const auto keep_of = [&](std::size_t layer) {
    std::vector<std::size_t> keep;
    const auto it = removed.find(layer);
    for (std::size_t j = 0; j < m.layer_sizes[layer]; ++j)
      if (it == removed.end() || !it->second.count(j)) keep.push_back(j);
    return keep;
  };

  for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
    const auto rows = keep_of(l);
    const auto cols = keep_of(l + 1);
    Matrix w(rows.size(), cols.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t c = 0; c < cols.size(); ++c) w(r, c) = m.weights[l](rows[r], cols[c]);
    std::vector<double> b(cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) b[c] = m.biases[l][cols[c]];
    out.weights.push_back(std::move(w));
    out.biases.push_back(std::move(b));
  }
  out.validate();

  if (report) {
    report->ratio = ratio;
    report->mode = PruneMode::neurons;
    report->removed_neurons.clear();
    for (std::size_t i = 0; i < d; ++i)
      report->removed_neurons.emplace_back(norms[i].layer, norms[i].neuron);
    report->parent_params = m.param_count();
    report->pruned_params = out.param_count();
  }
  return out;
}

Mlp prune_connections(const Mlp& m, double ratio, PruneReport* report) {
  if (!(ratio > 0.0 && ratio < 1.0)) fail(errc::ratio, "prune ratio must lie in (0,1)");
  m.validate();

  // prunable = weights joining two hidden layers; edges touching the input or
  // output layer stay
  struct Entry {
    double mag;
    std::size_t layer, row, col;
  };
  std::vector<Entry> entries;
  for (std::size_t l = 1; l + 2 < m.layer_sizes.size(); ++l) {
    for (std::size_t r = 0; r < m.weights[l].rows; ++r)
      for (std::size_t c = 0; c < m.weights[l].cols; ++c)
        entries.push_back({std::abs(m.weights[l](r, c)), l, r, c});
  }
  const std::size_t d = static_cast<std::size_t>(std::floor(entries.size() * ratio));
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.mag, a.layer, a.row, a.col) < std::tie(b.mag, b.layer, b.row, b.col);
  });

  Mlp out = m;
  for (std::size_t i = 0; i < d; ++i) out.weights[entries[i].layer](entries[i].row, entries[i].col) = 0.0;

  if (report) {
    report->ratio = ratio;
    report->mode = PruneMode::connections;
    report->removed_connections = d;
    report->parent_params = m.param_count();
    report->pruned_params = out.param_count();
  }
  return out;
}

std::vector<PruneReport> prune_sweep(const Mlp& m, std::span<const double> ratios, PruneMode mode,
                                     const Matrix& X_val, std::span<const std::uint8_t> y_val,
                                     std::size_t latency_repetitions) {
  if (ratios.empty()) fail(errc::ratio, "prune sweep needs at least one ratio");
  std::vector<double> sorted(ratios.begin(), ratios.end());
  std::sort(sorted.begin(), sorted.end());

  std::vector<PruneReport> reports;
  for (double r : sorted) {
    PruneReport report;
    report.ratio = r;
    report.mode = mode;
    try {
      if (!(r >= 0.0 && r < 1.0)) fail(errc::ratio, "ratio outside [0,1)");
      Mlp pruned;
      if (r == 0.0) {
        pruned = m;  // unpruned sentinel
        report.parent_params = report.pruned_params = m.param_count();
      } else {
        pruned = mode == PruneMode::neurons ? prune_neurons(m, r, &report)
                                            : prune_connections(m, r, &report);
      }
      report.accuracy = accuracy(pruned, X_val, y_val);
      const auto [b, mal] = accuracy_by_class(pruned, X_val, y_val);
      report.acc_benign = b;
      report.acc_malicious = mal;
      report.stats = measure_inference(pruned, X_val, latency_repetitions);
    } catch (const error& e) {
      report.ok = false;
      report.note = e.what();
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

void write_prune_csv(const std::filesystem::path& path, std::span<const PruneReport> reports) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : reports) {
    const std::size_t removed =
        r.mode == PruneMode::neurons ? r.removed_neurons.size() : r.removed_connections;
    rows.push_back({format_double(r.ratio), prune_mode_name(r.mode), r.ok ? "ok" : "error",
                    std::to_string(removed), std::to_string(r.parent_params),
                    std::to_string(r.pruned_params), format_double(r.accuracy),
                    format_double(r.acc_benign), format_double(r.acc_malicious),
                    format_double(r.stats.mean_ns_per_sample),
                    std::to_string(r.stats.memory_bytes), r.note});
  }
  write_csv(path,
            {"ratio", "mode", "status", "removed", "parent_params", "pruned_params", "accuracy",
             "acc_benign", "acc_malicious", "mean_ns_per_sample", "memory_bytes", "note"},
            rows);
}

}  // namespace adaptids
