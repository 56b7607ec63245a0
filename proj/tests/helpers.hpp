#pragma once

#include <unistd.h>

#include <filesystem>
#include <string>

#include "adaptids/dataset.hpp"
#include "adaptids/matrix.hpp"
#include "adaptids/mlp.hpp"
#include "adaptids/rng.hpp"

namespace testutil {

// unique directory under the system temp root, removed on destruction
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("adaptids_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline adaptids::Matrix random_matrix(std::size_t rows, std::size_t cols, adaptids::Rng& rng,
                                      double lo = -1.0, double hi = 1.0) {
  adaptids::Matrix m(rows, cols);
  for (double& v : m.data) v = rng.uniform(lo, hi);
  return m;
}

// two Gaussian blobs, labels 0/1, all values clipped into [0,1]
inline adaptids::Dataset two_blob_dataset(std::size_t per_class, std::uint64_t seed,
                                          double sep = 0.5) {
  adaptids::SynthSpec spec;
  spec.features = 4;
  spec.seed = seed;
  adaptids::SynthCategory benign, attack;
  benign.name = "BENIGN";
  benign.label = 0;
  benign.count = per_class;
  benign.mean.assign(4, 0.5 - sep / 2);
  benign.stddev.assign(4, 0.08);
  attack.name = "DDoS";
  attack.label = 1;
  attack.count = per_class;
  attack.mean.assign(4, 0.5 + sep / 2);
  attack.stddev.assign(4, 0.08);
  spec.categories = {benign, attack};
  return synth_generate(spec);
}

}  // namespace testutil
