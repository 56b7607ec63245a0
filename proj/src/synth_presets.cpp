#include "adaptids/synth_presets.hpp"

#include "adaptids/error.hpp"

namespace adaptids {

namespace {

constexpr std::size_t kF = 10;

SynthCategory make_cat(std::string name, std::uint8_t label, std::size_t count,
                       std::vector<double> mean, double stddev) {
  SynthCategory c;
  c.name = std::move(name);
  c.label = label;
  c.count = count;
  c.mean = std::move(mean);
  c.stddev.assign(c.mean.size(), stddev);
  return c;
}

std::vector<double> flat(double v) { return std::vector<double>(kF, v); }

std::vector<double> bump(double base, std::size_t from, std::size_t to, double v) {
  auto m = flat(base);
  for (std::size_t j = from; j < to; ++j) m[j] = v;
  return m;
}

}  // namespace

std::vector<std::string> synth_preset_names() {
  return {"two-cluster", "overlap", "single-informative", "three-informative", "four-category"};
}

SynthSpec synth_preset(const std::string& name, std::uint64_t seed) {
  SynthSpec spec;
  spec.features = kF;
  spec.seed = seed;

  if (name == "two-cluster") {
    spec.categories.push_back(make_cat("BENIGN", 0, 2000, flat(0.25), 0.08));
    spec.categories.push_back(make_cat("DDoS", 1, 2000, flat(0.75), 0.08));
  } else if (name == "overlap") {
    spec.categories.push_back(make_cat("BENIGN", 0, 1500, flat(0.5), 0.1));
    spec.categories.push_back(make_cat("DDoS", 1, 1500, flat(0.5), 0.1));
  } else if (name == "single-informative") {
    auto benign = flat(0.5);
    auto attack = flat(0.5);
    benign[0] = 0.2;
    attack[0] = 0.8;
    spec.categories.push_back(make_cat("BENIGN", 0, 3000, std::move(benign), 0.07));
    spec.categories.push_back(make_cat("DDoS", 1, 3000, std::move(attack), 0.07));
  } else if (name == "three-informative") {
    // signal strength decreases from f0 to f2; f3..f9 are noise
    auto benign = flat(0.5);
    auto attack = flat(0.5);
    benign[0] = 0.25;
    attack[0] = 0.75;
    benign[1] = 0.32;
    attack[1] = 0.68;
    benign[2] = 0.38;
    attack[2] = 0.62;
    spec.categories.push_back(make_cat("BENIGN", 0, 2500, std::move(benign), 0.09));
    spec.categories.push_back(make_cat("DDoS", 1, 2500, std::move(attack), 0.09));
  } else if (name == "four-category") {
    // each attack family lives in its own feature subspace
    spec.categories.push_back(make_cat("BENIGN", 0, 3000, flat(0.2), 0.07));
    spec.categories.push_back(make_cat("DDoS", 1, 1000, bump(0.2, 0, 3, 0.8), 0.07));
    spec.categories.push_back(make_cat("PortScan", 1, 1000, bump(0.2, 3, 6, 0.8), 0.07));
    spec.categories.push_back(make_cat("Bot", 1, 1000, bump(0.2, 6, 9, 0.8), 0.07));
  } else {
    fail(errc::usage, "unknown synth preset '" + name + "'");
  }
  return spec;
}

}  // namespace adaptids
