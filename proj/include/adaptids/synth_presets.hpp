#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adaptids/dataset.hpp"

namespace adaptids {

// built-in synthetic fixtures shared by the CLI and the test suites:
//   two-cluster        benign vs one attack, well separated (F=10)
//   overlap            identical benign/attack clusters (F=10)
//   single-informative only feature 0 carries signal (F=10)
//   three-informative  features 0..2 carry signal at decreasing strength (F=10)
//   four-category      benign plus three attack families in disjoint subspaces (F=10)
SynthSpec synth_preset(const std::string& name, std::uint64_t seed);
std::vector<std::string> synth_preset_names();

}  // namespace adaptids
