#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ctrllab/config.hpp"

namespace ctrllab {

inline constexpr const char* kVersion = "0.1.0";

// Known experiment families in dispatch order.
const std::vector<std::string>& experiment_families();

// Executes the requested families (all when `only` is empty), writes CSV
// outputs plus manifest.json under out_dir, and returns the manifest.
// Per-family failures are recorded without aborting the remaining work.
RunManifest run_experiments(const ExperimentConfig& cfg,
                            const std::vector<std::string>& only,
                            const std::filesystem::path& out_dir);

}  // namespace ctrllab
