#pragma once

#include <cstdint>
#include <string>

#include "srrm/evaluation.hpp"
#include "srrm/grid.hpp"
#include "srrm/pipeline.hpp"
#include "srrm/scene.hpp"

namespace srrm {

struct EvalConfig {
    double threshold_kelvin = 10.0;
    double confidence = 0.95;
    int bins = 50;
};

// One declarative run configuration, read from a JSON file. Unknown or
// missing required keys raise ConfigError naming the key.
struct RunConfig {
    std::uint64_t seed = 0;
    SceneConfig scene;
    TauOmegaParams tau_omega;
    NoiseSpec noise;
    PipelineConfig pipeline;
    EvalConfig evaluation;
};

RunConfig load_config(const std::string& path);

// Re-seeds every stage from a new master seed (flag > config precedence).
void apply_seed(RunConfig& config, std::uint64_t seed);

// FNV-1a hash of the raw config text; changes iff the text changes.
std::uint64_t config_hash(const std::string& path);

// Human-readable dump of the fully resolved configuration.
std::string describe_config(const RunConfig& config);

}  // namespace srrm
