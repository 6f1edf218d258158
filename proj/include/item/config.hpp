#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "item/agents.hpp"
#include "item/plant.hpp"

namespace item::config {

struct RecognizerConfig {
    double window_s = 20.0;
    std::size_t k = 3;
    std::uint64_t kmeans_seed = 7;
    double val_fraction = 0.2;
    std::size_t epochs = 200;
    std::size_t batch = 32;
    double lr = 1e-3;
    std::uint64_t seed = 1;
    bool boundary_mode = false;  // window-boundary updates instead of every step
};

struct WorkbenchConfig {
    int version = 1;
    plant::PlantParams plant;
    agents::TrainConfig training;
    RecognizerConfig recognizer;
    std::vector<std::string> train_cycles;  // csv paths
    std::string eval_cycle;                 // csv path
};

WorkbenchConfig defaults();

// Load defaults, then apply overrides from a JSON file. Unknown keys are
// rejected at the top level to catch typos.
WorkbenchConfig load(const std::string& path);

// Stable content hash of the effective configuration.
std::string hash(const WorkbenchConfig& cfg);

std::string to_json(const WorkbenchConfig& cfg);
void save(const WorkbenchConfig& cfg, const std::string& path);

}  // namespace item::config
