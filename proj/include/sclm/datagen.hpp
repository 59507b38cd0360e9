#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sclm/types.hpp"

namespace sclm {

struct DatasetConfig {
    int n_arms = 100;
    std::array<double, 3> weights{0.8, -1.5, 1.0};
    double sigma = 0.1;
    int buckets_per_feature = 5;
    int budget = 10;
    int horizon = 12;
    double discount = 0.9;
    uint64_t master_seed = 0;
    int n_instances = 5;
    // Resample the intervention effect for each state instead of sharing one
    // draw per arm.
    bool per_state_delta = false;
    // Real-world analogue: 19-bucket schema (5 age, 7 education, 7 income)
    // with Beta-like passive probability prior instead of Uniform(0,1).
    bool real_world = false;

    void validate() const;
};

// Weight vectors for the three synthetic datasets; id in {1,2,3}.
std::array<double, 3> dataset_weights(int dataset_id);

FeatureSchema synthetic_schema(int buckets_per_feature);
FeatureSchema real_world_schema();

struct InstanceAudit {
    int clamp_activations = 0;
    int delta_draws = 0;
    // Pre-clamp intervention-effect draws, one per arm (plus one per state
    // with per_state_delta).
    int effect_draws = 0;
    double effect_sum = 0.0;
    double effect_sq_sum = 0.0;
    double clamp_rate() const { return delta_draws ? static_cast<double>(clamp_activations) / delta_draws : 0.0; }
};

RmabInstance generate_instance(const DatasetConfig& cfg, uint64_t instance_seed,
                               InstanceAudit* audit = nullptr);

struct DatasetSuite {
    // suite[dataset][instance]; datasets ordered 1..3.
    std::vector<std::vector<RmabInstance>> instances;
    std::vector<std::vector<uint64_t>> seeds;
};

// Three synthetic datasets (Feature-A/B/C weight vectors, sigma = 0.1) with
// cfg.n_instances instances each, expanded deterministically from the master
// seed.
DatasetSuite dataset_suite(const DatasetConfig& cfg);

}  // namespace sclm
