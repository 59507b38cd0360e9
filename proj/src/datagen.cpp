#include "sclm/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sclm/rng.hpp"

namespace sclm {

void DatasetConfig::validate() const {
    if (n_arms < 1) throw std::invalid_argument("n_arms must be >= 1");
    if (buckets_per_feature < 2) throw std::invalid_argument("buckets_per_feature must be >= 2");
    if (sigma < 0) throw std::invalid_argument("sigma must be >= 0");
    if (budget < 1 || budget > n_arms) throw std::invalid_argument("budget must satisfy 0 < K <= N");
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    if (n_instances < 1) throw std::invalid_argument("n_instances must be >= 1");
}

std::array<double, 3> dataset_weights(int dataset_id) {
    switch (dataset_id) {
        case 1: return {0.8, -1.5, 1.0};
        case 2: return {10.0, -1.5, 1.0};
        case 3: return {1.0, -1.5, 10.0};
        default: throw std::invalid_argument("dataset id must be 1, 2 or 3");
    }
}

FeatureSchema synthetic_schema(int buckets_per_feature) {
    FeatureSchema schema;
    for (const char* name : {"A", "B", "C"}) {
        FeatureCategory cat;
        cat.name = std::string("Feature ") + name;
        for (int b = 1; b <= buckets_per_feature; ++b)
            cat.buckets.push_back(cat.name + " bucket " + std::to_string(b));
        schema.categories.push_back(std::move(cat));
    }
    return schema;
}

FeatureSchema real_world_schema() {
    FeatureSchema schema;
    schema.categories.push_back(
        {"Age", {"Ages 10-20", "Ages 21-30", "Ages 31-40", "Ages 41-50", "Ages 51-60"}});
    schema.categories.push_back({"Education",
                                 {"Illiterate", "1-5th Grade Completed", "6-9th Grade Completed",
                                  "10th Grade Passed", "12th Grade Passed", "Graduate",
                                  "Post graduate"}});
    schema.categories.push_back({"Income",
                                 {"Income bracket 1", "Income bracket 2", "Income bracket 3",
                                  "Income bracket 4", "Income bracket 5", "Income bracket 6",
                                  "Income bracket 7"}});
    return schema;
}

namespace {

int bucket_of(double raw, int n_buckets) {
    // Equal-width bins over [0,1); the last bin is closed at 1.
    int b = static_cast<int>(std::floor(raw * n_buckets));
    return std::clamp(b, 0, n_buckets - 1);
}

double clamp_probability(double p, InstanceAudit* audit) {
    if (audit) ++audit->delta_draws;
    if (p < 0.001 || p > 0.999) {
        if (audit) ++audit->clamp_activations;
        return std::clamp(p, 0.001, 0.999);
    }
    return p;
}

// Kumaraswamy(a, b) inverse-CDF; the real-world analogue's passive prior.
double kumaraswamy(double u, double a, double b) {
    return std::pow(1.0 - std::pow(1.0 - u, 1.0 / b), 1.0 / a);
}

}  // namespace

RmabInstance generate_instance(const DatasetConfig& cfg, uint64_t instance_seed,
                               InstanceAudit* audit) {
    cfg.validate();
    RmabInstance instance;
    instance.budget = cfg.budget;
    instance.horizon = cfg.horizon;
    instance.discount = cfg.discount;
    instance.schema = cfg.real_world ? real_world_schema() : synthetic_schema(cfg.buckets_per_feature);

    std::mt19937_64 rng(instance_seed);
    instance.arms.reserve(static_cast<size_t>(cfg.n_arms));
    for (int i = 0; i < cfg.n_arms; ++i) {
        ArmModel arm;
        std::array<double, 2> passive;
        for (int s = 0; s < 2; ++s) {
            double u = uniform01(rng);
            passive[s] = cfg.real_world ? kumaraswamy(u, 2.0, 2.0) : u;
        }
        arm.raw_features.resize(3);
        for (double& f : arm.raw_features) f = uniform01(rng);

        double mean_effect = cfg.weights[0] * arm.raw_features[0] +
                             cfg.weights[1] * arm.raw_features[1] +
                             cfg.weights[2] * arm.raw_features[2];
        auto record_effect = [&](double d) {
            if (!audit) return d;
            ++audit->effect_draws;
            audit->effect_sum += d;
            audit->effect_sq_sum += d * d;
            return d;
        };
        double delta = record_effect(normal(rng, mean_effect, cfg.sigma));
        for (int s = 0; s < 2; ++s) {
            double d = delta;
            if (cfg.per_state_delta && s == 1) d = record_effect(normal(rng, mean_effect, cfg.sigma));
            double active = clamp_probability(passive[s] + d, audit);
            arm.transitions[s][0][1] = passive[s];
            arm.transitions[s][0][0] = 1.0 - passive[s];
            arm.transitions[s][1][1] = active;
            arm.transitions[s][1][0] = 1.0 - active;
        }

        arm.features.assign(static_cast<size_t>(instance.schema.total_buckets()), 0);
        for (size_t ci = 0; ci < instance.schema.categories.size(); ++ci) {
            int n_buckets = static_cast<int>(instance.schema.categories[ci].buckets.size());
            int off = instance.schema.offset_of(static_cast<int>(ci));
            arm.features[off + bucket_of(arm.raw_features[ci], n_buckets)] = 1;
        }
        instance.arms.push_back(std::move(arm));
    }
    instance.validate();
    return instance;
}

DatasetSuite dataset_suite(const DatasetConfig& cfg) {
    DatasetSuite suite;
    for (int dataset = 1; dataset <= 3; ++dataset) {
        DatasetConfig dcfg = cfg;
        dcfg.weights = dataset_weights(dataset);
        std::vector<RmabInstance> instances;
        std::vector<uint64_t> seeds;
        for (int k = 0; k < cfg.n_instances; ++k) {
            uint64_t seed = derive_seed(cfg.master_seed, static_cast<uint64_t>(dataset) * 1000 + k);
            seeds.push_back(seed);
            instances.push_back(generate_instance(dcfg, seed));
        }
        suite.instances.push_back(std::move(instances));
        suite.seeds.push_back(std::move(seeds));
    }
    return suite;
}

}  // namespace sclm
