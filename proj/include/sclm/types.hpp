#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace sclm {

struct FeatureCategory {
    std::string name;
    std::vector<std::string> buckets;

    bool operator==(const FeatureCategory&) const = default;
};

// Ordered list of feature categories; the one-hot feature vector concatenates
// the bucket indicators of every category in order.
struct FeatureSchema {
    std::vector<FeatureCategory> categories;

    int total_buckets() const;
    int offset_of(int category_index) const;
    int category_index(const std::string& name) const;  // throws if absent
    bool operator==(const FeatureSchema&) const = default;
};

// One agent's two-state MDP. transitions[s][a][s'] with s,a,s' in {0,1}.
struct ArmModel {
    std::array<std::array<std::array<double, 2>, 2>, 2> transitions{};
    std::vector<uint8_t> features;      // one-hot over the schema
    std::vector<double> raw_features;   // [0,1]^3 in the synthetic domain; may be empty

    void validate(const FeatureSchema& schema) const;
};

struct RmabInstance {
    std::vector<ArmModel> arms;
    int budget = 0;
    int horizon = 0;
    double discount = 0.9;
    FeatureSchema schema;

    int n_arms() const { return static_cast<int>(arms.size()); }
    void validate() const;
};

// Per-arm reward values r_i(s); the global reward expression evaluated at each
// arm's features.
struct RewardTable {
    std::vector<std::array<double, 2>> values;  // values[i][s]

    int size() const { return static_cast<int>(values.size()); }
    void validate() const;  // finite entries
};

RewardTable default_reward_table(int n_arms);  // r(s) = s

// Discounted utility totals bucketed by feature value under some policy.
struct UtilityFeatureDistribution {
    FeatureSchema schema;
    std::vector<std::vector<double>> totals;  // per category, per bucket
    double total_utility = 0.0;

    static UtilityFeatureDistribution zeros(const FeatureSchema& schema);
    const std::vector<double>& category_totals(const std::string& category) const;
    void accrue(const std::vector<uint8_t>& features, double utility);
};

}  // namespace sclm
