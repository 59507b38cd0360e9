#include "sclm/types.hpp"

#include <cmath>
#include <stdexcept>

namespace sclm {

int FeatureSchema::total_buckets() const {
    int n = 0;
    for (const auto& c : categories) n += static_cast<int>(c.buckets.size());
    return n;
}

int FeatureSchema::offset_of(int category_index) const {
    int off = 0;
    for (int i = 0; i < category_index; ++i)
        off += static_cast<int>(categories[i].buckets.size());
    return off;
}

int FeatureSchema::category_index(const std::string& name) const {
    for (size_t i = 0; i < categories.size(); ++i)
        if (categories[i].name == name) return static_cast<int>(i);
    throw std::invalid_argument("unknown feature category: " + name);
}

void ArmModel::validate(const FeatureSchema& schema) const {
    for (int s = 0; s < 2; ++s)
        for (int a = 0; a < 2; ++a) {
            double row = 0;
            for (int s2 = 0; s2 < 2; ++s2) {
                double p = transitions[s][a][s2];
                if (!(p >= 0.0 && p <= 1.0))
                    throw std::invalid_argument("transition probability outside [0,1]");
                row += p;
            }
            if (std::abs(row - 1.0) > 1e-9)
                throw std::invalid_argument("transition row does not sum to 1");
        }
    if (static_cast<int>(features.size()) != schema.total_buckets())
        throw std::invalid_argument("feature vector length does not match schema");
    for (size_t ci = 0; ci < schema.categories.size(); ++ci) {
        int off = schema.offset_of(static_cast<int>(ci));
        int hot = 0;
        for (size_t b = 0; b < schema.categories[ci].buckets.size(); ++b)
            hot += features[off + b] != 0 ? 1 : 0;
        if (hot != 1)
            throw std::invalid_argument("feature category " + schema.categories[ci].name +
                                        " is not one-hot");
    }
}

void RmabInstance::validate() const {
    if (arms.empty()) throw std::invalid_argument("instance has no arms");
    if (budget <= 0 || budget > n_arms()) throw std::invalid_argument("budget must satisfy 0 < K <= N");
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    if (!(discount >= 0.0 && discount <= 1.0)) throw std::invalid_argument("discount must be in [0,1]");
    for (const auto& arm : arms) arm.validate(schema);
}

void RewardTable::validate() const {
    for (const auto& v : values)
        if (!std::isfinite(v[0]) || !std::isfinite(v[1]))
            throw std::invalid_argument("reward table contains non-finite values");
}

RewardTable default_reward_table(int n_arms) {
    RewardTable t;
    t.values.assign(static_cast<size_t>(n_arms), {0.0, 1.0});
    return t;
}

UtilityFeatureDistribution UtilityFeatureDistribution::zeros(const FeatureSchema& schema) {
    UtilityFeatureDistribution d;
    d.schema = schema;
    d.totals.reserve(schema.categories.size());
    for (const auto& c : schema.categories)
        d.totals.emplace_back(c.buckets.size(), 0.0);
    return d;
}

const std::vector<double>& UtilityFeatureDistribution::category_totals(const std::string& category) const {
    return totals[static_cast<size_t>(schema.category_index(category))];
}

void UtilityFeatureDistribution::accrue(const std::vector<uint8_t>& features, double utility) {
    for (size_t ci = 0; ci < schema.categories.size(); ++ci) {
        int off = schema.offset_of(static_cast<int>(ci));
        for (size_t b = 0; b < schema.categories[ci].buckets.size(); ++b)
            if (features[off + b]) {
                totals[ci][b] += utility;
                break;
            }
    }
    total_utility += utility;
}

}  // namespace sclm
