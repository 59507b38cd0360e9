#pragma once

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "sclm/types.hpp"

namespace sclm::testing {

// Arm from P(s -> 1) under passive and active actions.
inline ArmModel make_arm(double passive0, double passive1, double active0, double active1) {
    ArmModel arm;
    arm.transitions[0][0][1] = passive0;
    arm.transitions[0][0][0] = 1.0 - passive0;
    arm.transitions[1][0][1] = passive1;
    arm.transitions[1][0][0] = 1.0 - passive1;
    arm.transitions[0][1][1] = active0;
    arm.transitions[0][1][0] = 1.0 - active0;
    arm.transitions[1][1][1] = active1;
    arm.transitions[1][1][0] = 1.0 - active1;
    return arm;
}

inline ArmModel random_arm(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.001, 0.999);
    return make_arm(u(rng), u(rng), u(rng), u(rng));
}

// Exact optimal state values of a 2-state MDP under subsidy: evaluate all four
// stationary deterministic policies by solving (I - gamma P) V = r directly.
inline std::array<double, 2> exact_values(const ArmModel& arm, std::array<double, 2> rewards,
                                          double subsidy, double gamma) {
    std::array<double, 2> best{-1e300, -1e300};
    for (int a0 = 0; a0 < 2; ++a0)
        for (int a1 = 0; a1 < 2; ++a1) {
            double r0 = rewards[0] + (a0 == 0 ? subsidy : 0.0);
            double r1 = rewards[1] + (a1 == 0 ? subsidy : 0.0);
            double p00 = arm.transitions[0][a0][0], p01 = arm.transitions[0][a0][1];
            double p10 = arm.transitions[1][a1][0], p11 = arm.transitions[1][a1][1];
            // (1 - g p00) V0 - g p01 V1 = r0 ; -g p10 V0 + (1 - g p11) V1 = r1
            double A = 1.0 - gamma * p00, B = -gamma * p01;
            double C = -gamma * p10, D = 1.0 - gamma * p11;
            double det = A * D - B * C;
            double v0 = (r0 * D - B * r1) / det;
            double v1 = (A * r1 - r0 * C) / det;
            if (v0 + v1 > best[0] + best[1]) best = {v0, v1};
        }
    return best;
}

inline std::array<std::array<double, 2>, 2> exact_q(const ArmModel& arm,
                                                    std::array<double, 2> rewards, double subsidy,
                                                    double gamma) {
    auto v = exact_values(arm, rewards, subsidy, gamma);
    std::array<std::array<double, 2>, 2> q;
    for (int s = 0; s < 2; ++s)
        for (int a = 0; a < 2; ++a)
            q[s][a] = rewards[s] + (a == 0 ? subsidy : 0.0) +
                      gamma * (arm.transitions[s][a][0] * v[0] + arm.transitions[s][a][1] * v[1]);
    return q;
}

// Dense grid scan for the subsidy equalizing passive and active value; the
// independent Whittle oracle. Returns NaN when no sign change is found.
inline double grid_whittle(const ArmModel& arm, std::array<double, 2> rewards, int state,
                           double gamma, double step) {
    double span = std::max(std::abs(rewards[0]), std::abs(rewards[1]));
    double bracket = std::max(span / (1.0 - gamma), 1.0) * 2.0;
    auto gap = [&](double lambda) {
        auto q = exact_q(arm, rewards, lambda, gamma);
        return q[state][0] - q[state][1];
    };
    double prev = gap(-bracket);
    for (double lam = -bracket + step; lam <= bracket + step / 2; lam += step) {
        double g = gap(lam);
        if (prev <= 0.0 && g >= 0.0) return lam - step / 2;
        prev = g;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

// One-category schema with `buckets` buckets; arms assigned round-robin.
inline FeatureSchema tiny_schema(int buckets) {
    FeatureSchema schema;
    FeatureCategory cat;
    cat.name = "Feature A";
    for (int b = 1; b <= buckets; ++b) cat.buckets.push_back("Feature A bucket " + std::to_string(b));
    schema.categories.push_back(std::move(cat));
    return schema;
}

inline RmabInstance tiny_instance(std::mt19937_64& rng, int n_arms, int budget, int horizon,
                                  double gamma, int buckets = 3) {
    RmabInstance instance;
    instance.schema = tiny_schema(buckets);
    instance.budget = budget;
    instance.horizon = horizon;
    instance.discount = gamma;
    for (int i = 0; i < n_arms; ++i) {
        ArmModel arm = random_arm(rng);
        arm.features.assign(static_cast<size_t>(buckets), 0);
        arm.features[static_cast<size_t>(i % buckets)] = 1;
        instance.arms.push_back(std::move(arm));
    }
    instance.validate();
    return instance;
}

}  // namespace sclm::testing
