#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sclm/types.hpp"
#include "sclm/whittle.hpp"

namespace sclm {

struct SimulationResult {
    // Mean (over seeds) of the discounted totals, one per accounting table.
    std::vector<double> totals;
    // Mean discounted utility feature distribution under the default reward
    // R*(s) = s.
    UtilityFeatureDistribution distribution;
};

// Per-step trace of the first seed; used by tests to inspect trajectories.
struct SimulationTrace {
    std::vector<std::vector<uint8_t>> states;   // states[t][arm], state before acting
    std::vector<std::vector<uint8_t>> actions;  // actions[t][arm]
};

// Runs the top-K Whittle index policy for `rewards_for_policy` and accrues
// gamma^t * r(s_t) for every accounting table plus gamma^t * s_t into the
// utility feature distribution. All arms start in state 1; accrue, act, then
// transition. Ties in the top-K selection break toward the lowest arm id.
SimulationResult simulate(const RmabInstance& instance, const RewardTable& rewards_for_policy,
                          const std::vector<RewardTable>& accounting_rewards,
                          std::span<const uint64_t> seeds, WhittleCache* cache = nullptr,
                          const SolverParams& params = {}, SimulationTrace* trace = nullptr);

// Arm ids of the K highest indices, ties broken by lowest id.
std::vector<int> top_k_arms(std::span<const double> indices, int k);

}  // namespace sclm
