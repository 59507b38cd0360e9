#include "sclm/simulate.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "sclm/rng.hpp"

namespace sclm {

std::vector<int> top_k_arms(std::span<const double> indices, int k) {
    std::vector<int> order(indices.size());
    std::iota(order.begin(), order.end(), 0);
    auto better = [&](int a, int b) {
        if (indices[a] != indices[b]) return indices[a] > indices[b];
        return a < b;
    };
    std::partial_sort(order.begin(), order.begin() + k, order.end(), better);
    order.resize(static_cast<size_t>(k));
    return order;
}

SimulationResult simulate(const RmabInstance& instance, const RewardTable& rewards_for_policy,
                          const std::vector<RewardTable>& accounting_rewards,
                          std::span<const uint64_t> seeds, WhittleCache* cache,
                          const SolverParams& params, SimulationTrace* trace) {
    const int n = instance.n_arms();
    if (seeds.empty()) throw std::invalid_argument("simulate: empty seed list");
    if (rewards_for_policy.size() != n)
        throw std::invalid_argument("simulate: policy reward table length mismatch");
    for (const auto& t : accounting_rewards)
        if (t.size() != n) throw std::invalid_argument("simulate: accounting reward table length mismatch");
    rewards_for_policy.validate();

    WhittleCache local_cache(false);
    WhittleCache& wc = cache ? *cache : local_cache;

    // Indices per arm per state, fixed for the whole run.
    std::vector<std::array<double, 2>> whittle(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        whittle[i] = wc.indices(instance.arms[i], rewards_for_policy.values[i],
                                instance.discount, params);

    SimulationResult result;
    result.totals.assign(accounting_rewards.size(), 0.0);
    result.distribution = UtilityFeatureDistribution::zeros(instance.schema);

    std::vector<double> current_index(static_cast<size_t>(n));
    std::vector<uint8_t> state(static_cast<size_t>(n));
    std::vector<uint8_t> action(static_cast<size_t>(n));

    for (size_t si = 0; si < seeds.size(); ++si) {
        std::mt19937_64 rng(seeds[si]);
        std::fill(state.begin(), state.end(), uint8_t{1});
        double gamma_t = 1.0;
        for (int t = 0; t < instance.horizon; ++t) {
            // Accrue rewards for the current states.
            for (int i = 0; i < n; ++i) {
                for (size_t k = 0; k < accounting_rewards.size(); ++k)
                    result.totals[k] += gamma_t * accounting_rewards[k].values[i][state[i]];
                if (state[i]) result.distribution.accrue(instance.arms[i].features, gamma_t);
            }
            // Act: pull the K arms with the highest current-state index.
            for (int i = 0; i < n; ++i) current_index[i] = whittle[i][state[i]];
            std::fill(action.begin(), action.end(), uint8_t{0});
            for (int i : top_k_arms(current_index, instance.budget)) action[i] = 1;
            if (trace && si == 0) {
                trace->states.push_back(state);
                trace->actions.push_back(action);
            }
            // Transition.
            for (int i = 0; i < n; ++i) {
                double p1 = instance.arms[i].transitions[state[i]][action[i]][1];
                state[i] = uniform01(rng) < p1 ? 1 : 0;
            }
            gamma_t *= instance.discount;
        }
    }

    double inv = 1.0 / static_cast<double>(seeds.size());
    for (auto& v : result.totals) v *= inv;
    for (auto& cat : result.distribution.totals)
        for (auto& v : cat) v *= inv;
    result.distribution.total_utility *= inv;
    return result;
}

}  // namespace sclm
