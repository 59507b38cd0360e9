#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "helpers.hpp"
#include "sclm/simulate.hpp"

using namespace sclm;
using namespace sclm::testing;

namespace {

std::vector<uint64_t> make_seeds(int count, uint64_t base = 1000) {
    std::vector<uint64_t> seeds;
    for (int i = 0; i < count; ++i) seeds.push_back(base + static_cast<uint64_t>(i));
    return seeds;
}

// Independent replication of the policy's action rule: K highest indices for
// the current states, ties to the lowest arm id.
std::vector<uint8_t> oracle_actions(const RmabInstance& instance,
                                    const std::vector<std::array<double, 2>>& whittle,
                                    const std::vector<uint8_t>& state) {
    int n = instance.n_arms();
    std::vector<int> order(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        double ia = whittle[static_cast<size_t>(a)][state[static_cast<size_t>(a)]];
        double ib = whittle[static_cast<size_t>(b)][state[static_cast<size_t>(b)]];
        if (ia != ib) return ia > ib;
        return a < b;
    });
    std::vector<uint8_t> action(static_cast<size_t>(n), 0);
    for (int k = 0; k < instance.budget; ++k) action[static_cast<size_t>(order[static_cast<size_t>(k)])] = 1;
    return action;
}

// Exact expectation of the discounted default-reward total by enumerating the
// full joint state tree.
double enumerate_expected_total(const RmabInstance& instance,
                                const std::vector<std::array<double, 2>>& whittle) {
    std::function<double(std::vector<uint8_t>, int, double)> go =
        [&](std::vector<uint8_t> state, int t, double gamma_t) -> double {
        if (t == instance.horizon) return 0.0;
        double accrued = 0.0;
        for (size_t i = 0; i < state.size(); ++i) accrued += gamma_t * state[i];
        auto action = oracle_actions(instance, whittle, state);

        double expected = 0.0;
        int n = instance.n_arms();
        for (int mask = 0; mask < (1 << n); ++mask) {
            double prob = 1.0;
            std::vector<uint8_t> next(static_cast<size_t>(n));
            for (int i = 0; i < n; ++i) {
                int s2 = (mask >> i) & 1;
                next[static_cast<size_t>(i)] = static_cast<uint8_t>(s2);
                prob *= instance.arms[static_cast<size_t>(i)]
                            .transitions[state[static_cast<size_t>(i)]][action[static_cast<size_t>(i)]][s2];
            }
            if (prob > 0.0) expected += prob * go(std::move(next), t + 1, gamma_t * instance.discount);
        }
        return accrued + expected;
    };
    return go(std::vector<uint8_t>(static_cast<size_t>(instance.n_arms()), 1), 0, 1.0);
}

}  // namespace

TEST_CASE("all arms start in state 1 and accrual precedes acting") {
    std::mt19937_64 rng(21);
    RmabInstance instance = tiny_instance(rng, 4, 2, 1, 0.9);
    auto result = simulate(instance, default_reward_table(4), {default_reward_table(4)},
                           make_seeds(3));
    // Horizon 1: the only accrual happens before any transition.
    CHECK(result.totals[0] == doctest::Approx(4.0));
    CHECK(result.distribution.total_utility == doctest::Approx(4.0));
}

TEST_CASE("deterministic transitions give exact totals") {
    // Two arms, K=1. Arm 0: active keeps state 1, passive drops to 0 and stays.
    // Arm 1: always decays to 0.
    RmabInstance instance;
    instance.schema = tiny_schema(2);
    instance.budget = 1;
    instance.horizon = 3;
    instance.discount = 0.5;
    ArmModel a0 = make_arm(0.0, 0.0, 1.0, 1.0);
    a0.features = {1, 0};
    ArmModel a1 = make_arm(0.0, 0.0, 0.0, 0.0);
    a1.features = {0, 1};
    instance.arms = {a0, a1};
    instance.validate();

    SimulationTrace trace;
    auto result = simulate(instance, default_reward_table(2), {default_reward_table(2)},
                           make_seeds(1), nullptr, {}, &trace);
    // Arm 0 has the positive index; it is pulled every step and stays at 1.
    // Arm 1 decays after step 0. Totals: t0 both at 1 (2), t1 arm0 only (0.5),
    // t2 arm0 only (0.25).
    CHECK(result.totals[0] == doctest::Approx(2.75));
    REQUIRE(trace.actions.size() == 3);
    for (const auto& acts : trace.actions) {
        CHECK(acts[0] == 1);
        CHECK(acts[1] == 0);
    }
    CHECK(trace.states[1][0] == 1);
    CHECK(trace.states[1][1] == 0);
}

TEST_CASE("K equal to N pulls every arm") {
    std::mt19937_64 rng(22);
    RmabInstance instance = tiny_instance(rng, 5, 5, 4, 0.9);
    SimulationTrace trace;
    simulate(instance, default_reward_table(5), {}, make_seeds(1), nullptr, {}, &trace);
    for (const auto& acts : trace.actions)
        for (uint8_t a : acts) CHECK(a == 1);
}

TEST_CASE("index ties break toward the lowest arm id") {
    std::mt19937_64 rng(23);
    ArmModel proto = random_arm(rng);
    RmabInstance instance;
    instance.schema = tiny_schema(2);
    instance.budget = 2;
    instance.horizon = 1;
    instance.discount = 0.9;
    for (int i = 0; i < 4; ++i) {
        ArmModel arm = proto;  // identical arms, identical indices
        arm.features = {static_cast<uint8_t>(i % 2 == 0), static_cast<uint8_t>(i % 2 != 0)};
        instance.arms.push_back(std::move(arm));
    }
    instance.validate();
    SimulationTrace trace;
    simulate(instance, default_reward_table(4), {}, make_seeds(1), nullptr, {}, &trace);
    CHECK(trace.actions[0] == std::vector<uint8_t>{1, 1, 0, 0});
}

TEST_CASE("top_k_arms orders by value then id") {
    std::vector<double> idx{0.5, 0.9, 0.5, 0.1};
    CHECK(top_k_arms(idx, 3) == std::vector<int>{1, 0, 2});
}

TEST_CASE("Monte-Carlo mean converges to the exhaustive enumeration oracle") {
    std::mt19937_64 rng(24);
    for (int trial = 0; trial < 3; ++trial) {
        RmabInstance instance = tiny_instance(rng, 3, 1, 2, 0.9);
        WhittleCache cache;
        std::vector<std::array<double, 2>> whittle;
        for (const auto& arm : instance.arms)
            whittle.push_back(cache.indices(arm, {0.0, 1.0}, instance.discount, {}));

        double exact = enumerate_expected_total(instance, whittle);
        auto result = simulate(instance, default_reward_table(3), {default_reward_table(3)},
                               make_seeds(50000, 77 + static_cast<uint64_t>(trial)), &cache);
        // Per-seed totals live in [3, 3 + 2*0.9]; spread is tiny, 3 SE cushion.
        CHECK(std::abs(result.totals[0] - exact) < 0.03);
    }
}

TEST_CASE("cache use is transparent to the results") {
    std::mt19937_64 rng(25);
    RmabInstance instance = tiny_instance(rng, 6, 2, 5, 0.9);
    WhittleCache cache;
    auto with_cache = simulate(instance, default_reward_table(6), {default_reward_table(6)},
                               make_seeds(8), &cache);
    auto without = simulate(instance, default_reward_table(6), {default_reward_table(6)},
                            make_seeds(8));
    CHECK(with_cache.totals[0] == without.totals[0]);
    CHECK(with_cache.distribution.total_utility == without.distribution.total_utility);
    for (size_t ci = 0; ci < with_cache.distribution.totals.size(); ++ci)
        for (size_t b = 0; b < with_cache.distribution.totals[ci].size(); ++b)
            CHECK(with_cache.distribution.totals[ci][b] == without.distribution.totals[ci][b]);
}

TEST_CASE("utility distribution buckets discounted state-1 mass by feature") {
    RmabInstance instance;
    instance.schema = tiny_schema(2);
    instance.budget = 1;
    instance.horizon = 2;
    instance.discount = 0.5;
    ArmModel stay = make_arm(1.0, 1.0, 1.0, 1.0);  // always state 1
    stay.features = {1, 0};
    ArmModel decay = make_arm(0.0, 0.0, 0.0, 0.0);  // state 0 after t=0
    decay.features = {0, 1};
    instance.arms = {stay, decay};
    instance.validate();

    auto result = simulate(instance, default_reward_table(2), {}, make_seeds(4));
    CHECK(result.distribution.totals[0][0] == doctest::Approx(1.5));  // 1 + 0.5
    CHECK(result.distribution.totals[0][1] == doctest::Approx(1.0));  // t=0 only
    CHECK(result.distribution.total_utility == doctest::Approx(2.5));
}

TEST_CASE("same seeds give identical trajectories across runs") {
    std::mt19937_64 rng(26);
    RmabInstance instance = tiny_instance(rng, 5, 2, 6, 0.9);
    auto a = simulate(instance, default_reward_table(5), {default_reward_table(5)}, make_seeds(5));
    auto b = simulate(instance, default_reward_table(5), {default_reward_table(5)}, make_seeds(5));
    CHECK(a.totals[0] == b.totals[0]);
    CHECK(a.distribution.total_utility == b.distribution.total_utility);
}

TEST_CASE("input validation") {
    std::mt19937_64 rng(27);
    RmabInstance instance = tiny_instance(rng, 3, 1, 2, 0.9);
    CHECK_THROWS(simulate(instance, default_reward_table(3), {}, {}));
    CHECK_THROWS(simulate(instance, default_reward_table(2), {}, make_seeds(1)));
    CHECK_THROWS(simulate(instance, default_reward_table(3), {default_reward_table(4)}, make_seeds(1)));
}
