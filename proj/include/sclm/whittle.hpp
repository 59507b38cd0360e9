#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <shared_mutex>
#include <unordered_map>

#include "sclm/types.hpp"

namespace sclm {

struct SolverParams {
    double vi_tol = 1e-6;
    double bs_tol = 1e-4;
    int max_iterations = 10000;
};

// Q(s,a) under subsidy lambda: fixed point of
//   Q(s,a) = r(s) + lambda*[a==0] + gamma * sum_s' P(s,a,s') * max_a' Q(s',a').
// Each entry is within vi_tol of the fixed point in sup norm.
// When discount == 1 a horizon-bounded backup (`horizon` sweeps from zero) is
// performed instead of iterating to convergence.
std::array<std::array<double, 2>, 2> q_values(const ArmModel& arm,
                                              std::array<double, 2> rewards,
                                              double subsidy, double discount,
                                              double vi_tol, int max_iterations = 10000,
                                              int horizon = 0);

struct WhittleResult {
    double index = 0.0;
    bool indexable = true;  // false: root never bracketed, index set to a bracket endpoint
};

// Binary search for the subsidy at which passive and active actions have equal
// value in `state`. Bracket starts at +-R_span/(1-gamma) and is doubled up to
// four times if the sign change is not enclosed.
WhittleResult whittle_index(const ArmModel& arm, std::array<double, 2> rewards, int state,
                            double discount, double bs_tol, double vi_tol = 1e-6);

// Cache of per-arm Whittle index pairs keyed by (transitions, r(0), r(1),
// discount) quantized at 1e-9. Concurrent reads, synchronized inserts; a hit
// is byte-identical to a recompute.
class WhittleCache {
public:
    explicit WhittleCache(bool enabled = true) : enabled_(enabled) {}

    // indices[s] = Whittle index of `arm` in state s.
    std::array<double, 2> indices(const ArmModel& arm, std::array<double, 2> rewards,
                                  double discount, const SolverParams& params,
                                  bool* indexable = nullptr);

    uint64_t hits() const { return hits_.load(); }
    uint64_t misses() const { return misses_.load(); }

private:
    struct Key {
        std::array<int64_t, 11> q;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        size_t operator()(const Key& k) const;
    };
    struct Entry {
        std::array<double, 2> indices;
        bool indexable;
    };

    bool enabled_;
    mutable std::shared_mutex mutex_;
    std::unordered_map<Key, Entry, KeyHash> map_;
    std::atomic<uint64_t> hits_{0};
    std::atomic<uint64_t> misses_{0};
};

}  // namespace sclm
