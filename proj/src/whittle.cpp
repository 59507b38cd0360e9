#include "sclm/whittle.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <string>

namespace sclm {

namespace {

double bellman_sweep(const ArmModel& arm, const std::array<double, 2>& rewards,
                     double subsidy, double discount,
                     std::array<std::array<double, 2>, 2>& q) {
    std::array<double, 2> v{std::max(q[0][0], q[0][1]), std::max(q[1][0], q[1][1])};
    double sup_change = 0.0;
    for (int s = 0; s < 2; ++s)
        for (int a = 0; a < 2; ++a) {
            double next = rewards[s] + (a == 0 ? subsidy : 0.0);
            next += discount * (arm.transitions[s][a][0] * v[0] + arm.transitions[s][a][1] * v[1]);
            sup_change = std::max(sup_change, std::abs(next - q[s][a]));
            q[s][a] = next;
        }
    return sup_change;
}

}  // namespace

std::array<std::array<double, 2>, 2> q_values(const ArmModel& arm,
                                              std::array<double, 2> rewards,
                                              double subsidy, double discount,
                                              double vi_tol, int max_iterations,
                                              int horizon) {
    if (!std::isfinite(rewards[0]) || !std::isfinite(rewards[1]) || !std::isfinite(subsidy))
        throw std::invalid_argument("q_values: non-finite rewards or subsidy");
    if (vi_tol <= 0.0) throw std::invalid_argument("q_values: vi_tol must be positive");
    if (discount < 0.0 || discount > 1.0)
        throw std::invalid_argument("q_values: discount must be in [0,1]");

    std::array<std::array<double, 2>, 2> q{{{0.0, 0.0}, {0.0, 0.0}}};

    if (discount >= 1.0) {
        if (horizon <= 0)
            throw std::invalid_argument("q_values: discount = 1 requires a horizon bound");
        for (int t = 0; t < horizon; ++t) bellman_sweep(arm, rewards, subsidy, discount, q);
        return q;
    }

    // sup-change threshold guaranteeing both ||Q - Q*|| <= vi_tol and a
    // Bellman residual below vi_tol.
    double threshold = discount > 0.0 ? vi_tol * (1.0 - discount) / discount : vi_tol;
    threshold = std::min(threshold, vi_tol);
    for (int it = 0; it < max_iterations; ++it) {
        double change = bellman_sweep(arm, rewards, subsidy, discount, q);
        if (change <= threshold) return q;
    }
    throw std::runtime_error("q_values: no convergence after " + std::to_string(max_iterations) +
                             " iterations (discount=" + std::to_string(discount) +
                             ", subsidy=" + std::to_string(subsidy) + ")");
}

WhittleResult whittle_index(const ArmModel& arm, std::array<double, 2> rewards, int state,
                            double discount, double bs_tol, double vi_tol) {
    if (bs_tol <= 0.0) throw std::invalid_argument("whittle_index: bs_tol must be positive");
    if (discount >= 1.0)
        throw std::invalid_argument("whittle_index: requires discount < 1");
    if (state != 0 && state != 1) throw std::invalid_argument("whittle_index: state must be 0 or 1");

    auto gap = [&](double lambda) {
        auto q = q_values(arm, rewards, lambda, discount, vi_tol);
        return q[state][0] - q[state][1];
    };

    double span = std::max(std::abs(rewards[0]), std::abs(rewards[1]));
    double bracket = span / (1.0 - discount);
    if (bracket < bs_tol) bracket = bs_tol;  // degenerate r == 0: the root sits at 0

    double lo = -bracket, hi = bracket;
    double glo = gap(lo), ghi = gap(hi);
    for (int grow = 0; grow < 4 && !(glo <= 0.0 && ghi >= 0.0); ++grow) {
        lo *= 2.0;
        hi *= 2.0;
        glo = gap(lo);
        ghi = gap(hi);
    }
    if (!(glo <= 0.0 && ghi >= 0.0)) {
        // Not indexable under the monotone-gap assumption; report the closer endpoint.
        WhittleResult r;
        r.indexable = false;
        r.index = std::abs(glo) < std::abs(ghi) ? lo : hi;
        return r;
    }

    while (hi - lo > bs_tol) {
        double mid = 0.5 * (lo + hi);
        if (gap(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return {0.5 * (lo + hi), true};
}

size_t WhittleCache::KeyHash::operator()(const Key& k) const {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (int64_t v : k.q) {
        h ^= static_cast<uint64_t>(v);
        h *= 0x100000001b3ULL;
    }
    return static_cast<size_t>(h);
}

std::array<double, 2> WhittleCache::indices(const ArmModel& arm, std::array<double, 2> rewards,
                                            double discount, const SolverParams& params,
                                            bool* indexable) {
    auto compute = [&]() {
        Entry e;
        e.indexable = true;
        for (int s = 0; s < 2; ++s) {
            auto r = whittle_index(arm, rewards, s, discount, params.bs_tol, params.vi_tol);
            e.indices[s] = r.index;
            e.indexable = e.indexable && r.indexable;
        }
        return e;
    };

    if (!enabled_) {
        Entry e = compute();
        if (indexable) *indexable = e.indexable;
        return e.indices;
    }

    Key key{};
    auto quantize = [](double v) { return static_cast<int64_t>(std::llround(v * 1e9)); };
    int idx = 0;
    for (int s = 0; s < 2; ++s)
        for (int a = 0; a < 2; ++a)
            for (int s2 = 0; s2 < 2; ++s2) key.q[idx++] = quantize(arm.transitions[s][a][s2]);
    key.q[8] = quantize(rewards[0]);
    key.q[9] = quantize(rewards[1]);
    key.q[10] = quantize(discount);

    {
        std::shared_lock lock(mutex_);
        auto it = map_.find(key);
        if (it != map_.end()) {
            ++hits_;
            if (indexable) *indexable = it->second.indexable;
            return it->second.indices;
        }
    }
    Entry e = compute();
    {
        std::unique_lock lock(mutex_);
        ++misses_;
        auto [it, inserted] = map_.emplace(key, e);
        if (indexable) *indexable = it->second.indexable;
        return it->second.indices;
    }
}

}  // namespace sclm
