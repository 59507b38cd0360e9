#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "helpers.hpp"
#include "sclm/emd.hpp"

using namespace sclm;
using namespace sclm::testing;

namespace {

// Independent oracle: optimal 1-D transport by greedy two-pointer matching on
// the normalized histograms, cost = moved mass x bucket distance.
double flow_emd(std::vector<double> a, std::vector<double> b) {
    double ma = 0, mb = 0;
    for (double v : a) ma += v;
    for (double v : b) mb += v;
    for (double& v : a) v /= ma;
    for (double& v : b) v /= mb;

    double cost = 0.0;
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= 1e-15) {
            ++i;
            continue;
        }
        if (b[j] <= 1e-15) {
            ++j;
            continue;
        }
        double moved = std::min(a[i], b[j]);
        cost += moved * std::abs(static_cast<double>(i) - static_cast<double>(j));
        a[i] -= moved;
        b[j] -= moved;
    }
    return cost;
}

}  // namespace

TEST_CASE("hand-computed distances") {
    CHECK(emd_1d(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == doctest::Approx(1.0));
    CHECK(emd_1d(std::vector<double>{1, 0, 0}, std::vector<double>{0, 0, 1}) == doctest::Approx(2.0));
    CHECK(emd_1d(std::vector<double>{1, 1}, std::vector<double>{1, 1}) == doctest::Approx(0.0));
    CHECK(emd_1d(std::vector<double>{0.5, 0.5, 0}, std::vector<double>{0, 0.5, 0.5}) ==
          doctest::Approx(1.0));
}

TEST_CASE("scale invariance from normalization") {
    std::vector<double> a{0.2, 0.5, 0.3}, b{0.6, 0.1, 0.3}, a2{2, 5, 3};
    CHECK(emd_1d(a, b) == doctest::Approx(emd_1d(a2, b)));
}

TEST_CASE("matches the greedy transport oracle on random histograms") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> len(2, 9);
    for (int trial = 0; trial < 500; ++trial) {
        int n = len(rng);
        std::vector<double> a(static_cast<size_t>(n)), b(static_cast<size_t>(n));
        for (auto& v : a) v = u(rng);
        for (auto& v : b) v = u(rng);
        a[0] += 0.01;  // keep strictly positive mass
        b[0] += 0.01;
        CHECK(emd_1d(a, b) == doctest::Approx(flow_emd(a, b)).epsilon(1e-9));
    }
}

TEST_CASE("metric properties on random histograms") {
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a(5), b(5), c(5);
        for (auto& v : a) v = u(rng);
        for (auto& v : b) v = u(rng);
        for (auto& v : c) v = u(rng);
        double ab = emd_1d(a, b), ba = emd_1d(b, a);
        CHECK(ab == doctest::Approx(ba));
        CHECK(emd_1d(a, a) == doctest::Approx(0.0));
        CHECK(emd_1d(a, c) <= ab + emd_1d(b, c) + 1e-9);
    }
}

TEST_CASE("rejects degenerate input") {
    CHECK_THROWS(emd_1d(std::vector<double>{0, 0}, std::vector<double>{1, 0}));
    CHECK_THROWS(emd_1d(std::vector<double>{1, 0}, std::vector<double>{0, 0}));
    CHECK_THROWS(emd_1d(std::vector<double>{-1, 2}, std::vector<double>{1, 0}));
    CHECK_THROWS(emd_1d(std::vector<double>{1, 0}, std::vector<double>{1, 0, 0}));
    CHECK_THROWS(emd_1d(std::vector<double>{}, std::vector<double>{}));
}

TEST_CASE("utility_distribution_diff dispatches on the category") {
    FeatureSchema schema = tiny_schema(3);
    schema.categories.push_back({"Feature B", {"b1", "b2"}});
    auto d1 = UtilityFeatureDistribution::zeros(schema);
    auto d2 = UtilityFeatureDistribution::zeros(schema);
    d1.totals[0] = {1, 0, 0};
    d2.totals[0] = {0, 0, 1};
    d1.totals[1] = {1, 1};
    d2.totals[1] = {1, 1};
    CHECK(utility_distribution_diff(d1, d2, "Feature A") == doctest::Approx(2.0));
    CHECK(utility_distribution_diff(d1, d2, "Feature B") == doctest::Approx(0.0));
    CHECK_THROWS(utility_distribution_diff(d1, d2, "Feature C"));

    auto d3 = UtilityFeatureDistribution::zeros(tiny_schema(3));
    d3.totals[0] = {1, 0, 0};
    CHECK_THROWS(utility_distribution_diff(d1, d3, "Feature A"));
}
