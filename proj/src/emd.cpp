#include "sclm/emd.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace sclm {

double emd_1d(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("emd_1d: histogram sizes differ");
    if (a.empty()) throw std::invalid_argument("emd_1d: empty histograms");
    double mass_a = 0, mass_b = 0;
    for (double v : a) {
        if (v < 0 || !std::isfinite(v)) throw std::invalid_argument("emd_1d: invalid mass");
        mass_a += v;
    }
    for (double v : b) {
        if (v < 0 || !std::isfinite(v)) throw std::invalid_argument("emd_1d: invalid mass");
        mass_b += v;
    }
    if (mass_a <= 0 || mass_b <= 0)
        throw std::invalid_argument("emd_1d: degenerate (all-zero) distribution");

    double cdf_a = 0, cdf_b = 0, dist = 0;
    for (size_t k = 0; k + 1 < a.size(); ++k) {
        cdf_a += a[k] / mass_a;
        cdf_b += b[k] / mass_b;
        dist += std::abs(cdf_a - cdf_b);
    }
    return dist;
}

double utility_distribution_diff(const UtilityFeatureDistribution& a,
                                 const UtilityFeatureDistribution& b,
                                 const std::string& category) {
    if (!(a.schema == b.schema))
        throw std::invalid_argument("utility_distribution_diff: schema mismatch");
    const auto& ha = a.category_totals(category);
    const auto& hb = b.category_totals(category);
    return emd_1d(ha, hb);
}

}  // namespace sclm
