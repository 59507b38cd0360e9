#pragma once

#include <span>
#include <string>

#include "sclm/types.hpp"

namespace sclm {

// 1-D earth mover's distance between two histograms over ordered buckets with
// unit spacing. Both histograms are normalized to mass 1 first; the distance
// is sum_k |CDF_a(k) - CDF_b(k)|. Throws on all-zero or negative input.
double emd_1d(std::span<const double> a, std::span<const double> b);

// EMD between the `category` histograms of two utility feature distributions.
double utility_distribution_diff(const UtilityFeatureDistribution& a,
                                 const UtilityFeatureDistribution& b,
                                 const std::string& category);

}  // namespace sclm
