#pragma once

#include <string>
#include <vector>

#include "odrpo/reward_core.hpp"

namespace odrpo {

enum class WeightScheme { Unit, Gini, GiniMedian };

const char* to_string(WeightScheme scheme);
WeightScheme weight_scheme_from_string(const std::string& name);

using WeightVector = std::vector<double>;

WeightVector unit_weights(int num_levels);

// w^(k) = sqrt(k) * (0.1 + 4 mu^(k) (1 - mu^(k))): impurity peaks at mu = 0.5.
WeightVector gini_weights(const BinStats& stats);

// Lower median of the group's level indices (even groups take the lower of
// the two middle indices, so the median is always an attained level).
int group_median_bin(const RolloutGroup& group);

// w^(k) = sqrt(k) * (0.1 + 4 mu (1 - mu) * exp(-max(M_G - k, 0) / 2)):
// attenuates bins below the group median, matches Gini at and above it.
WeightVector gini_median_weights(const BinStats& stats, int median_bin);

// Dispatch on scheme; GiniMedian needs the group for its median bin.
WeightVector bin_weights(WeightScheme scheme, const BinStats& stats, const RolloutGroup& group);

}  // namespace odrpo
