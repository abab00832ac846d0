#include "odrpo/weighting.hpp"

#include <algorithm>
#include <cmath>

namespace odrpo {

const char* to_string(WeightScheme scheme) {
    switch (scheme) {
        case WeightScheme::Unit: return "unit";
        case WeightScheme::Gini: return "gini";
        case WeightScheme::GiniMedian: return "gini-median";
    }
    return "?";
}

WeightScheme weight_scheme_from_string(const std::string& name) {
    if (name == "unit") return WeightScheme::Unit;
    if (name == "gini") return WeightScheme::Gini;
    if (name == "gini-median" || name == "gini-med") return WeightScheme::GiniMedian;
    throw ValidationError("unknown weight scheme '" + name + "' (use unit|gini|gini-median)");
}

WeightVector unit_weights(int num_levels) {
    return WeightVector(static_cast<std::size_t>(num_levels), 1.0);
}

WeightVector gini_weights(const BinStats& stats) {
    WeightVector w(stats.bin_means.size());
    for (std::size_t k = 0; k < w.size(); ++k) {
        const double mu = stats.bin_means[k];
        w[k] = std::sqrt(static_cast<double>(k + 1)) * (0.1 + 4.0 * mu * (1.0 - mu));
    }
    return w;
}

int group_median_bin(const RolloutGroup& group) {
    std::vector<int> indices = group.level_indices();
    std::sort(indices.begin(), indices.end());
    return indices[(indices.size() - 1) / 2];
}

WeightVector gini_median_weights(const BinStats& stats, int median_bin) {
    if (median_bin < 1 || median_bin > stats.num_levels())
        throw ValidationError("median bin index out of range");
    WeightVector w(stats.bin_means.size());
    for (std::size_t k = 0; k < w.size(); ++k) {
        const double mu = stats.bin_means[k];
        const double gap = std::max(static_cast<double>(median_bin) - static_cast<double>(k + 1), 0.0);
        w[k] = std::sqrt(static_cast<double>(k + 1)) *
               (0.1 + 4.0 * mu * (1.0 - mu) * std::exp(-gap / 2.0));
    }
    return w;
}

WeightVector bin_weights(WeightScheme scheme, const BinStats& stats, const RolloutGroup& group) {
    switch (scheme) {
        case WeightScheme::Unit: return unit_weights(stats.num_levels());
        case WeightScheme::Gini: return gini_weights(stats);
        case WeightScheme::GiniMedian: return gini_median_weights(stats, group_median_bin(group));
    }
    throw ValidationError("unknown weight scheme");
}

}  // namespace odrpo
