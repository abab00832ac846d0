#include "odrpo/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace odrpo {

const char* to_string(Normalization norm) {
    return norm == Normalization::StdDev ? "stddev" : "mean";
}

Normalization normalization_from_string(const std::string& name) {
    if (name == "stddev" || name == "std") return Normalization::StdDev;
    if (name == "mean") return Normalization::Mean;
    throw ValidationError("unknown normalization '" + name + "' (use stddev|mean)");
}

AdvantageVector grpo_advantage(const RolloutGroup& group) {
    const auto m = group_moments(group);
    AdvantageVector out;
    out.values.resize(static_cast<std::size_t>(group.size()));
    if (m.stddev == 0.0) return out;  // all rewards equal
    for (int i = 0; i < group.size(); ++i)
        out.values[static_cast<std::size_t>(i)] = (group.reward(i) - m.mean) / m.stddev;
    return out;
}

AdvantageVector maxrl_advantage(const RolloutGroup& group) {
    const auto m = group_moments(group);
    if (std::abs(m.mean) <= kEps)
        throw MeanTooSmallError("group mean too small for mean normalization");
    AdvantageVector out;
    out.values.resize(static_cast<std::size_t>(group.size()));
    for (int i = 0; i < group.size(); ++i)
        out.values[static_cast<std::size_t>(i)] = (group.reward(i) - m.mean) / m.mean;
    return out;
}

AdvantageVector odrpo_advantage(const RolloutGroup& group, Normalization norm,
                                WeightScheme weights) {
    const int g = group.size();
    const int k_levels = group.scale().size();
    const auto matrix = decompose(group);
    const auto stats = bin_stats(matrix);
    const auto w = bin_weights(weights, stats, group);

    AdvantageVector out;
    out.num_levels = k_levels;
    out.values.assign(static_cast<std::size_t>(g), 0.0);
    out.per_bin.assign(static_cast<std::size_t>(g) * k_levels, 0.0);

    // Each bin is computed from its own column statistics only, so editing one
    // rollout's reward leaves every other bin's terms bit-identical.
    for (int k = 1; k <= k_levels; ++k) {
        if (stats.degenerate[static_cast<std::size_t>(k - 1)]) continue;
        const double mu = stats.bin_means[static_cast<std::size_t>(k - 1)];
        const double denom = norm == Normalization::StdDev ? std::sqrt(mu * (1.0 - mu)) : mu;
        const double gap = k >= 2 ? group.scale().spacing(k) : 1.0;
        const double scale = w[static_cast<std::size_t>(k - 1)] * gap / denom;
        for (int i = 0; i < g; ++i) {
            const double term = scale * (static_cast<double>(matrix.at(i, k)) - mu);
            out.per_bin[static_cast<std::size_t>(i) * k_levels + (k - 1)] = term;
            out.values[static_cast<std::size_t>(i)] += term;
        }
    }
    return out;
}

AdvantageVector odrpo_continuous(std::span<const double> raw_rewards, Normalization norm) {
    const int g = static_cast<int>(raw_rewards.size());
    if (g < 2) throw ValidationError("continuous advantage needs at least 2 rewards");

    std::vector<int> order(static_cast<std::size_t>(g));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return raw_rewards[static_cast<std::size_t>(a)] <
                                                raw_rewards[static_cast<std::size_t>(b)]; });

    // gain[k] = d_k (1 - mu_k) / N_k, loss[k] = d_k mu_k / N_k for the gap
    // between order statistics k and k+1 (1-based k up to G-1).
    std::vector<double> gain(static_cast<std::size_t>(g - 1), 0.0);
    std::vector<double> loss(static_cast<std::size_t>(g - 1), 0.0);
    for (int k = 1; k < g; ++k) {
        const double d = raw_rewards[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] -
                         raw_rewards[static_cast<std::size_t>(order[static_cast<std::size_t>(k - 1)])];
        if (d == 0.0) continue;
        const double mu = static_cast<double>(g - k) / g;
        const double denom = norm == Normalization::StdDev ? std::sqrt(mu * (1.0 - mu)) : mu;
        gain[static_cast<std::size_t>(k - 1)] = d * (1.0 - mu) / denom;
        loss[static_cast<std::size_t>(k - 1)] = d * mu / denom;
    }

    // A at sorted position p = sum of gains below p minus losses at/above p.
    std::vector<double> at_position(static_cast<std::size_t>(g), 0.0);
    double below = 0.0;
    std::vector<double> above(static_cast<std::size_t>(g + 1), 0.0);
    for (int k = g - 1; k >= 1; --k)
        above[static_cast<std::size_t>(k)] = above[static_cast<std::size_t>(k + 1)] +
                                             loss[static_cast<std::size_t>(k - 1)];
    for (int p = 1; p <= g; ++p) {
        at_position[static_cast<std::size_t>(p - 1)] = below - above[static_cast<std::size_t>(p)];
        if (p < g) below += gain[static_cast<std::size_t>(p - 1)];
    }

    AdvantageVector out;
    out.values.resize(static_cast<std::size_t>(g));
    for (int p = 0; p < g; ++p)
        out.values[static_cast<std::size_t>(order[static_cast<std::size_t>(p)])] =
            at_position[static_cast<std::size_t>(p)];
    return out;
}

std::vector<double> batch_normalize(std::span<const double> advantages) {
    const std::size_t n = advantages.size();
    if (n < 2) throw ValidationError("batch normalization needs at least 2 values");
    double mean = 0.0;
    for (double a : advantages) mean += a;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double a : advantages) var += (a - mean) * (a - mean);
    const double stddev = std::sqrt(var / static_cast<double>(n));
    std::vector<double> out(n, 0.0);
    if (stddev <= kEps) return out;
    for (std::size_t i = 0; i < n; ++i) out[i] = (advantages[i] - mean) / stddev;
    return out;
}

}  // namespace odrpo
