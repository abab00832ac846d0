#include "odrpo/reward_core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace odrpo {

RewardScale::RewardScale(std::vector<double> levels) : levels_(std::move(levels)) {
    if (levels_.empty()) throw ValidationError("reward scale must have at least one level");
    for (std::size_t m = 1; m < levels_.size(); ++m) {
        if (!(levels_[m] > levels_[m - 1]))
            throw ValidationError("reward scale levels must be strictly increasing");
    }
    for (double v : levels_) {
        if (!std::isfinite(v)) throw ValidationError("reward scale levels must be finite");
    }
}

RewardScale RewardScale::integers(int k) {
    if (k < 1) throw ValidationError("scale size must be >= 1");
    std::vector<double> levels(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) levels[static_cast<std::size_t>(i)] = i + 1;
    return RewardScale(std::move(levels));
}

int RewardScale::index_of(double value) const {
    auto it = std::lower_bound(levels_.begin(), levels_.end(), value);
    // Check the two neighbors of the insertion point with a small tolerance
    // so parsed text like "2" matches the stored 2.0 exactly and near-exact
    // decimal levels still resolve.
    for (auto cand : {it, it == levels_.begin() ? it : std::prev(it)}) {
        if (cand == levels_.end()) continue;
        const double tol = 1e-9 * std::max(1.0, std::abs(*cand));
        if (std::abs(*cand - value) <= tol)
            return static_cast<int>(cand - levels_.begin()) + 1;
    }
    std::ostringstream msg;
    msg << "reward value " << value << " is not a level of the scale";
    throw ValidationError(msg.str());
}

RolloutGroup::RolloutGroup(RewardScale scale, const std::vector<double>& rewards)
    : scale_(std::move(scale)) {
    if (rewards.size() < 2) throw ValidationError("rollout group needs at least 2 rewards");
    level_indices_.reserve(rewards.size());
    for (double r : rewards) level_indices_.push_back(scale_.index_of(r));
}

RolloutGroup::RolloutGroup(RewardScale scale, std::vector<int> indices, bool)
    : scale_(std::move(scale)), level_indices_(std::move(indices)) {}

RolloutGroup RolloutGroup::from_level_indices(RewardScale scale, std::vector<int> indices) {
    if (indices.size() < 2) throw ValidationError("rollout group needs at least 2 rewards");
    for (int idx : indices) {
        if (idx < 1 || idx > scale.size())
            throw ValidationError("level index out of range for the scale");
    }
    return RolloutGroup(std::move(scale), std::move(indices), true);
}

std::vector<double> RolloutGroup::rewards() const {
    std::vector<double> out;
    out.reserve(level_indices_.size());
    for (int idx : level_indices_) out.push_back(scale_.level(idx));
    return out;
}

OrdinalIndicatorMatrix decompose(const RolloutGroup& group) {
    OrdinalIndicatorMatrix m;
    m.group_size = group.size();
    m.num_levels = group.scale().size();
    m.entries.assign(static_cast<std::size_t>(m.group_size) * m.num_levels, 0);
    for (int i = 0; i < m.group_size; ++i) {
        const int li = group.level_index(i);
        for (int k = 1; k <= li; ++k)
            m.entries[static_cast<std::size_t>(i) * m.num_levels + (k - 1)] = 1;
    }
    return m;
}

BinStats bin_stats(const OrdinalIndicatorMatrix& matrix) {
    BinStats s;
    s.group_size = matrix.group_size;
    s.bin_means.resize(static_cast<std::size_t>(matrix.num_levels));
    s.bin_sizes.resize(static_cast<std::size_t>(matrix.num_levels));
    s.degenerate.resize(static_cast<std::size_t>(matrix.num_levels));
    for (int k = 1; k <= matrix.num_levels; ++k) {
        int count = 0;
        for (int i = 0; i < matrix.group_size; ++i) count += matrix.at(i, k);
        s.bin_sizes[static_cast<std::size_t>(k - 1)] = count;
        s.bin_means[static_cast<std::size_t>(k - 1)] =
            static_cast<double>(count) / matrix.group_size;
        s.degenerate[static_cast<std::size_t>(k - 1)] =
            (count == 0 || count == matrix.group_size) ? 1 : 0;
    }
    return s;
}

GroupMoments group_moments(const RolloutGroup& group) {
    const int g = group.size();
    double sum = 0.0;
    for (int i = 0; i < g; ++i) sum += group.reward(i);
    const double mean = sum / g;
    double sq = 0.0;
    for (int i = 0; i < g; ++i) {
        const double d = group.reward(i) - mean;
        sq += d * d;
    }
    return {mean, std::sqrt(sq / g)};
}

}  // namespace odrpo
