#pragma once

#include <vector>

#include "odrpo/errors.hpp"

namespace odrpo {

// Ordered discrete reward space R_1 < R_2 < ... < R_K.
class RewardScale {
  public:
    explicit RewardScale(std::vector<double> levels);

    // The scale {1, 2, ..., k}.
    static RewardScale integers(int k);

    int size() const { return static_cast<int>(levels_.size()); }
    // 1-based level access.
    double level(int k) const { return levels_[static_cast<std::size_t>(k) - 1]; }
    // Spacing R_m - R_{m-1}, defined for m in 2..K.
    double spacing(int m) const { return level(m) - level(m - 1); }
    // 1-based index of a reward value; ValidationError when off-scale.
    int index_of(double value) const;
    const std::vector<double>& levels() const { return levels_; }

    bool operator==(const RewardScale&) const = default;

  private:
    std::vector<double> levels_;
};

// One group of G sampled rollout rewards, stored as level indices so the
// same group feeds both the binned path and the continuous path.
class RolloutGroup {
  public:
    RolloutGroup(RewardScale scale, const std::vector<double>& rewards);
    static RolloutGroup from_level_indices(RewardScale scale, std::vector<int> indices);

    int size() const { return static_cast<int>(level_indices_.size()); }
    // 1-based level index of rollout i (i is 0-based).
    int level_index(int i) const { return level_indices_[static_cast<std::size_t>(i)]; }
    double reward(int i) const { return scale_.level(level_index(i)); }
    std::vector<double> rewards() const;
    const RewardScale& scale() const { return scale_; }
    const std::vector<int>& level_indices() const { return level_indices_; }

  private:
    RolloutGroup(RewardScale scale, std::vector<int> indices, bool checked);

    RewardScale scale_;
    std::vector<int> level_indices_;
};

// G x K binary matrix, entry (i, k) = 1 iff r_i >= R_k. Rows are monotone
// non-increasing in k and row sums equal the rollout's level index.
struct OrdinalIndicatorMatrix {
    int group_size = 0;   // G rows
    int num_levels = 0;   // K columns
    std::vector<unsigned char> entries;  // row-major

    // i 0-based rollout, k 1-based level.
    unsigned char at(int i, int k) const {
        return entries[static_cast<std::size_t>(i) * num_levels + (k - 1)];
    }
};

struct BinStats {
    std::vector<double> bin_means;         // mu^(k), column means
    std::vector<int> bin_sizes;            // successes per bin
    std::vector<unsigned char> degenerate; // mu^(k) in {0, 1}
    int group_size = 0;

    int num_levels() const { return static_cast<int>(bin_means.size()); }
};

struct GroupMoments {
    double mean = 0.0;
    double stddev = 0.0;  // population convention (divide by G)
};

OrdinalIndicatorMatrix decompose(const RolloutGroup& group);
BinStats bin_stats(const OrdinalIndicatorMatrix& matrix);
GroupMoments group_moments(const RolloutGroup& group);

}  // namespace odrpo
