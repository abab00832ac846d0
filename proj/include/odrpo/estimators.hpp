#pragma once

#include <span>
#include <string>
#include <vector>

#include "odrpo/reward_core.hpp"
#include "odrpo/weighting.hpp"

namespace odrpo {

// Per-bin normalization: StdDev uses sigma^(k) = sqrt(mu (1 - mu)), Mean uses
// mu^(k). Degenerate bins (mu in {0, 1}) are skipped before normalization.
enum class Normalization { StdDev, Mean };

const char* to_string(Normalization norm);
Normalization normalization_from_string(const std::string& name);

struct AdvantageVector {
    std::vector<double> values;   // A_i per rollout
    std::vector<double> per_bin;  // G x K row-major weighted bin terms; empty when unbinned
    int num_levels = 0;

    // i 0-based rollout, k 1-based bin.
    double bin(int i, int k) const {
        return per_bin[static_cast<std::size_t>(i) * num_levels + (k - 1)];
    }
    bool has_per_bin() const { return !per_bin.empty(); }
};

// A_i = (r_i - mu) / sigma with population sigma; all zeros when sigma = 0.
AdvantageVector grpo_advantage(const RolloutGroup& group);

// A_i = (r_i - mu) / mu; MeanTooSmallError when |mu| <= eps.
AdvantageVector maxrl_advantage(const RolloutGroup& group);

// Ordinal decomposition: per non-degenerate bin k,
//   A_i^(k) = spacing_k * (indicator - mu^(k)) / N^(k),
// degenerate bins contribute exactly 0, and A_i = sum_k w^(k) A_i^(k).
// Bin spacing reduces to 1 on unit-spaced integer scales.
AdvantageVector odrpo_advantage(const RolloutGroup& group, Normalization norm,
                                WeightScheme weights = WeightScheme::Unit);

// Continuous extension over raw real rewards (no scale membership needed):
// with sorted order statistics, gaps d_k, tail means mu_k = (G - k) / G,
//   A_i = sum_{k < pos(i)} d_k (1 - mu_k) / N_k - sum_{k >= pos(i)} d_k mu_k / N_k.
// Zero-gap terms vanish, so the result is invariant to tie ordering.
AdvantageVector odrpo_continuous(std::span<const double> raw_rewards, Normalization norm);

// (A - mean) / max(std, eps) with population std; all zeros when std <= eps.
std::vector<double> batch_normalize(std::span<const double> advantages);

}  // namespace odrpo
