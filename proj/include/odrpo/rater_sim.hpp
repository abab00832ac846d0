#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "odrpo/errors.hpp"
#include "odrpo/rng.hpp"

namespace odrpo {

// Default noise parameters shared by the CLI and trainer judges.
inline constexpr double kDefaultNoiseWidth = 1.0;
inline constexpr double kDefaultOutlierRate = 0.1;

// Synthetic stochastic judge: a discretized logistic around each response's
// latent quality, mixed with uniform outliers at rate outlier_rate. With both
// noise knobs at zero the judge is deterministic (always round(q_i)).
struct JudgeModel {
    int num_levels = 10;
    std::vector<double> latent_qualities;  // q_i in [1, num_levels]
    double noise_width = 0.0;
    double outlier_rate = 0.0;

    int sample_score(int response, Rng& rng) const;
    int sample_score_for_quality(double quality, Rng& rng) const;
};

// M responses x N rater calls, scores in 1..K.
struct ScoreMatrix {
    int num_responses = 0;
    int num_calls = 0;
    std::vector<int> scores;  // row-major

    int at(int response, int call) const {
        return scores[static_cast<std::size_t>(response) * num_calls + call];
    }
};

ScoreMatrix sample_scores(const JudgeModel& judge, int num_responses, int num_calls,
                          std::uint64_t seed);

struct ConcordanceReport {
    double w = 0.0;
    double chi2 = 0.0;
    int dof = 0;
    double p_value = 0.0;
    double tie_correction = 0.0;  // sum over raters of (t^3 - t) tie terms
};

// Tie-corrected Kendall's W with mid-ranks:
//   W = 12 S / (N^2 (M^3 - M) - N sum_j T_j), chi2 = N (M - 1) W, dof = M - 1.
// DegenerateMatrixError when every rater scored all responses equally.
ConcordanceReport kendalls_w(const ScoreMatrix& matrix);

struct RowStats {
    double mean = 0.0;
    double stddev = 0.0;
    double skewness = 0.0;         // NaN when the row has zero variance
    double excess_kurtosis = 0.0;  // NaN when the row has zero variance
};

// Population moments per response row: skewness m3 / m2^1.5 and excess
// kurtosis m4 / m2^2 - 3.
std::vector<RowStats> row_stats(const ScoreMatrix& matrix);

enum class TieBreak { Smallest, Largest, MedianOfTied, Random };

// Most frequent score; ties resolved to the smallest tied value by default.
// TieBreak::Random needs an rng and draws uniformly among the tied values.
int mode_vote(std::span<const int> scores, TieBreak tie_break = TieBreak::Smallest,
              Rng* rng = nullptr);

// Fraction of (rater pair, response pair) combinations ordered strictly
// oppositely by the two raters.
double rank_flip_rate(const ScoreMatrix& matrix);

}  // namespace odrpo
