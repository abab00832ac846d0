#include "odrpo/rater_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "odrpo/special_functions.hpp"

namespace odrpo {

int JudgeModel::sample_score_for_quality(double quality, Rng& rng) const {
    if (outlier_rate > 0.0 && rng.uniform() < outlier_rate)
        return rng.uniform_int(1, num_levels);
    double x = quality;
    if (noise_width > 0.0) {
        double u = rng.uniform();
        u = std::min(std::max(u, 1e-15), 1.0 - 1e-15);
        x += noise_width * std::log(u / (1.0 - u));  // logistic noise
    }
    const long long rounded = std::llround(x);
    return static_cast<int>(std::clamp<long long>(rounded, 1, num_levels));
}

int JudgeModel::sample_score(int response, Rng& rng) const {
    return sample_score_for_quality(latent_qualities[static_cast<std::size_t>(response)], rng);
}

ScoreMatrix sample_scores(const JudgeModel& judge, int num_responses, int num_calls,
                          std::uint64_t seed) {
    if (num_responses < 2 || num_calls < 1)
        throw ValidationError("score matrix needs >= 2 responses and >= 1 call");
    if (static_cast<int>(judge.latent_qualities.size()) < num_responses)
        throw ValidationError("judge has fewer latent qualities than responses");
    ScoreMatrix m;
    m.num_responses = num_responses;
    m.num_calls = num_calls;
    m.scores.resize(static_cast<std::size_t>(num_responses) * num_calls);
    Rng rng(seed);
    for (int i = 0; i < num_responses; ++i)
        for (int j = 0; j < num_calls; ++j)
            m.scores[static_cast<std::size_t>(i) * num_calls + j] = judge.sample_score(i, rng);
    return m;
}

namespace {

// Mid-ranks of one rater's scores over the M responses; accumulates the
// rater's (t^3 - t) tie term.
void column_midranks(const ScoreMatrix& m, int call, std::vector<double>& ranks,
                     double& tie_term) {
    const int n = m.num_responses;
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return m.at(a, call) < m.at(b, call); });
    int i = 0;
    while (i < n) {
        int j = i;
        while (j + 1 < n && m.at(order[static_cast<std::size_t>(j + 1)], call) ==
                                m.at(order[static_cast<std::size_t>(i)], call))
            ++j;
        const double shared = (i + j) / 2.0 + 1.0;
        for (int t = i; t <= j; ++t)
            ranks[static_cast<std::size_t>(order[static_cast<std::size_t>(t)])] = shared;
        const double run = j - i + 1;
        tie_term += run * run * run - run;
        i = j + 1;
    }
}

}  // namespace

ConcordanceReport kendalls_w(const ScoreMatrix& matrix) {
    const int m = matrix.num_responses;
    const int n = matrix.num_calls;
    if (m < 2 || n < 2)
        throw ValidationError("concordance needs >= 2 responses and >= 2 calls");

    std::vector<double> rank_sums(static_cast<std::size_t>(m), 0.0);
    std::vector<double> ranks(static_cast<std::size_t>(m));
    double tie_correction = 0.0;
    for (int j = 0; j < n; ++j) {
        double tie_term = 0.0;
        column_midranks(matrix, j, ranks, tie_term);
        tie_correction += tie_term;
        for (int i = 0; i < m; ++i) rank_sums[static_cast<std::size_t>(i)] += ranks[static_cast<std::size_t>(i)];
    }

    const double mean_rank_sum = n * (m + 1) / 2.0;
    double s = 0.0;
    for (double r : rank_sums) s += (r - mean_rank_sum) * (r - mean_rank_sum);

    const double denominator =
        static_cast<double>(n) * n * (static_cast<double>(m) * m * m - m) - n * tie_correction;
    if (denominator <= 0.0)
        throw DegenerateMatrixError("every rater scored all responses equally; W undefined");

    ConcordanceReport report;
    report.w = 12.0 * s / denominator;
    report.chi2 = n * (m - 1) * report.w;
    report.dof = m - 1;
    report.p_value = chi_square_upper_tail(report.chi2, report.dof);
    report.tie_correction = tie_correction;
    return report;
}

std::vector<RowStats> row_stats(const ScoreMatrix& matrix) {
    const int n = matrix.num_calls;
    if (n < 2) throw ValidationError("row statistics need >= 2 calls");
    std::vector<RowStats> out(static_cast<std::size_t>(matrix.num_responses));
    for (int i = 0; i < matrix.num_responses; ++i) {
        double mean = 0.0;
        for (int j = 0; j < n; ++j) mean += matrix.at(i, j);
        mean /= n;
        double m2 = 0.0, m3 = 0.0, m4 = 0.0;
        for (int j = 0; j < n; ++j) {
            const double d = matrix.at(i, j) - mean;
            m2 += d * d;
            m3 += d * d * d;
            m4 += d * d * d * d;
        }
        m2 /= n;
        m3 /= n;
        m4 /= n;
        RowStats& r = out[static_cast<std::size_t>(i)];
        r.mean = mean;
        r.stddev = std::sqrt(m2);
        if (m2 == 0.0) {
            r.skewness = std::numeric_limits<double>::quiet_NaN();
            r.excess_kurtosis = std::numeric_limits<double>::quiet_NaN();
        } else {
            r.skewness = m3 / std::pow(m2, 1.5);
            r.excess_kurtosis = m4 / (m2 * m2) - 3.0;
        }
    }
    return out;
}

int mode_vote(std::span<const int> scores, TieBreak tie_break, Rng* rng) {
    if (scores.empty()) throw ValidationError("mode vote needs at least one score");
    if (tie_break == TieBreak::Random && rng == nullptr)
        throw ValidationError("random tie-break needs an rng");
    std::vector<int> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end());

    std::vector<int> tied;  // values sharing the max frequency, ascending
    int best_count = 0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        const int count = static_cast<int>(j - i + 1);
        if (count > best_count) {
            best_count = count;
            tied.clear();
        }
        if (count == best_count) tied.push_back(sorted[i]);
        i = j + 1;
    }

    switch (tie_break) {
        case TieBreak::Smallest: return tied.front();
        case TieBreak::Largest: return tied.back();
        case TieBreak::MedianOfTied: return tied[(tied.size() - 1) / 2];
        case TieBreak::Random:
            return tied[static_cast<std::size_t>(
                rng->uniform_int(0, static_cast<int>(tied.size()) - 1))];
    }
    return tied.front();
}

double rank_flip_rate(const ScoreMatrix& matrix) {
    const int m = matrix.num_responses;
    const int n = matrix.num_calls;
    if (m < 2 || n < 2) throw ValidationError("flip rate needs >= 2 responses and >= 2 calls");
    long long flips = 0;
    long long total = 0;
    for (int j1 = 0; j1 < n; ++j1) {
        for (int j2 = j1 + 1; j2 < n; ++j2) {
            for (int i1 = 0; i1 < m; ++i1) {
                for (int i2 = i1 + 1; i2 < m; ++i2) {
                    const int d1 = matrix.at(i1, j1) - matrix.at(i2, j1);
                    const int d2 = matrix.at(i1, j2) - matrix.at(i2, j2);
                    ++total;
                    if ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) ++flips;
                }
            }
        }
    }
    return static_cast<double>(flips) / static_cast<double>(total);
}

}  // namespace odrpo
