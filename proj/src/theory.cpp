#include "odrpo/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "odrpo/rng.hpp"
#include "odrpo/special_functions.hpp"

namespace odrpo {

const char* to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::Grpo: return "grpo";
        case EstimatorKind::MaxRl: return "maxrl";
        case EstimatorKind::Odrpo: return "odrpo";
    }
    return "?";
}

EstimatorKind estimator_kind_from_string(const std::string& name) {
    if (name == "grpo") return EstimatorKind::Grpo;
    if (name == "maxrl") return EstimatorKind::MaxRl;
    if (name == "odrpo") return EstimatorKind::Odrpo;
    throw ValidationError("unknown estimator '" + name + "' (use grpo|maxrl|odrpo)");
}

LeaveOneOutStats LeaveOneOutStats::unit(int num_levels, int level) {
    auto s = zeros(num_levels);
    s.counts[static_cast<std::size_t>(level) - 1] = 1;
    return s;
}

int LeaveOneOutStats::total() const {
    return std::accumulate(counts.begin(), counts.end(), 0);
}

LeaveOneOutStats LeaveOneOutStats::plus_unit(int level) const {
    LeaveOneOutStats out = *this;
    out.counts[static_cast<std::size_t>(level) - 1] += 1;
    return out;
}

EstimatorField::EstimatorField(EstimatorKind kind, RewardScale scale, int group_size,
                               Normalization norm, WeightScheme weights)
    : kind_(kind), scale_(std::move(scale)), group_size_(group_size), norm_(norm),
      weights_(weights) {
    if (group_size_ < 2) throw ValidationError("field group size must be >= 2");
}

EstimatorField EstimatorField::grpo(RewardScale scale, int group_size) {
    return {EstimatorKind::Grpo, std::move(scale), group_size, Normalization::StdDev,
            WeightScheme::Unit};
}

EstimatorField EstimatorField::maxrl(RewardScale scale, int group_size) {
    return {EstimatorKind::MaxRl, std::move(scale), group_size, Normalization::Mean,
            WeightScheme::Unit};
}

EstimatorField EstimatorField::odrpo(RewardScale scale, int group_size, Normalization norm,
                                     WeightScheme weights) {
    return {EstimatorKind::Odrpo, std::move(scale), group_size, norm, weights};
}

std::string EstimatorField::label() const {
    if (kind_ != EstimatorKind::Odrpo) return to_string(kind_);
    return std::string("odrpo-") + to_string(weights_) + "-" + to_string(norm_);
}

double EstimatorField::operator()(int level, const LeaveOneOutStats& s) const {
    if (level < 1 || level > num_levels())
        throw ValidationError("field level index out of range");
    if (s.num_levels() != num_levels())
        throw ValidationError("leave-one-out stats width does not match the scale");
    if (s.total() != group_size_ - 1)
        throw ValidationError("leave-one-out stats must total group size - 1");
    switch (kind_) {
        case EstimatorKind::Grpo: return eval_grpo_like(level, s, false);
        case EstimatorKind::MaxRl: return eval_grpo_like(level, s, true);
        case EstimatorKind::Odrpo: return eval_odrpo(level, s);
    }
    return 0.0;
}

double EstimatorField::eval_grpo_like(int level, const LeaveOneOutStats& s,
                                      bool mean_norm) const {
    const int k_levels = num_levels();
    int distinct = 0;
    double sum = 0.0;
    for (int j = 1; j <= k_levels; ++j) {
        int c = s.counts[static_cast<std::size_t>(j - 1)] + (j == level ? 1 : 0);
        if (c > 0) ++distinct;
        sum += c * scale_.level(j);
    }
    const double mean = sum / group_size_;
    if (mean_norm && std::abs(mean) <= kEps)
        throw MeanTooSmallError("group mean too small for mean normalization");
    if (distinct == 1) return 0.0;  // zero-variance group; R_level equals the mean
    if (mean_norm) return (scale_.level(level) - mean) / mean;
    double var = 0.0;
    for (int j = 1; j <= k_levels; ++j) {
        const int c = s.counts[static_cast<std::size_t>(j - 1)] + (j == level ? 1 : 0);
        const double d = scale_.level(j) - mean;
        var += c * d * d;
    }
    var /= group_size_;
    return (scale_.level(level) - mean) / std::sqrt(var);
}

namespace {

// Lower median level of the reconstructed multiset counts (total M members).
int median_level_of_counts(const std::vector<int>& counts, int total) {
    const int target = (total - 1) / 2 + 1;  // 1-based position of the lower median
    int seen = 0;
    for (std::size_t j = 0; j < counts.size(); ++j) {
        seen += counts[j];
        if (seen >= target) return static_cast<int>(j) + 1;
    }
    return static_cast<int>(counts.size());
}

}  // namespace

double EstimatorField::eval_odrpo(int level, const LeaveOneOutStats& s) const {
    const int k_levels = num_levels();
    const int m = group_size_;

    // Suffix counts of the other rollouts: tail[j] = #others with reward >= R_j.
    std::vector<int> tail(static_cast<std::size_t>(k_levels) + 2, 0);
    for (int j = k_levels; j >= 1; --j)
        tail[static_cast<std::size_t>(j)] =
            tail[static_cast<std::size_t>(j) + 1] + s.counts[static_cast<std::size_t>(j - 1)];

    int median_bin = 0;
    if (weights_ == WeightScheme::GiniMedian) {
        std::vector<int> full = s.counts;
        full[static_cast<std::size_t>(level - 1)] += 1;
        median_bin = median_level_of_counts(full, m);
    }

    double total = 0.0;
    for (int bin = 2; bin <= k_levels; ++bin) {
        const int c = tail[static_cast<std::size_t>(bin)];
        const bool success = bin <= level;
        const int full_count = c + (success ? 1 : 0);
        if (full_count == 0 || full_count == m) continue;  // degenerate bin

        double term;
        if (norm_ == Normalization::StdDev) {
            term = success ? std::sqrt(static_cast<double>(m - c - 1) / (c + 1))
                           : -std::sqrt(static_cast<double>(c) / (m - c));
        } else {
            term = success ? static_cast<double>(m - c - 1) / (c + 1) : -1.0;
        }

        double w = 1.0;
        if (weights_ != WeightScheme::Unit) {
            const double mu = static_cast<double>(full_count) / m;
            w = 0.1 + 4.0 * mu * (1.0 - mu) *
                          (weights_ == WeightScheme::GiniMedian
                               ? std::exp(-std::max(static_cast<double>(median_bin - bin), 0.0) / 2.0)
                               : 1.0);
            w *= std::sqrt(static_cast<double>(bin));
        }
        total += w * scale_.spacing(bin) * term;
    }
    return total;
}

double curl_residual(const EstimatorField& field, int i, int j, const LeaveOneOutStats& s) {
    const int k_top = field.num_levels();
    if (i < 1 || i > k_top || j < 1 || j > k_top)
        throw ValidationError("curl residual level indices out of range");
    if (s.total() != field.group_size() - 2)
        throw ValidationError("curl residual stats must total group size - 2");
    const auto si = s.plus_unit(i);
    const auto sj = s.plus_unit(j);
    const auto sk = s.plus_unit(k_top);
    return field(i, sj) - field(i, sk) + field(j, sk) - field(j, si) + field(k_top, si) -
           field(k_top, sj);
}

long long composition_count(int n, int parts) {
    if (n < 0 || parts < 1) throw ValidationError("composition_count needs n >= 0, parts >= 1");
    const double lg = log_choose(n + parts - 1, parts - 1);
    if (lg > 62.0 * 0.6931471805599453) return std::numeric_limits<long long>::max();
    return static_cast<long long>(std::llround(std::exp(lg)));
}

void for_each_composition(int n, int parts,
                          const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> s(static_cast<std::size_t>(parts), 0);
    // Lexicographic recursion over the first parts-1 cells; the last absorbs the rest.
    const std::function<void(int, int)> rec = [&](int idx, int remaining) {
        if (idx == parts - 1) {
            s[static_cast<std::size_t>(idx)] = remaining;
            fn(s);
            return;
        }
        for (int v = 0; v <= remaining; ++v) {
            s[static_cast<std::size_t>(idx)] = v;
            rec(idx + 1, remaining - v);
        }
    };
    rec(0, n);
}

namespace {

struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

}  // namespace

CurlReport mac_scan_cell(const EstimatorField& field, int threads) {
    const int k_levels = field.num_levels();
    const int m = field.group_size();
    const long long cells = composition_count(m - 2, k_levels);
    if (cells > 10000000LL / (static_cast<long long>(k_levels) * k_levels))
        throw TooLargeError("curl scan enumeration exceeds the size guard");

    std::vector<std::vector<int>> all;
    all.reserve(static_cast<std::size_t>(cells));
    for_each_composition(m - 2, k_levels, [&](const std::vector<int>& s) { all.push_back(s); });

    std::vector<double> cell_sum(all.size(), 0.0);
    std::vector<double> cell_max(all.size(), 0.0);

    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t idx = begin; idx < end; ++idx) {
            const LeaveOneOutStats s(all[idx]);
            KahanSum acc;
            double mx = 0.0;
            for (int i = 1; i < k_levels; ++i) {
                for (int j = i + 1; j < k_levels; ++j) {
                    const double r = std::abs(curl_residual(field, i, j, s));
                    acc.add(r);
                    mx = std::max(mx, r);
                }
            }
            cell_sum[idx] = acc.sum;
            cell_max[idx] = mx;
        }
    };

    const int nthreads = std::max(1, std::min<int>(threads, static_cast<int>(all.size())));
    if (nthreads == 1) {
        work(0, all.size());
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (all.size() + nthreads - 1) / nthreads;
        for (int t = 0; t < nthreads; ++t) {
            const std::size_t begin = static_cast<std::size_t>(t) * chunk;
            const std::size_t end = std::min(all.size(), begin + chunk);
            if (begin < end) pool.emplace_back(work, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    // Sequential reduce over per-cell results keeps the total independent of
    // the thread count.
    KahanSum total;
    double max_abs = 0.0;
    for (std::size_t idx = 0; idx < all.size(); ++idx) {
        total.add(cell_sum[idx]);
        max_abs = std::max(max_abs, cell_max[idx]);
    }
    const long long pairs = static_cast<long long>(k_levels - 1) * (k_levels - 2) / 2;
    const long long count = pairs * static_cast<long long>(all.size());

    CurlReport report;
    report.estimator = field.label();
    report.num_levels = k_levels;
    report.group_size = m;
    report.mac = count > 0 ? total.sum / static_cast<double>(count) : 0.0;
    report.max_abs = max_abs;
    report.residual_count = count;
    return report;
}

std::vector<CurlReport> mac_scan(const MacScanSpec& spec, int threads) {
    if (spec.k_min < 2 || spec.m_min < 2 || spec.k_max < spec.k_min || spec.m_max < spec.m_min)
        throw ValidationError("curl scan needs 2 <= k_min <= k_max and 2 <= m_min <= m_max");
    const auto build = spec.scale_builder ? spec.scale_builder
                                          : [](int k) { return RewardScale::integers(k); };
    std::vector<CurlReport> out;
    for (int k = spec.k_min; k <= spec.k_max; ++k) {
        const RewardScale scale = build(k);
        for (int m = spec.m_min; m <= spec.m_max; ++m) {
            EstimatorField field = [&] {
                switch (spec.kind) {
                    case EstimatorKind::Grpo: return EstimatorField::grpo(scale, m);
                    case EstimatorKind::MaxRl: return EstimatorField::maxrl(scale, m);
                    default:
                        return EstimatorField::odrpo(scale, m, spec.norm, spec.weights);
                }
            }();
            out.push_back(mac_scan_cell(field, threads));
        }
    }
    return out;
}

SimplexPoint::SimplexPoint(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw ValidationError("simplex point needs at least one probability");
    double sum = 0.0;
    for (double& p : probs_) {
        if (!(p > -1e-12)) throw ValidationError("simplex probabilities must be non-negative");
        if (p < 0.0) p = 0.0;
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ValidationError("simplex probabilities must sum to 1");
    for (double& p : probs_) p /= sum;
    tails_.resize(probs_.size());
    double tail = 0.0;
    for (std::size_t m = probs_.size(); m-- > 0;) {
        tail += probs_[m];
        tails_[m] = tail;
    }
}

SimplexPoint SimplexPoint::vertex(int num_levels, int level) {
    std::vector<double> p(static_cast<std::size_t>(num_levels), 0.0);
    p[static_cast<std::size_t>(level) - 1] = 1.0;
    return SimplexPoint(std::move(p));
}

SimplexPoint SimplexPoint::uniform(int num_levels) {
    return SimplexPoint(std::vector<double>(static_cast<std::size_t>(num_levels),
                                            1.0 / num_levels));
}

double multinomial_pmf(const LeaveOneOutStats& s, int n, const SimplexPoint& p) {
    if (s.num_levels() != p.size())
        throw ValidationError("count vector width does not match the simplex point");
    if (s.total() != n) throw ValidationError("count vector must total n");
    double log_pmf = std::lgamma(n + 1.0);
    for (int k = 1; k <= p.size(); ++k) {
        const int c = s.counts[static_cast<std::size_t>(k - 1)];
        if (c == 0) continue;
        const double pk = p.prob(k);
        if (pk == 0.0) return 0.0;
        log_pmf += c * std::log(pk) - std::lgamma(c + 1.0);
    }
    return std::exp(log_pmf);
}

BetaAlpha beta_alpha(double tail_prob, int group_size) {
    if (!(tail_prob >= 0.0 && tail_prob <= 1.0))
        throw ValidationError("tail probability must be in [0, 1]");
    if (group_size < 2) throw ValidationError("group size must be >= 2");
    const int n = group_size - 1;

    auto t_term = [&](int c) {
        return std::sqrt(static_cast<double>(group_size - c - 1) / (c + 1));
    };
    auto u_term = [&](int c) {
        return -std::sqrt(static_cast<double>(c) / (group_size - c));
    };

    BetaAlpha out;
    if (tail_prob == 0.0) {
        out.beta = t_term(0);
        out.alpha = u_term(0);
        return out;
    }
    if (tail_prob == 1.0) {
        out.beta = t_term(n);
        out.alpha = u_term(n);
        return out;
    }
    const double lp = std::log(tail_prob);
    const double lq = std::log1p(-tail_prob);
    for (int x = 0; x <= n; ++x) {
        const double pmf = std::exp(log_choose(n, x) + x * lp + (n - x) * lq);
        out.beta += pmf * t_term(x);
        out.alpha += pmf * u_term(x);
    }
    return out;
}

double arcsin_objective(const SimplexPoint& p, const RewardScale& scale) {
    if (p.size() != scale.size())
        throw ValidationError("simplex point width does not match the scale");
    double sum = 0.0;
    for (int m = 2; m <= scale.size(); ++m) {
        const double tail = std::clamp(p.tail(m), 0.0, 1.0);
        sum += scale.spacing(m) * std::asin(std::sqrt(tail));
    }
    return 2.0 / M_PI * sum;
}

double arcsin_gradient(double tail_prob) {
    return 1.0 / (M_PI * std::sqrt(tail_prob * (1.0 - tail_prob)));
}

ObjectiveField objective_update_field(const SimplexPoint& p, const RewardScale& scale,
                                      int group_size) {
    if (p.size() != scale.size())
        throw ValidationError("simplex point width does not match the scale");
    const int k_levels = scale.size();

    std::vector<double> beta_minus_alpha(static_cast<std::size_t>(k_levels) + 1, 0.0);
    double c_alpha = 0.0;
    for (int m = 2; m <= k_levels; ++m) {
        const auto ba = beta_alpha(p.tail(m), group_size);
        beta_minus_alpha[static_cast<std::size_t>(m)] = scale.spacing(m) * (ba.beta - ba.alpha);
        c_alpha += scale.spacing(m) * ba.alpha;
    }

    ObjectiveField out;
    out.alpha_constant = c_alpha;
    out.dh_dp.resize(static_cast<std::size_t>(k_levels));
    double partial = 0.0;
    for (int k = 1; k <= k_levels; ++k) {
        if (k >= 2) partial += beta_minus_alpha[static_cast<std::size_t>(k)];
        out.dh_dp[static_cast<std::size_t>(k - 1)] = partial + c_alpha;
    }
    return out;
}

std::vector<double> expected_field(const EstimatorField& field, const SimplexPoint& p) {
    if (p.size() != field.num_levels())
        throw ValidationError("simplex point width does not match the field");
    const int n = field.group_size() - 1;
    if (composition_count(n, field.num_levels()) > 1000000LL)
        throw TooLargeError("expected field enumeration exceeds the size guard");

    std::vector<KahanSum> acc(static_cast<std::size_t>(field.num_levels()));
    for_each_composition(n, field.num_levels(), [&](const std::vector<int>& counts) {
        const LeaveOneOutStats s(counts);
        const double pmf = multinomial_pmf(s, n, p);
        if (pmf == 0.0) return;
        for (int k = 1; k <= field.num_levels(); ++k)
            acc[static_cast<std::size_t>(k - 1)].add(field(k, s) * pmf);
    });

    std::vector<double> out(static_cast<std::size_t>(field.num_levels()));
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = acc[k].sum;
    return out;
}

SampledFieldEstimate sampled_update_expectation(const EstimatorField& field,
                                                const SimplexPoint& p, long long trials,
                                                std::uint64_t seed) {
    if (trials < 1) throw ValidationError("sampled expectation needs trials >= 1");
    if (p.size() != field.num_levels())
        throw ValidationError("simplex point width does not match the field");
    const int k_levels = field.num_levels();
    const int m = field.group_size();

    // Ratio estimator over per-trial clusters: value_k = sum_t S_tk / sum_t n_tk
    // with S_tk the trial's advantage sum at level k and n_tk its rollout count.
    std::vector<double> sum_s(static_cast<std::size_t>(k_levels), 0.0);
    std::vector<double> sum_n(static_cast<std::size_t>(k_levels), 0.0);
    std::vector<double> sum_ss(static_cast<std::size_t>(k_levels), 0.0);
    std::vector<double> sum_sn(static_cast<std::size_t>(k_levels), 0.0);
    std::vector<double> sum_nn(static_cast<std::size_t>(k_levels), 0.0);

    std::vector<int> levels(static_cast<std::size_t>(m));
    std::vector<int> counts(static_cast<std::size_t>(k_levels));
    std::vector<double> trial_s(static_cast<std::size_t>(k_levels));
    std::vector<int> trial_n(static_cast<std::size_t>(k_levels));

    for (long long t = 0; t < trials; ++t) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        std::fill(counts.begin(), counts.end(), 0);
        for (int i = 0; i < m; ++i) {
            const int level = static_cast<int>(rng.categorical(p.probs())) + 1;
            levels[static_cast<std::size_t>(i)] = level;
            counts[static_cast<std::size_t>(level - 1)] += 1;
        }
        std::fill(trial_s.begin(), trial_s.end(), 0.0);
        std::fill(trial_n.begin(), trial_n.end(), 0);
        for (int i = 0; i < m; ++i) {
            const int level = levels[static_cast<std::size_t>(i)];
            LeaveOneOutStats s(counts);
            s.counts[static_cast<std::size_t>(level - 1)] -= 1;
            trial_s[static_cast<std::size_t>(level - 1)] += field(level, s);
            trial_n[static_cast<std::size_t>(level - 1)] += 1;
        }
        for (int k = 0; k < k_levels; ++k) {
            const double sv = trial_s[static_cast<std::size_t>(k)];
            const double nv = trial_n[static_cast<std::size_t>(k)];
            sum_s[static_cast<std::size_t>(k)] += sv;
            sum_n[static_cast<std::size_t>(k)] += nv;
            sum_ss[static_cast<std::size_t>(k)] += sv * sv;
            sum_sn[static_cast<std::size_t>(k)] += sv * nv;
            sum_nn[static_cast<std::size_t>(k)] += nv * nv;
        }
    }

    SampledFieldEstimate out;
    out.trials = trials;
    out.values.assign(static_cast<std::size_t>(k_levels), 0.0);
    out.std_errors.assign(static_cast<std::size_t>(k_levels),
                          std::numeric_limits<double>::infinity());
    for (int k = 0; k < k_levels; ++k) {
        const std::size_t idx = static_cast<std::size_t>(k);
        if (sum_n[idx] <= 0.0) continue;  // level never sampled
        const double value = sum_s[idx] / sum_n[idx];
        // Delta-method variance of the ratio: sum_t (S_tk - value * n_tk)^2.
        const double resid =
            sum_ss[idx] - 2.0 * value * sum_sn[idx] + value * value * sum_nn[idx];
        out.values[idx] = value;
        out.std_errors[idx] = std::sqrt(std::max(resid, 0.0)) / sum_n[idx];
    }
    return out;
}

}  // namespace odrpo
