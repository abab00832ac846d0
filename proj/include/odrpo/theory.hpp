#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "odrpo/estimators.hpp"
#include "odrpo/reward_core.hpp"
#include "odrpo/weighting.hpp"

namespace odrpo {

enum class EstimatorKind { Grpo, MaxRl, Odrpo };

const char* to_string(EstimatorKind kind);
EstimatorKind estimator_kind_from_string(const std::string& name);

// Count vector over reward levels for the "other" rollouts of a group:
// total M-1 when evaluating an advantage function, M-2 inside curl residuals.
struct LeaveOneOutStats {
    std::vector<int> counts;

    LeaveOneOutStats() = default;
    explicit LeaveOneOutStats(std::vector<int> c) : counts(std::move(c)) {}
    static LeaveOneOutStats zeros(int num_levels) {
        return LeaveOneOutStats(std::vector<int>(static_cast<std::size_t>(num_levels), 0));
    }
    static LeaveOneOutStats unit(int num_levels, int level);  // e_level

    int total() const;
    int num_levels() const { return static_cast<int>(counts.size()); }
    LeaveOneOutStats plus_unit(int level) const;  // s + e_level
};

// The per-level advantage function f_k(s): the advantage a rollout holding
// reward R_k receives given the leave-one-out counts of its group.
class EstimatorField {
  public:
    static EstimatorField grpo(RewardScale scale, int group_size);
    static EstimatorField maxrl(RewardScale scale, int group_size);
    static EstimatorField odrpo(RewardScale scale, int group_size, Normalization norm,
                                WeightScheme weights);

    // level is 1-based; s must total group_size - 1.
    double operator()(int level, const LeaveOneOutStats& s) const;

    EstimatorKind kind() const { return kind_; }
    const RewardScale& scale() const { return scale_; }
    int num_levels() const { return scale_.size(); }
    int group_size() const { return group_size_; }
    Normalization norm() const { return norm_; }
    WeightScheme weights() const { return weights_; }
    // Row label for CSV output, e.g. "grpo" or "odrpo-gini-stddev".
    std::string label() const;

  private:
    EstimatorField(EstimatorKind kind, RewardScale scale, int group_size, Normalization norm,
                   WeightScheme weights);

    double eval_grpo_like(int level, const LeaveOneOutStats& s, bool mean_norm) const;
    double eval_odrpo(int level, const LeaveOneOutStats& s) const;

    EstimatorKind kind_;
    RewardScale scale_;
    int group_size_;
    Normalization norm_;
    WeightScheme weights_;
};

// Mixed-partial symmetry defect of the update field:
//   f_i(s+e_j) - f_i(s+e_K) + f_j(s+e_K) - f_j(s+e_i) + f_K(s+e_i) - f_K(s+e_j).
// Zero everywhere iff the field is the gradient of a scalar objective.
double curl_residual(const EstimatorField& field, int i, int j, const LeaveOneOutStats& s);

struct CurlReport {
    std::string estimator;
    int num_levels = 0;  // K
    int group_size = 0;  // M
    double mac = 0.0;      // mean |residual| over all s and independent pairs
    double max_abs = 0.0;
    long long residual_count = 0;
};

// All residuals of one field over s in S_{M-2} and pairs i < j < K (pairs
// involving the top level telescope to zero identically). Guard:
// |S_{M-2}| * K^2 <= 10^7, else TooLargeError.
CurlReport mac_scan_cell(const EstimatorField& field, int threads = 1);

struct MacScanSpec {
    EstimatorKind kind = EstimatorKind::Grpo;
    Normalization norm = Normalization::StdDev;  // odrpo only
    WeightScheme weights = WeightScheme::Unit;   // odrpo only
    int k_min = 2, k_max = 5;
    int m_min = 2, m_max = 6;
    std::function<RewardScale(int)> scale_builder;  // defaults to RewardScale::integers
};

std::vector<CurlReport> mac_scan(const MacScanSpec& spec, int threads = 1);

// Probability vector on the K-simplex with cached tail sums
// P_m = sum_{j >= m} p_j.
class SimplexPoint {
  public:
    explicit SimplexPoint(std::vector<double> probs);
    static SimplexPoint vertex(int num_levels, int level);
    static SimplexPoint uniform(int num_levels);

    int size() const { return static_cast<int>(probs_.size()); }
    double prob(int k) const { return probs_[static_cast<std::size_t>(k) - 1]; }  // 1-based
    double tail(int m) const { return tails_[static_cast<std::size_t>(m) - 1]; }  // P_m, 1-based
    const std::vector<double>& probs() const { return probs_; }

  private:
    std::vector<double> probs_;
    std::vector<double> tails_;
};

// B_s^n(p) = n! prod p_k^{s_k} / s_k!; log-space internally.
double multinomial_pmf(const LeaveOneOutStats& s, int n, const SimplexPoint& p);

struct BetaAlpha {
    double beta = 0.0;   // E_{x~Bin(M-1,P)}[success term t(x)]
    double alpha = 0.0;  // E_{x~Bin(M-1,P)}[failure term u(x)]
};

// Exact binomial expectations of the stddev-normalized per-bin advantages
// t(c) = sqrt((M-c-1)/(c+1)), u(c) = -sqrt(c/(M-c)).
BetaAlpha beta_alpha(double tail_prob, int group_size);

// (2/pi) sum_{m=2}^K spacing_m * asin(sqrt(P_m)).
double arcsin_objective(const SimplexPoint& p, const RewardScale& scale);

// d/dP of (2/pi) asin(sqrt(P)): the large-group limit of beta - alpha.
double arcsin_gradient(double tail_prob);

struct ObjectiveField {
    std::vector<double> dh_dp;     // per level k, includes the additive constant
    double alpha_constant = 0.0;   // C_alpha; cancels against sum_k grad p_k
};

// dh/dp_k = sum_{m=2}^k spacing_m (beta(P_m) - alpha(P_m)) + C_alpha, computed
// with exact binomial sums (stddev normalization, unit weights).
ObjectiveField objective_update_field(const SimplexPoint& p, const RewardScale& scale,
                                      int group_size);

// E[f_k(s)] over s ~ Multinomial(M-1, p) by exact enumeration with compensated
// accumulation. Guard: |S_{M-1}| <= 10^6, else TooLargeError.
std::vector<double> expected_field(const EstimatorField& field, const SimplexPoint& p);

struct SampledFieldEstimate {
    std::vector<double> values;      // conditional mean of Z over rollouts at each level
    std::vector<double> std_errors;  // clustered (per-trial) standard errors
    long long trials = 0;
};

// Monte-Carlo estimate of the same expectations: sample groups of size M from
// p, evaluate each rollout's advantage through the field, and average per
// level. Levels never sampled report value 0 with infinite standard error.
SampledFieldEstimate sampled_update_expectation(const EstimatorField& field,
                                                const SimplexPoint& p, long long trials,
                                                std::uint64_t seed);

// Weak compositions of n into `parts` non-negative parts.
long long composition_count(int n, int parts);
void for_each_composition(int n, int parts,
                          const std::function<void(const std::vector<int>&)>& fn);

}  // namespace odrpo
